#pragma once

// Generalized Lasso with a measurement matrix A and K = B_1^N:
//
//   (LS_K)  argmin ||y - Ax||_2          s.t. ||x||_1 <= tau
//   (QP_K)  argmin 1/2 ||y - Ax||_2^2 + lambda ||x||_1
//   (BP_K)  argmin ||x||_1               s.t. ||y - Ax||_2 <= sigma
//
// plus Gaussian measurement matrices, the orthonormal 1D Haar transform and
// two desk-scale experiments built on them (Haar-domain denoising and a
// compressed-sensing parameter sweep).

#include <pdrisk/analytic_risk.hpp>
#include <pdrisk/mc_lab.hpp>
#include <pdrisk/prox.hpp>
#include <pdrisk/random.hpp>
#include <pdrisk/types.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace pdrisk {

/// m x N matrix with iid N(0, 1/m) entries, filled column by column from
/// the stream (seed, matrix tag, 0).
inline Matrix gaussian_matrix(Index m, Index bigN, std::uint64_t seed) {
    detail::require(m >= 1 && bigN >= 1, "gaussian_matrix: need m, N >= 1");
    NormalStream stream(seed, stream_tag_matrix, 0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Matrix a(m, bigN);
    for (Index j = 0; j < bigN; ++j)
        for (Index i = 0; i < m; ++i)
            a(i, j) = scale * stream();
    return a;
}

namespace detail {

inline bool is_power_of_two(Index n) { return n >= 1 && (n & (n - 1)) == 0; }

} // namespace detail

/// Orthonormal 1D Haar analysis. Output layout: [coarsest scaling
/// coefficient, coarsest detail, ..., finest details].
inline Vector haar_forward(const Vector &x) {
    detail::require(detail::is_power_of_two(x.size()),
                    "haar_forward: length must be a power of 2");
    Vector w = x;
    Vector tmp(x.size());
    const double r = std::numbers::sqrt2 / 2.0;
    for (Index len = x.size(); len > 1; len /= 2) {
        const Index half = len / 2;
        for (Index i = 0; i < half; ++i) {
            tmp[i] = r * (w[2 * i] + w[2 * i + 1]);
            tmp[half + i] = r * (w[2 * i] - w[2 * i + 1]);
        }
        w.head(len) = tmp.head(len);
    }
    return w;
}

/// Inverse of haar_forward.
inline Vector haar_inverse(const Vector &w) {
    detail::require(detail::is_power_of_two(w.size()),
                    "haar_inverse: length must be a power of 2");
    Vector x = w;
    Vector tmp(w.size());
    const double r = std::numbers::sqrt2 / 2.0;
    for (Index len = 2; len <= w.size(); len *= 2) {
        const Index half = len / 2;
        for (Index i = 0; i < half; ++i) {
            tmp[2 * i] = r * (x[i] + x[half + i]);
            tmp[2 * i + 1] = r * (x[i] - x[half + i]);
        }
        x.head(len) = tmp.head(len);
    }
    return x;
}

struct SolverReport {
    Vector solution;
    int iterations = 0;
    double final_objective = 0.0;
    bool converged = false;
};

/// ||A||_op^2 by power iteration on A^T A, inflated by 5% so that 1/L is a
/// valid gradient step.
inline double lipschitz_estimate(const Matrix &a, int iterations = 50) {
    detail::require(a.size() > 0, "lipschitz_estimate: empty matrix");
    Vector v = standard_normal(a.cols(), 0x5EED, stream_tag_matrix, 1);
    double est = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Vector w = a.transpose() * (a * v);
        const double nrm = w.norm();
        if (nrm == 0.0)
            return 1.0;
        est = v.dot(w) / v.squaredNorm();
        v = w / nrm;
    }
    return 1.05 * est;
}

namespace detail {

inline void check_problem(const Matrix &a, const Vector &y) {
    require(a.rows() == y.size(), "solver: A rows must equal length of y");
    require(a.allFinite() && y.allFinite(), "solver: A and y must be finite");
}

inline bool stalled(double f_old, double f_new, double tol) {
    const double scale = std::max(std::abs(f_old), 1e-300);
    return (f_old - f_new) <= tol * scale;
}

inline void check_monotone(double f_old, double f_new, const char *who) {
    if (f_new > f_old + 1e-9 * std::max(1.0, std::abs(f_old)))
        throw SolverFailure(std::string(who) + ": objective increased");
}

} // namespace detail

struct IterativeOptions {
    int max_iter = 10000;
    double tol = 1e-10;       ///< relative objective decrease to stop at
    bool accelerated = false; ///< FISTA momentum with restart on increase
    double lipschitz = 0.0;   ///< 0: estimate by power iteration
};

/// ISTA for (QP_K): x <- S_{lambda/L}(x - A^T(Ax - y)/L), starting at `x0`.
inline SolverReport ista_qp(const Matrix &a, const Vector &y, double lambda,
                            const IterativeOptions &opts,
                            const Vector *start = nullptr) {
    detail::check_problem(a, y);
    detail::require(std::isfinite(lambda) && lambda >= 0.0,
                    "ista_qp: lambda must be finite and >= 0");
    const double lip = opts.lipschitz > 0.0 ? opts.lipschitz : lipschitz_estimate(a);
    auto objective = [&](const Vector &x) {
        return 0.5 * (y - a * x).squaredNorm() + lambda * detail::l1_norm(x);
    };

    SolverReport rep;
    Vector x = start ? *start : Vector::Zero(a.cols());
    Vector mom = x;
    double f = objective(x);
    double t = 1.0;
    for (rep.iterations = 1; rep.iterations <= opts.max_iter; ++rep.iterations) {
        const Vector &base = opts.accelerated ? mom : x;
        const Vector grad = a.transpose() * (a * base - y);
        Vector next = soft_threshold(base - grad / lip, lambda / lip);
        const double f_next = objective(next);
        if (opts.accelerated) {
            if (f_next > f) {
                // Restart: drop the momentum and retake a plain step.
                mom = x;
                t = 1.0;
                continue;
            }
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            mom = next + ((t - 1.0) / t_next) * (next - x);
            t = t_next;
        } else {
            detail::check_monotone(f, f_next, "ista_qp");
        }
        const bool done = detail::stalled(f, f_next, opts.tol);
        x = std::move(next);
        f = f_next;
        if (done) {
            rep.converged = true;
            break;
        }
    }
    rep.iterations = std::min(rep.iterations, opts.max_iter);
    rep.solution = std::move(x);
    rep.final_objective = f;
    return rep;
}

inline SolverReport ista_qp(const Matrix &a, const Vector &y, double lambda,
                            int max_iter, double tol) {
    IterativeOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    return ista_qp(a, y, lambda, opts);
}

/// Projected gradient for (LS_K): x <- P_{tau B_1}(x - A^T(Ax - y)/L).
inline SolverReport pg_ls(const Matrix &a, const Vector &y, double tau,
                          const IterativeOptions &opts) {
    detail::check_problem(a, y);
    detail::require(std::isfinite(tau) && tau >= 0.0,
                    "pg_ls: tau must be finite and >= 0");
    const double lip = opts.lipschitz > 0.0 ? opts.lipschitz : lipschitz_estimate(a);
    auto objective = [&](const Vector &x) { return 0.5 * (y - a * x).squaredNorm(); };

    SolverReport rep;
    Vector x = Vector::Zero(a.cols());
    double f = objective(x);
    for (rep.iterations = 1; rep.iterations <= opts.max_iter; ++rep.iterations) {
        const Vector grad = a.transpose() * (a * x - y);
        Vector next = project_l1_ball(x - grad / lip, tau);
        const double f_next = objective(next);
        detail::check_monotone(f, f_next, "pg_ls");
        const bool done = detail::stalled(f, f_next, opts.tol);
        x = std::move(next);
        f = f_next;
        if (done) {
            rep.converged = true;
            break;
        }
    }
    rep.iterations = std::min(rep.iterations, opts.max_iter);
    rep.solution = std::move(x);
    rep.final_objective = f;
    return rep;
}

inline SolverReport pg_ls(const Matrix &a, const Vector &y, double tau,
                          int max_iter, double tol) {
    IterativeOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    return pg_ls(a, y, tau, opts);
}

struct BpGeneralOptions {
    IterativeOptions inner;
    double residual_rtol = 1e-4; ///< stop when |r - sigma| <= rtol * sigma
    int max_bisections = 200;
};

/// (BP_K) by bisection on lambda: r(lambda) = ||y - A x_QP(lambda)||_2 is
/// nondecreasing, so the QP solution whose residual matches sigma solves BP.
inline SolverReport bp_sigma_general(const Matrix &a, const Vector &y,
                                     double sigma,
                                     const BpGeneralOptions &opts) {
    detail::check_problem(a, y);
    detail::require(std::isfinite(sigma) && sigma >= 0.0,
                    "bp_sigma_general: sigma must be finite and >= 0");
    SolverReport rep;
    if (y.norm() <= sigma) {
        rep.solution = Vector::Zero(a.cols());
        rep.converged = true;
        return rep;
    }
    const Vector x_ls = a.completeOrthogonalDecomposition().solve(y);
    const double floor = (y - a * x_ls).norm();
    if (sigma < floor * (1.0 - 1e-12))
        throw Infeasible("bp_sigma_general: sigma is below the least-squares "
                         "residual floor");

    IterativeOptions inner = opts.inner;
    if (inner.lipschitz <= 0.0)
        inner.lipschitz = lipschitz_estimate(a);

    double lo = 0.0;                            // r(lo) <= sigma
    double hi = (a.transpose() * y).cwiseAbs().maxCoeff(); // r(hi) = ||y||
    double r_lo = floor;
    double r_hi = y.norm();
    Vector warm = Vector::Zero(a.cols());
    SolverReport best;
    double best_gap = INFINITY;
    int total_iters = 0;
    for (int b = 0; b < opts.max_bisections; ++b) {
        const double mid = 0.5 * (lo + hi);
        auto qp = ista_qp(a, y, mid, inner, &warm);
        total_iters += qp.iterations;
        const double r = (y - a * qp.solution).norm();
        if (!(r_lo <= r_hi + 1e-12 * r_hi))
            throw SolverFailure("bp_sigma_general: residual bracket inverted");
        const double gap = std::abs(r - sigma);
        if (gap < best_gap) {
            best_gap = gap;
            best = qp;
        }
        if (gap <= opts.residual_rtol * sigma)
            break;
        // Flat stretches resolve toward the smaller lambda.
        if (r < sigma) {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
        warm = qp.solution;
        if (hi - lo <= 1e-15 * std::max(1.0, hi))
            break;
    }
    rep.solution = best.solution;
    rep.iterations = total_iters;
    rep.final_objective = detail::l1_norm(best.solution);
    rep.converged = best_gap <= opts.residual_rtol * sigma;
    return rep;
}

inline SolverReport bp_sigma_general(const Matrix &a, const Vector &y,
                                     double sigma, int max_iter, double tol) {
    BpGeneralOptions opts;
    opts.inner.max_iter = max_iter;
    opts.inner.tol = tol;
    return bp_sigma_general(a, y, sigma, opts);
}

/// Solves one of the generalized programs.
inline SolverReport solve_general(const ProgramSpec &spec, const Matrix &a,
                                  const Vector &y, const BpGeneralOptions &opts) {
    spec.validate();
    switch (spec.kind) {
    case ProgramKind::ConstrainedLS: return pg_ls(a, y, spec.param, opts.inner);
    case ProgramKind::UnconstrainedQP: return ista_qp(a, y, spec.param, opts.inner);
    case ProgramKind::BasisPursuitBP: return bp_sigma_general(a, y, spec.param, opts);
    }
    throw InvalidParameter("solve_general: unknown program");
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline RiskCurve make_curve(ProgramKind kind, const SweepGrid &grid,
                            double rho_star, const std::vector<CellStats> &st,
                            int k, std::int64_t s, Index n, double eta,
                            std::uint64_t seed) {
    RiskCurve c;
    c.program = kind;
    c.k = k;
    c.s = s;
    c.bigN = n;
    c.eta = eta;
    c.seed = seed;
    for (std::size_t i = 0; i < grid.size(); ++i)
        c.points.push_back({grid.rho_values[i], grid.rho_values[i] * rho_star,
                            st[i].mean, st[i].std_error});
    return c;
}

} // namespace detail

/// A signal that is s-sparse in the Haar domain.
struct HaarProblem {
    Vector coeffs; ///< ground truth Haar coefficients w0
    Vector signal; ///< haar_inverse(w0)
    std::int64_t s = 0;
    double eta = 0.0;
    std::uint64_t seed = 0;
};

/// s coefficients at distinct random positions with values +-entry_scale.
inline HaarProblem make_haar_problem(std::int64_t s, Index bigN, double eta,
                                     double entry_scale, std::uint64_t seed) {
    detail::require(detail::is_power_of_two(bigN),
                    "make_haar_problem: N must be a power of 2");
    detail::require(s >= 0 && s <= bigN, "make_haar_problem: need 0 <= s <= N");
    detail::require(std::isfinite(eta) && eta >= 0.0,
                    "make_haar_problem: eta must be finite and >= 0");
    std::vector<Index> idx(static_cast<std::size_t>(bigN));
    for (Index i = 0; i < bigN; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    NormalStream stream(seed, stream_tag_signal, 0);
    auto &eng = stream.engine();
    HaarProblem p;
    p.coeffs = Vector::Zero(bigN);
    for (std::int64_t k = 0; k < s; ++k) {
        // Partial Fisher-Yates; the draw only needs to be deterministic.
        const auto remaining = static_cast<std::uint64_t>(bigN - k);
        const auto pick = static_cast<std::size_t>(k) +
                          static_cast<std::size_t>(eng() % remaining);
        std::swap(idx[static_cast<std::size_t>(k)], idx[pick]);
        const double sign = (eng() & 1u) ? 1.0 : -1.0;
        p.coeffs[idx[static_cast<std::size_t>(k)]] = sign * entry_scale;
    }
    p.signal = haar_inverse(p.coeffs);
    p.s = s;
    p.eta = eta;
    p.seed = seed;
    return p;
}

/// Haar-domain loss: noise enters in the signal domain, the program runs on
/// the Haar coefficients of the noisy signal, and the error is measured in
/// the signal domain after inverting the transform.
inline double haar_loss(const ProgramSpec &spec, const HaarProblem &p,
                        const Vector &z) {
    const Vector y = haar_forward(p.signal + p.eta * z);
    const Vector est = haar_inverse(solve_pd(spec, y));
    return detail::loss_normalizer(p.eta) * (est - p.signal).squaredNorm();
}

/// param* for the Haar problem, mirroring optimal_param on the coefficient
/// domain. With eta = 0 the QP and BP optima are 0.
inline double haar_optimal_param(ProgramKind kind, const HaarProblem &p,
                                 const OptimalParamOptions &opts = {}) {
    if (p.eta == 0.0)
        return kind == ProgramKind::ConstrainedLS ? detail::l1_norm(p.coeffs) : 0.0;
    // The transform is orthonormal, so Wz is again standard normal and the
    // coefficient-domain instance has the same risk.
    ProblemInstance inst;
    inst.x0 = p.coeffs;
    inst.s = p.s;
    inst.bigN = p.coeffs.size();
    inst.eta = p.eta;
    inst.seed = p.seed;
    return optimal_param(kind, inst, opts);
}

inline RiskCurve haar_sweep(ProgramKind kind, const SweepGrid &grid,
                            const HaarProblem &p, int k, double rho_star,
                            unsigned workers = 1) {
    detail::require(k >= 1, "haar_sweep: k must be >= 1");
    detail::require(std::isfinite(rho_star) && rho_star >= 0.0,
                    "haar_sweep: rho_star must be finite and >= 0");
    const Index n = p.coeffs.size();
    const auto st = detail::run_cells(
        grid.size(), k, workers, [&](std::size_t i, std::size_t j) {
            const Vector z = standard_normal(n, p.seed, i, j);
            return haar_loss({kind, grid.rho_values[i] * rho_star}, p, z);
        });
    return detail::make_curve(kind, grid, rho_star, st, k, p.s, n, p.eta, p.seed);
}

/// Compressed-sensing instance: y = A x0 + eta z with z in R^m.
struct CsProblem {
    Matrix a;
    ProblemInstance inst; ///< x0, s, N, eta, seed
};

inline CsProblem make_cs_problem(std::int64_t s, Index bigN, Index m, double eta,
                                 double entry_scale, std::uint64_t seed) {
    CsProblem p;
    p.inst = make_instance(s, bigN, eta, entry_scale, seed);
    p.a = gaussian_matrix(m, bigN, seed);
    return p;
}

inline double cs_loss(const ProgramSpec &spec, const CsProblem &p,
                      const Vector &z, const BpGeneralOptions &opts) {
    const Vector y = p.a * p.inst.x0 + p.inst.eta * z;
    const auto rep = solve_general(spec, p.a, y, opts);
    return detail::loss_normalizer(p.inst.eta) *
           (rep.solution - p.inst.x0).squaredNorm();
}

/// Reference parameters for the generalized programs: tau* = ||x0||_1,
/// lambda* = eta lambda_star(s, N) (columns have unit norm on average, so
/// A^T z behaves like standard noise), sigma* = eta sqrt(m).
inline double cs_reference_param(ProgramKind kind, const CsProblem &p) {
    const auto &inst = p.inst;
    switch (kind) {
    case ProgramKind::ConstrainedLS: return detail::l1_norm(inst.x0);
    case ProgramKind::UnconstrainedQP:
        return inst.eta * lambda_star(std::max<std::int64_t>(inst.s, 1), inst.bigN);
    case ProgramKind::BasisPursuitBP:
        return inst.eta * std::sqrt(static_cast<double>(p.a.rows()));
    }
    throw InvalidParameter("cs_reference_param: unknown program");
}

inline RiskCurve cs_sweep(ProgramKind kind, const SweepGrid &grid,
                          const CsProblem &p, int k, double rho_star,
                          const BpGeneralOptions &opts, unsigned workers = 1) {
    detail::require(k >= 1, "cs_sweep: k must be >= 1");
    detail::require(std::isfinite(rho_star) && rho_star > 0.0,
                    "cs_sweep: rho_star must be finite and > 0");
    BpGeneralOptions o = opts;
    if (o.inner.lipschitz <= 0.0)
        o.inner.lipschitz = lipschitz_estimate(p.a);
    const Index m = p.a.rows();
    const auto st = detail::run_cells(
        grid.size(), k, workers, [&](std::size_t i, std::size_t j) {
            const Vector z = standard_normal(m, p.inst.seed, i, j);
            return cs_loss({kind, grid.rho_values[i] * rho_star}, p, z, o);
        });
    return detail::make_curve(kind, grid, rho_star, st, k, p.inst.s,
                              p.inst.bigN, p.inst.eta, p.inst.seed);
}

} // namespace pdrisk
