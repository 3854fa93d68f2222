#pragma once

// Monte-Carlo experiment harness: ground-truth instances, the normalized
// loss eta^-2 ||x* - x0||^2, sweeps over the normalized parameter
// rho = param / param*, optimal-parameter estimation and the BP best-loss
// growth experiment.
//
// Every random draw comes from a stream keyed by (seed, i, j), see
// random.hpp, and cell results are reduced in (i, j) order; curves are
// therefore bit-identical for any worker count.

#include <pdrisk/analytic_risk.hpp>
#include <pdrisk/geometry.hpp>
#include <pdrisk/parallel.hpp>
#include <pdrisk/prox.hpp>
#include <pdrisk/random.hpp>
#include <pdrisk/scalar_search.hpp>
#include <pdrisk/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace pdrisk {

/// One denoising problem: y = x0 + eta z.
struct ProblemInstance {
    Vector x0;
    std::int64_t s = 0;
    Index bigN = 0;
    double eta = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(bigN >= 1 && x0.size() == bigN,
                        "ProblemInstance: x0 must have length N >= 1");
        detail::require(s >= 0 && s <= bigN,
                        "ProblemInstance: need 0 <= s <= N");
        detail::require((x0.array() != 0.0).count() <= s,
                        "ProblemInstance: x0 has more than s nonzeros");
        detail::require(std::isfinite(eta) && eta >= 0.0,
                        "ProblemInstance: eta must be finite and >= 0");
        detail::require_finite(x0, "ProblemInstance: x0 must be finite");
    }
};

/// x0 = entry_scale * (e_1 + ... + e_s).
inline ProblemInstance make_instance(std::int64_t s, Index bigN, double eta,
                                     double entry_scale, std::uint64_t seed) {
    detail::require(bigN >= 1, "make_instance: N must be >= 1");
    detail::require(s >= 0 && s <= bigN, "make_instance: need 0 <= s <= N");
    detail::require(std::isfinite(eta) && eta > 0.0,
                    "make_instance: eta must be finite and > 0");
    detail::require(std::isfinite(entry_scale),
                    "make_instance: entry scale must be finite");
    ProblemInstance inst;
    inst.x0 = Vector::Zero(bigN);
    inst.x0.head(s).setConstant(entry_scale);
    inst.s = s;
    inst.bigN = bigN;
    inst.eta = eta;
    inst.seed = seed;
    return inst;
}

/// The default x0 = N (e_1 + ... + e_s).
inline ProblemInstance make_instance(std::int64_t s, Index bigN, double eta,
                                     std::uint64_t seed) {
    return make_instance(s, bigN, eta, static_cast<double>(bigN), seed);
}

namespace detail {

inline double loss_normalizer(double eta) {
    return eta > 0.0 ? 1.0 / (eta * eta) : 1.0;
}

} // namespace detail

/// eta^-2 ||solve(x0 + eta z) - x0||_2^2. With eta = 0 the raw squared
/// error is returned.
inline double loss(const ProgramSpec &program, const ProblemInstance &inst,
                   const Vector &z) {
    detail::require(z.size() == inst.bigN, "loss: z must have length N");
    const Vector y = inst.x0 + inst.eta * z;
    const Vector xhat = solve_pd(program, y);
    return detail::loss_normalizer(inst.eta) * (xhat - inst.x0).squaredNorm();
}

/// Logarithmically spaced normalized parameters, symmetric about rho = 1.
struct SweepGrid {
    std::vector<double> rho_values;

    /// n odd points spanning [1/span, span]; the middle point is exactly 1.
    static SweepGrid logarithmic(int n, double span) {
        detail::require(n >= 1 && n % 2 == 1, "SweepGrid: n must be odd");
        detail::require(std::isfinite(span) && span >= 1.0,
                        "SweepGrid: span must be finite and >= 1");
        SweepGrid g;
        g.rho_values.resize(static_cast<std::size_t>(n));
        const int half = (n - 1) / 2;
        const double log_span = std::log(span);
        for (int i = 0; i < n; ++i) {
            const double e =
                half == 0 ? 0.0 : static_cast<double>(i - half) / half;
            g.rho_values[static_cast<std::size_t>(i)] = std::exp(e * log_span);
        }
        g.rho_values[static_cast<std::size_t>(half)] = 1.0;
        return g;
    }

    std::size_t size() const { return rho_values.size(); }
};

struct RiskPoint {
    double rho = 0.0;
    double param_value = 0.0;
    double mean_nnse = 0.0;
    double stderr_nnse = 0.0;
};

struct RiskCurve {
    ProgramKind program = ProgramKind::ConstrainedLS;
    std::vector<RiskPoint> points;
    int k = 0;
    std::int64_t s = 0;
    Index bigN = 0;
    double eta = 0.0;
    std::uint64_t seed = 0;
};

/// Whether the k noise draws are shared across grid points.
enum class NoiseMode {
    Independent, ///< stream (seed, i, j) per cell
    Shared,      ///< stream (seed, 0, j) for every grid point
};

struct SweepOptions {
    unsigned workers = 1;
    NoiseMode noise = NoiseMode::Independent;
};

namespace detail {

struct CellStats {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error of k values, summed in index order.
inline CellStats summarize(const double *vals, int k) {
    CompensatedSum acc;
    for (int j = 0; j < k; ++j)
        acc.add(vals[j]);
    const double mean = acc.value() / k;
    if (k < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (int j = 0; j < k; ++j)
        ss += (vals[j] - mean) * (vals[j] - mean);
    return {mean, std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k))};
}

/// Evaluates cell(i, j) for i < n_points, j < k in parallel and returns
/// per-point statistics.
template <class Cell>
std::vector<CellStats> run_cells(std::size_t n_points, int k, unsigned workers,
                                 Cell &&cell) {
    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<double> vals(n_points * kk);
    parallel_for(n_points * kk, workers, [&](std::size_t c) {
        vals[c] = cell(c / kk, c % kk);
    });
    std::vector<CellStats> out(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        out[i] = summarize(vals.data() + i * kk, k);
    return out;
}

inline std::uint64_t noise_row(NoiseMode mode, std::size_t i) {
    return mode == NoiseMode::Shared ? 0 : static_cast<std::uint64_t>(i);
}

} // namespace detail

/// Average loss over k noise draws at every param = rho_i * rho_star.
inline RiskCurve sweep(ProgramKind kind, const SweepGrid &grid,
                       const ProblemInstance &inst, int k, double rho_star,
                       const SweepOptions &opts = {}) {
    inst.validate();
    detail::require(k >= 1, "sweep: k must be >= 1");
    detail::require(std::isfinite(rho_star) && rho_star > 0.0,
                    "sweep: rho_star must be finite and > 0");
    detail::require(grid.size() >= 1, "sweep: empty grid");

    const auto stats = detail::run_cells(
        grid.size(), k, opts.workers, [&](std::size_t i, std::size_t j) {
            const Vector z =
                standard_normal(inst.bigN, inst.seed,
                                detail::noise_row(opts.noise, i), j);
            return loss({kind, grid.rho_values[i] * rho_star}, inst, z);
        });

    RiskCurve curve;
    curve.program = kind;
    curve.k = k;
    curve.s = inst.s;
    curve.bigN = inst.bigN;
    curve.eta = inst.eta;
    curve.seed = inst.seed;
    for (std::size_t i = 0; i < grid.size(); ++i)
        curve.points.push_back({grid.rho_values[i],
                                grid.rho_values[i] * rho_star, stats[i].mean,
                                stats[i].std_error});
    return curve;
}

/// Mean and standard error of the loss at a fixed parameter over k draws
/// from streams (seed, mc_risk tag, j).
inline MeanEstimate mc_risk(ProgramKind kind, double param,
                            const ProblemInstance &inst, int k,
                            unsigned workers = 1) {
    inst.validate();
    detail::require(k >= 2, "mc_risk: k must be >= 2");
    const ProgramSpec spec{kind, param};
    spec.validate();
    const auto stats = detail::run_cells(
        1, k, workers, [&](std::size_t, std::size_t j) {
            const Vector z =
                standard_normal(inst.bigN, inst.seed, stream_tag_mc_risk, j);
            return loss(spec, inst, z);
        });
    return {stats[0].mean, stats[0].std_error};
}

struct OptimalParamOptions {
    int k = 50;              ///< realizations per Monte-Carlo risk evaluation
    int coarse_points = 21;  ///< log grid scanned before golden-section
    double bracket = 4.0;    ///< coarse grid spans [guess/bracket, guess*bracket]
    double rel_tol = 1e-3;   ///< golden-section tolerance, relative
    unsigned workers = 1;
};

namespace detail {

/// Entries are well separated when every nonzero |x0_j| exceeds the largest
/// threshold the closed form can select by a margin of 10 noise units.
inline bool well_separated(const ProblemInstance &inst) {
    const double lam_hi =
        lambda_bar(std::max<Index>(inst.bigN, 2)) + 2.0;
    double min_abs = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < inst.bigN; ++i)
        if (inst.x0[i] != 0.0)
            min_abs = std::min(min_abs, std::abs(inst.x0[i]));
    return min_abs >= inst.eta * (lam_hi + 10.0);
}

/// Golden-section on the Monte-Carlo risk with common random numbers:
/// every candidate parameter is scored on the same k noise draws.
inline double mc_param_search(ProgramKind kind, const ProblemInstance &inst,
                              double guess, const OptimalParamOptions &opts) {
    detail::require(opts.k >= 1 && opts.coarse_points >= 3 &&
                        opts.bracket > 1.0 && opts.rel_tol > 0.0,
                    "OptimalParamOptions: invalid search settings");
    auto risk = [&](double param) {
        const auto stats = run_cells(
            1, opts.k, opts.workers, [&](std::size_t, std::size_t j) {
                const Vector z = standard_normal(inst.bigN, inst.seed,
                                                 stream_tag_search, j);
                return loss({kind, param}, inst, z);
            });
        return stats[0].mean;
    };
    const int n = opts.coarse_points;
    const double lo = guess / opts.bracket;
    const double ratio = std::pow(opts.bracket * opts.bracket, 1.0 / (n - 1));
    std::vector<double> params(static_cast<std::size_t>(n));
    std::vector<double> risks(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        params[static_cast<std::size_t>(i)] = lo * std::pow(ratio, i);
        risks[static_cast<std::size_t>(i)] = risk(params[static_cast<std::size_t>(i)]);
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(risks.begin(), risks.end()) - risks.begin());
    const double a = params[best == 0 ? 0 : best - 1];
    const double b = params[std::min<std::size_t>(best + 1, params.size() - 1)];
    // Search in log-parameter so the tolerance is relative.
    const auto found = golden_section(
        [&](double lp) { return risk(std::exp(lp)); }, std::log(a),
        std::log(b), std::log1p(opts.rel_tol));
    return found.fx <= risks[best] ? std::exp(found.x) : params[best];
}

} // namespace detail

/// Risk-optimal governing parameter param* (signal units).
///  - LS: ||x0||_1, exact in the low-noise regime.
///  - QP: eta * lambda_star when x0 is well separated from the noise,
///    otherwise a Monte-Carlo search started at eta sqrt(2 log(N/s)).
///  - BP: Monte-Carlo search started at eta sqrt(N).
inline double optimal_param(ProgramKind kind, const ProblemInstance &inst,
                            const OptimalParamOptions &opts = {}) {
    inst.validate();
    const auto nnz = static_cast<std::int64_t>((inst.x0.array() != 0.0).count());
    switch (kind) {
    case ProgramKind::ConstrainedLS:
        if (nnz == 0)
            throw DegenerateInput("optimal_param: LS with x0 = 0 gives tau* = 0");
        return detail::l1_norm(inst.x0);
    case ProgramKind::UnconstrainedQP: {
        if (nnz == 0)
            throw DegenerateInput("optimal_param: QP needs s >= 1");
        if (inst.eta == 0.0)
            return 0.0;
        if (detail::well_separated(inst))
            return inst.eta * lambda_star(nnz, inst.bigN);
        const double ratio = static_cast<double>(inst.bigN) / static_cast<double>(nnz);
        const double guess =
            inst.eta * std::sqrt(2.0 * std::log(std::max(ratio, std::numbers::e)));
        return detail::mc_param_search(kind, inst, guess, opts);
    }
    case ProgramKind::BasisPursuitBP:
        if (inst.eta == 0.0)
            return 0.0;
        return detail::mc_param_search(
            kind, inst, inst.eta * std::sqrt(static_cast<double>(inst.bigN)),
            opts);
    }
    throw InvalidParameter("optimal_param: unknown program");
}

struct BestLossRow {
    Index bigN = 0;
    double mean_best = 0.0;
    double std_best = 0.0;
};

/// The conditioning event {0.5 sqrt(N) < ||z||^2 - N < 5 sqrt(N)} expressed
/// in the sqrt(2N) units of EventSpec.
inline EventSpec best_loss_event(Index bigN) {
    return {EventKind::ZPlusMinus, 0.5 / std::numbers::sqrt2,
            5.0 / std::numbers::sqrt2, bigN};
}

/// sigma grid for best_loss_vs_N: n log-spaced points on [0.2, 2] eta sqrt(N)
/// (the single point eta sqrt(N) when n = 1).
inline std::vector<double> best_loss_sigma_grid(Index bigN, double eta,
                                                int n_sigma) {
    detail::require(n_sigma >= 1, "best_loss_vs_N: n_sigma must be >= 1");
    const double pivot = eta * std::sqrt(static_cast<double>(bigN));
    if (n_sigma == 1)
        return {pivot};
    std::vector<double> out(static_cast<std::size_t>(n_sigma));
    const double lo = std::log(0.2);
    const double hi = std::log(2.0);
    for (int i = 0; i < n_sigma; ++i)
        out[static_cast<std::size_t>(i)] =
            pivot * std::exp(lo + (hi - lo) * i / (n_sigma - 1));
    return out;
}

/// For each N: k noise draws conditioned on best_loss_event(N), the minimum
/// BP loss over the sigma grid per draw, then mean and sample standard
/// deviation of those minima. x0 = N (e_1 + ... + e_s).
inline std::vector<BestLossRow>
best_loss_vs_N(const std::vector<Index> &n_grid, std::int64_t s, double eta,
               int k, int n_sigma, std::uint64_t seed, unsigned workers = 1) {
    detail::require(!n_grid.empty(), "best_loss_vs_N: empty N grid");
    detail::require(k >= 1, "best_loss_vs_N: k must be >= 1");
    for (Index n : n_grid)
        detail::require(n >= 2 && s <= n, "best_loss_vs_N: need 2 <= N, s <= N");

    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<double> minima(n_grid.size() * kk);
    parallel_for(minima.size(), workers, [&](std::size_t c) {
        const std::size_t i = c / kk;
        const std::size_t j = c % kk;
        const Index n = n_grid[i];
        const auto inst = make_instance(s, n, eta, seed);
        const Vector z = sample_event(best_loss_event(n), stream_key(seed, i, j));
        double best = std::numeric_limits<double>::infinity();
        for (double sigma : best_loss_sigma_grid(n, eta, n_sigma))
            best = std::min(best, loss({ProgramKind::BasisPursuitBP, sigma}, inst, z));
        minima[c] = best;
    });

    std::vector<BestLossRow> rows;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double *v = minima.data() + i * kk;
        const auto st = detail::summarize(v, k);
        const double sd = st.std_error * std::sqrt(static_cast<double>(k));
        rows.push_back({n_grid[i], st.mean, sd});
    }
    return rows;
}

} // namespace pdrisk
