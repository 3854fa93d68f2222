#pragma once

// Reference computations for the test suites. None of these call into the
// library's solvers; they use brute force, quadrature or plain scalar search
// so that agreement is meaningful.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Scalar tools

/// Ternary search for the minimum of a convex f on [a, b].
inline double convex_argmin(const std::function<double(double)> &f, double a,
                            double b, int iters = 300) {
    for (int i = 0; i < iters; ++i) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (f(m1) <= f(m2))
            b = m2;
        else
            a = m1;
    }
    return 0.5 * (a + b);
}

/// Root of an increasing f on [a, b] by plain bisection.
inline double increasing_root(const std::function<double(double)> &f, double a,
                              double b, int iters = 400) {
    for (int i = 0; i < iters; ++i) {
        const double m = 0.5 * (a + b);
        if (f(m) < 0.0)
            a = m;
        else
            b = m;
    }
    return 0.5 * (a + b);
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)> &f, double a, double b,
                      double tol, int depth = 50) {
    struct Rec {
        const std::function<double(double)> &f;
        double go(double a, double b, double fa, double fm, double fb, double whole,
                  double tol, int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double diff = left + right - whole;
            if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
                return left + right + diff / 15.0;
            return go(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   go(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    } rec{f};
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec.go(a, b, fa, fm, fb, whole, tol, depth);
}

// ---------------------------------------------------------------------------
// Gaussian integrals. With z = l + t, phi(z) = phi(l) exp(-l t - t^2 / 2), so
// every tail integral is phi(l) times a well-scaled integral over t >= 0.

inline double pdf(double l) {
    return std::exp(-0.5 * l * l) / std::sqrt(2.0 * std::numbers::pi);
}

inline double tail_moment(double l, int power) {
    auto f = [&](double t) { return std::pow(t, power) * std::exp(-l * t - 0.5 * t * t); };
    // exp(-l t - t^2/2) is below 1e-19 of its peak once l t + t^2/2 > 44.
    const double upper = l < 1.0 ? 10.0 : std::min(10.0, 44.0 / l);
    // Fixed panels first so that the adaptive rule cannot stop early on a
    // sharply peaked integrand.
    const int panels = 64;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = upper * p / panels;
        const double b = upper * (p + 1) / panels;
        total += simpson(f, a, b, 1e-17 * (b - a));
    }
    return pdf(l) * total;
}

/// Phi(-l) for l >= 0.
inline double upper_tail(double l) { return tail_moment(l, 0); }

/// G(l) = int_l^inf (z - l)^2 phi(z) dz.
inline double g_quad(double l) { return tail_moment(l, 2); }

/// H(l) = int_l^inf (z - l) phi(z) dz.
inline double h_quad(double l) { return tail_moment(l, 1); }

inline double qp_risk_quad(double lambda, double s, double n) {
    return s * (1.0 + lambda * lambda) + 2.0 * (n - s) * g_quad(lambda);
}

/// Minimizer of qp_risk_quad: dense grid, then ternary search around the best
/// grid cell (the risk is convex near its minimum).
inline double lambda_star_grid(double s, double n, double hi, int points = 4001) {
    double best_l = 0.0;
    double best_v = std::numeric_limits<double>::infinity();
    const double h = hi / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double l = i * h;
        const double v = qp_risk_quad(l, s, n);
        if (v < best_v) {
            best_v = v;
            best_l = l;
        }
    }
    return convex_argmin([&](double l) { return qp_risk_quad(l, s, n); },
                         std::max(0.0, best_l - h), best_l + h, 200);
}

// ---------------------------------------------------------------------------
// Proximal programs on tiny N

/// Euclidean projection onto the l1 ball by face enumeration: every sign
/// pattern in {-1, 0, 1}^N defines a face; project y onto its affine hull,
/// keep the candidates that land in the face, return the nearest.
inline Vec project_l1_faces(const Vec &y, double tau) {
    const int n = static_cast<int>(y.size());
    if (y.cwiseAbs().sum() <= tau)
        return y;
    Vec best = Vec::Zero(n);
    double best_d = (y - best).squaredNorm();
    int total = 1;
    for (int i = 0; i < n; ++i)
        total *= 3;
    std::vector<int> sgn(static_cast<std::size_t>(n));
    for (int code = 0; code < total; ++code) {
        int c = code;
        int active = 0;
        for (int i = 0; i < n; ++i) {
            sgn[static_cast<std::size_t>(i)] = c % 3 - 1;
            c /= 3;
            active += sgn[static_cast<std::size_t>(i)] != 0;
        }
        if (active == 0)
            continue;
        // Face {x_i = 0 off S, sum_S sgn_i x_i = tau}: x_S = y_S - theta sgn_S.
        double dot = 0.0;
        for (int i = 0; i < n; ++i)
            dot += sgn[static_cast<std::size_t>(i)] * y[i];
        const double theta = (dot - tau) / active;
        Vec x = Vec::Zero(n);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const int si = sgn[static_cast<std::size_t>(i)];
            if (si == 0)
                continue;
            x[i] = y[i] - theta * si;
            ok = x[i] * si >= -1e-14;
        }
        if (!ok)
            continue;
        const double d = (y - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = x;
        }
    }
    return best;
}

/// BP by bisection on tau over the face-enumeration projection: the
/// residual ||y - P(y, tau)|| decreases from ||y|| to 0 as tau grows.
inline Vec bp_via_faces(const Vec &y, double sigma) {
    if (y.norm() <= sigma)
        return Vec::Zero(y.size());
    const double tau = increasing_root(
        [&](double t) { return sigma - (y - project_l1_faces(y, t)).norm(); },
        0.0, y.cwiseAbs().sum(), 200);
    return project_l1_faces(y, tau);
}

/// QP coordinate by coordinate with a convex scalar search.
inline Vec qp_scalar(const Vec &y, double lambda) {
    Vec x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        const double r = std::abs(yi) + 1.0;
        x[i] = convex_argmin(
            [&](double v) { return 0.5 * (yi - v) * (yi - v) + lambda * std::abs(v); },
            -r, r);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Support function of l1_radius B_1 cap l2_radius B_2

inline Vec shrink(const Vec &g, double t) {
    Vec out(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        out[i] = std::copysign(std::max(std::abs(g[i]) - t, 0.0), g[i]);
    return out;
}

/// Dual form: sup = min_{t >= 0} [lam t + alpha ||S_t(g)||_2], a convex
/// scalar problem.
inline double sup_dual(const Vec &g, double lam, double alpha) {
    const double top = g.cwiseAbs().maxCoeff();
    auto f = [&](double t) { return lam * t + alpha * shrink(g, t).norm(); };
    const double t = convex_argmin(f, 0.0, top, 400);
    return std::min({f(t), f(0.0), f(top)});
}

/// Primal brute force in two dimensions: scan directions on the circle and
/// take the largest feasible radius along each.
inline double sup_grid_2d(const Vec &g, double lam, double alpha, int dirs = 200000) {
    double best = 0.0;
    for (int i = 0; i < dirs; ++i) {
        const double th = 2.0 * std::numbers::pi * i / dirs;
        const double c = std::cos(th);
        const double s = std::sin(th);
        const double r = std::min(alpha, lam / (std::abs(c) + std::abs(s)));
        best = std::max(best, r * (c * g[0] + s * g[1]));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Frozen bracket for min_lambda qp_risk(lambda; s, N) against s log(N/s),
// fitted once over s in 1..50, N in 1e2..1e6 (N > 2s).

inline constexpr double stat_dim_c_low = 1.3;
inline constexpr double stat_dim_c_high = 2.45;

} // namespace oracle
