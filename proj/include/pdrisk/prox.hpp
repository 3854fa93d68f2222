#pragma once

// Exact solvers for the three l1 proximal-denoising programs
//
//   (LS)  argmin ||y - x||_2            s.t. ||x||_1 <= tau
//   (QP)  argmin 1/2 ||y - x||_2^2 + t ||x||_1
//   (BP)  argmin ||x||_1                s.t. ||y - x||_2 <= sigma
//
// together with the projection primitives they are built on. All functions
// are pure and thread-safe.

#include <pdrisk/types.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pdrisk {

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

inline double l1_norm(const Vector &v) {
    CompensatedSum acc;
    for (Index i = 0; i < v.size(); ++i)
        acc.add(std::abs(v[i]));
    return acc.value();
}

inline std::vector<double> sorted_abs_desc(const Vector &y) {
    std::vector<double> a(static_cast<std::size_t>(y.size()));
    for (Index i = 0; i < y.size(); ++i)
        a[static_cast<std::size_t>(i)] = std::abs(y[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    return a;
}

/// ||y - S_t(y)||_2 = ||min(|y|, t)||_2
inline double shrink_residual_norm(const Vector &y, double t) {
    return y.cwiseAbs().cwiseMin(t).norm();
}

} // namespace detail

/// Coordinatewise soft thresholding S_t(y)_i = sign(y_i) max(|y_i| - t, 0).
/// Solves (QP) with threshold t.
inline Vector soft_threshold(const Vector &y, double t) {
    detail::require(std::isfinite(t) && t >= 0.0,
                    "soft_threshold: threshold must be finite and >= 0");
    Vector out(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        const double m = std::abs(y[i]) - t;
        out[i] = m > 0.0 ? std::copysign(m, y[i]) : 0.0;
    }
    return out;
}

/// Euclidean projection onto the l1 ball of radius tau. Solves (LS).
///
/// Sort-based: with u = |y| sorted descending, the threshold is
/// theta = (sum_{i<=r} u_i - tau) / r for the largest r with
/// u_r > (sum_{i<=r} u_i - tau) / r.
inline Vector project_l1_ball(const Vector &y, double tau) {
    detail::require(std::isfinite(tau) && tau >= 0.0,
                    "project_l1_ball: radius must be finite and >= 0");
    if (detail::l1_norm(y) <= tau)
        return y;
    if (tau == 0.0)
        return Vector::Zero(y.size());

    const auto u = detail::sorted_abs_desc(y);
    detail::CompensatedSum cum;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum.add(u[j]);
        const double cand = (cum.value() - tau) / static_cast<double>(j + 1);
        if (u[j] > cand) {
            theta = cand;
        }
    }
    Vector out = soft_threshold(y, std::max(theta, 0.0));

    // Rounding in u_i - theta can leave ||out||_1 a few ulps above tau;
    // nudge the threshold until the constraint holds.
    for (int pass = 0; pass < 4; ++pass) {
        const double excess = detail::l1_norm(out) - tau;
        if (excess <= 0.0)
            break;
        const auto nnz = std::max<Index>(1, (out.array() != 0.0).count());
        theta += excess / static_cast<double>(nnz) + 1e-16 * theta;
        out = soft_threshold(y, theta);
    }
    return out;
}

namespace detail {

/// Root t >= 0 of ||min(|y|, t)||_2 = sigma, assuming 0 < sigma < ||y||_2.
/// Residual^2 is piecewise quadratic in t: on [a_{k+1}, a_k] it is
/// k t^2 + sum_{i>k} a_i^2.
inline double bp_threshold(const Vector &y, double sigma) {
    const auto a = sorted_abs_desc(y);
    const std::size_t n = a.size();
    // tail[k] = sum_{i>=k} a_i^2 (0-based), summed small to large.
    std::vector<double> tail(n + 1, 0.0);
    {
        CompensatedSum acc;
        for (std::size_t i = n; i-- > 0;) {
            acc.add(a[i] * a[i]);
            tail[i] = acc.value();
        }
    }
    const double s2 = sigma * sigma;
    double t = 0.0;
    bool found = false;
    for (std::size_t k = 1; k <= n; ++k) {
        const double lower_t = k < n ? a[k] : 0.0;
        const double lower_val =
            static_cast<double>(k) * lower_t * lower_t + tail[k];
        if (lower_val <= s2) {
            t = std::sqrt(std::max(0.0, (s2 - tail[k]) / static_cast<double>(k)));
            t = std::clamp(t, lower_t, a[k - 1]);
            found = true;
            break;
        }
    }

    const double tol = 1e-10 * std::max(1.0, sigma);
    if (found && std::abs(shrink_residual_norm(y, t) - sigma) <= tol)
        return t;

    // Closed form degraded; bisection on the monotone residual.
    double lo = 0.0;
    double hi = a.front();
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (shrink_residual_norm(y, mid) < sigma)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Basis pursuit denoising with identity measurements. Solves (BP).
/// Returns zero when ||y||_2 <= sigma, otherwise S_t(y) with t chosen so
/// the residual norm equals sigma.
inline Vector bp_denoise(const Vector &y, double sigma) {
    detail::require(std::isfinite(sigma) && sigma >= 0.0,
                    "bp_denoise: sigma must be finite and >= 0");
    if (y.norm() <= sigma)
        return Vector::Zero(y.size());
    if (sigma == 0.0)
        return y;
    return soft_threshold(y, detail::bp_threshold(y, sigma));
}

/// Dispatches to the exact solver for spec.kind.
inline Vector solve_pd(const ProgramSpec &spec, const Vector &y) {
    spec.validate();
    switch (spec.kind) {
    case ProgramKind::ConstrainedLS: return project_l1_ball(y, spec.param);
    case ProgramKind::UnconstrainedQP: return soft_threshold(y, spec.param);
    case ProgramKind::BasisPursuitBP: return bp_denoise(y, spec.param);
    }
    throw InvalidParameter("solve_pd: unknown program");
}

struct EquivalentParameters {
    double tau = 0.0;
    double sigma = 0.0;
    Vector xsharp;
};

/// Parameters (tau, sigma) under which LS and BP reproduce the QP solution
/// x# = S_lambda(y): tau = ||x#||_1 and sigma = ||y - x#||_2.
inline EquivalentParameters equivalence_map(const Vector &y, double lambda) {
    detail::require(std::isfinite(lambda) && lambda > 0.0,
                    "equivalence_map: lambda must be finite and > 0");
    if (y.size() == 0 || y.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("equivalence_map: zero input vector");
    if (lambda >= y.cwiseAbs().maxCoeff())
        throw DegenerateInput(
            "equivalence_map: lambda >= ||y||_inf gives tau = 0");
    EquivalentParameters out;
    out.xsharp = soft_threshold(y, lambda);
    out.tau = detail::l1_norm(out.xsharp);
    out.sigma = (y - out.xsharp).norm();
    return out;
}

/// Projection of z onto tau * (B_1 - x0), computed as
/// P_{tau B_1}(z + tau x0) - tau x0. Requires ||x0||_1 <= 1 so that 0 lies in
/// the shifted ball.
inline Vector project_shifted(const Vector &z, const Vector &x0, double tau) {
    detail::require(z.size() == x0.size(),
                    "project_shifted: z and x0 must have equal length");
    detail::require(std::isfinite(tau) && tau >= 0.0,
                    "project_shifted: tau must be finite and >= 0");
    detail::require(detail::l1_norm(x0) <= 1.0 + 1e-12,
                    "project_shifted: ||x0||_1 must be <= 1");
    const Vector shift = tau * x0;
    return project_l1_ball(z + shift, tau) - shift;
}

/// Membership of h in the l1 descent cone at x:
/// ||h_{T^c}||_1 <= -<sign(x), h> with T = supp(x).
inline bool descent_cone_member(const Vector &x, const Vector &h) {
    detail::require(x.size() == h.size(),
                    "descent_cone_member: x and h must have equal length");
    if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("descent_cone_member: x must be nonzero");
    detail::CompensatedSum off, on;
    for (Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0)
            off.add(std::abs(h[i]));
        else
            on.add(x[i] > 0.0 ? h[i] : -h[i]);
    }
    return off.value() <= -on.value() + 1e-12;
}

} // namespace pdrisk
