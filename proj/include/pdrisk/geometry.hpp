#pragma once

// Gaussian mean width of capped l1 balls, Bellec's bounds for the width of a
// polytope intersected with a Euclidean ball, rejection samplers for the
// noise events used in the BP analysis, and the theorem-constant arithmetic
// that turns (a1, C1, C2, L) into a minimal dimension N0.

#include <pdrisk/prox.hpp>
#include <pdrisk/random.hpp>
#include <pdrisk/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace pdrisk {

/// The set l1_radius * B_1^N  intersected with  l2_radius * B_2^N.
struct GmwSetSpec {
    double l1_radius = 1.0;
    double l2_radius = 1.0;
    Index dim = 1;

    void validate() const {
        detail::require(std::isfinite(l1_radius) && l1_radius > 0.0,
                        "GmwSetSpec: l1 radius must be finite and > 0");
        detail::require(std::isfinite(l2_radius) && l2_radius > 0.0,
                        "GmwSetSpec: l2 radius must be finite and > 0");
        detail::require(dim >= 1, "GmwSetSpec: dim must be >= 1");
    }
};

struct LinearSup {
    double value = 0.0;
    Vector maximizer;
};

/// max <x, g> over ||x||_1 <= l1_radius, ||x||_2 <= l2_radius.
///
/// Three regimes, with c = l1_radius / l2_radius and m the multiplicity of
/// max|g_i|:
///  - c <= sqrt(m): the l2 cap is slack, value = l1_radius ||g||_inf;
///  - ||g||_1 / ||g||_2 <= c: the l1 constraint is slack, value = l2_radius ||g||_2;
///  - otherwise both bind and x = l2_radius S_t(g) / ||S_t(g)||_2 with t
///    solving ||S_t(g)||_1 / ||S_t(g)||_2 = c (bisection).
inline LinearSup sup_linear_l1l2(const Vector &g, const GmwSetSpec &spec) {
    spec.validate();
    detail::require(g.size() == spec.dim,
                    "sup_linear_l1l2: g length must equal spec.dim");
    detail::require_finite(g, "sup_linear_l1l2: g must be finite");

    const double lam = spec.l1_radius;
    const double alpha = spec.l2_radius;
    LinearSup out{0.0, Vector::Zero(g.size())};
    const double top = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (top == 0.0)
        return out;

    const Index mult = (g.array().abs() == top).count();
    const double c = lam / alpha;
    if (c <= std::sqrt(static_cast<double>(mult))) {
        const double w = lam / static_cast<double>(mult);
        for (Index i = 0; i < g.size(); ++i)
            if (std::abs(g[i]) == top)
                out.maximizer[i] = std::copysign(w, g[i]);
        out.value = lam * top;
        return out;
    }

    const double g2 = g.norm();
    if (detail::l1_norm(g) <= c * g2) {
        out.maximizer = (alpha / g2) * g;
        out.value = alpha * g2;
        return out;
    }

    // Largest |g_i| strictly below the maximum; at t = b only the top
    // entries survive and the ratio drops to sqrt(mult) < c.
    double b = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
        const double a = std::abs(g[i]);
        if (a < top)
            b = std::max(b, a);
    }
    auto ratio = [&](double t) {
        const Vector st = soft_threshold(g, t);
        return detail::l1_norm(st) / st.norm();
    };
    if (!(ratio(0.0) > c && ratio(b) <= c))
        throw SolverFailure("sup_linear_l1l2: bisection bracket does not "
                            "straddle the target ratio");
    double lo = 0.0;
    double hi = b;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (ratio(mid) > c)
            lo = mid;
        else
            hi = mid;
    }
    const Vector st = soft_threshold(g, hi);
    out.maximizer = (alpha / st.norm()) * st;
    out.value = out.maximizer.dot(g);
    return out;
}

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0; ///< sample std / sqrt(n)
};

/// Monte-Carlo Gaussian mean width E sup_{x in K} <x, g>.
inline MeanEstimate gmw_estimate(const GmwSetSpec &spec, std::int64_t samples,
                                 std::uint64_t seed) {
    spec.validate();
    detail::require(samples >= 2, "gmw_estimate: need at least 2 samples");
    std::vector<double> vals(static_cast<std::size_t>(samples));
    for (std::int64_t j = 0; j < samples; ++j) {
        const Vector g = standard_normal(spec.dim, seed, stream_tag_gmw,
                                         static_cast<std::uint64_t>(j));
        vals[static_cast<std::size_t>(j)] = sup_linear_l1l2(g, spec).value;
    }
    detail::CompensatedSum acc;
    for (double v : vals)
        acc.add(v);
    const double n = static_cast<double>(samples);
    const double mean = acc.value() / n;
    double ss = 0.0;
    for (double v : vals)
        ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

/// Upper bound on w(T cap gamma B_2^m) for T the hull of 2N points in B_2^m:
/// min{ 4 sqrt(max{1, log(8 e N gamma^2)}), gamma sqrt(min{m, 2N}) }.
inline double bellec_upper(std::int64_t bigN, double gamma, std::int64_t m) {
    detail::require(bigN >= 2, "bellec_upper: N must be >= 2");
    detail::require(gamma > 0.0 && gamma <= 1.0,
                    "bellec_upper: gamma must lie in (0, 1]");
    detail::require(m >= 1, "bellec_upper: m must be >= 1");
    const double n = static_cast<double>(bigN);
    const double log_term =
        std::log(8.0 * std::numbers::e * n * gamma * gamma);
    const double a = 4.0 * std::sqrt(std::max(1.0, log_term));
    const double b =
        gamma * std::sqrt(static_cast<double>(std::min<std::int64_t>(m, 2 * bigN)));
    return std::min(a, b);
}

/// Lower bound (sqrt 2 / 4) kappa sqrt(log(N gamma^2 / 5)). Rejects
/// N gamma^2 < 5, where the logarithm is negative.
inline double bellec_lower(std::int64_t bigN, double gamma, double kappa) {
    detail::require(bigN >= 2, "bellec_lower: N must be >= 2");
    detail::require(gamma > 0.0 && gamma <= 1.0,
                    "bellec_lower: gamma must lie in (0, 1]");
    detail::require(kappa > 0.0 && kappa <= 1.0,
                    "bellec_lower: kappa must lie in (0, 1]");
    const double arg = static_cast<double>(bigN) * gamma * gamma / 5.0;
    detail::require(arg >= 1.0,
                    "bellec_lower: N gamma^2 / 5 must be >= 1 for the bound");
    return std::numbers::sqrt2 / 4.0 * kappa * std::sqrt(std::log(arg));
}

enum class EventKind {
    /// c_low sqrt(2N) <= ||z||_2^2 - N <= c_high sqrt(2N)
    ZPlusMinus,
    /// ||z||_2^2 <= N - 2 sqrt(N)  and  ||z||_inf <= sqrt(3 log N)
    AN,
};

struct EventSpec {
    EventKind kind = EventKind::ZPlusMinus;
    double c_low = 0.0;
    double c_high = 0.0;
    Index dim = 2;

    void validate() const {
        detail::require(dim >= 2, "EventSpec: dim must be >= 2");
        if (kind == EventKind::ZPlusMinus)
            detail::require(std::isfinite(c_low) && std::isfinite(c_high) &&
                                c_low < c_high,
                            "EventSpec: need finite c_low < c_high");
    }

    bool contains(const Vector &z) const {
        const double n = static_cast<double>(dim);
        const double sq = z.squaredNorm();
        if (kind == EventKind::ZPlusMinus) {
            const double dev = sq - n;
            const double scale = std::sqrt(2.0 * n);
            return c_low * scale <= dev && dev <= c_high * scale;
        }
        return sq <= n - 2.0 * std::sqrt(n) &&
               z.cwiseAbs().maxCoeff() <= std::sqrt(3.0 * std::log(n));
    }
};

struct EventDraw {
    Vector z;
    std::int64_t attempts = 0;
};

inline constexpr std::int64_t default_max_rejections = 10'000'000;

/// Rejection-samples a standard normal vector conditioned on the event.
/// Gives up with SamplingFailure after max_rejections consecutive misses
/// (an acceptance rate below 1e-6 at the default budget).
inline EventDraw sample_event_counted(
    const EventSpec &spec, std::uint64_t seed,
    std::int64_t max_rejections = default_max_rejections) {
    spec.validate();
    NormalStream stream(seed, stream_tag_event, 0);
    Vector z(spec.dim);
    for (std::int64_t attempt = 1; attempt <= max_rejections; ++attempt) {
        for (Index i = 0; i < spec.dim; ++i)
            z[i] = stream();
        if (spec.contains(z))
            return {z, attempt};
    }
    throw SamplingFailure("sample_event: no accepted draw after " +
                          std::to_string(max_rejections) + " attempts");
}

inline Vector sample_event(const EventSpec &spec, std::uint64_t seed,
                           std::int64_t max_rejections = default_max_rejections) {
    return sample_event_counted(spec, seed, max_rejections).z;
}

/// Constants (a1, C1, C2, L) of the BP instability argument.
struct TheoremConstants {
    double a1 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double bigL = 1.0;

    void validate() const {
        detail::require(a1 > 0.0 && c1 > 0.0 && c2 > 0.0,
                        "TheoremConstants: a1, C1, C2 must be > 0");
        detail::require(bigL >= 1.0 && std::isfinite(bigL),
                        "TheoremConstants: L must be finite and >= 1");
    }
};

struct N0Estimate {
    double n0_2a = 0.0; ///< exp(1 / (2 D5))
    double d1 = 0.0;    ///< a1^2 / (5 L^2)
    double d2 = 0.0;    ///< 2 ((C1 + a1^2) / L^2)^2
    double d5 = 0.0;    ///< C2^2 / (32 L^2)
    double n0_1a = 0.0; ///< D1^(2 / (2 D2 - 1)); may overflow to inf
    bool d1_ok = false; ///< D1 < 1
    bool d2_ok = false; ///< D2 < 1/2
};

inline N0Estimate n0_estimate(const TheoremConstants &tc) {
    tc.validate();
    const double l2 = tc.bigL * tc.bigL;
    N0Estimate out;
    out.d1 = tc.a1 * tc.a1 / (5.0 * l2);
    const double r = (tc.c1 + tc.a1 * tc.a1) / l2;
    out.d2 = 2.0 * r * r;
    out.d5 = tc.c2 * tc.c2 / (32.0 * l2);
    out.n0_2a = std::exp(1.0 / (2.0 * out.d5));
    out.n0_1a = std::pow(out.d1, 2.0 / (2.0 * out.d2 - 1.0));
    out.d1_ok = out.d1 < 1.0;
    out.d2_ok = out.d2 < 0.5;
    return out;
}

} // namespace pdrisk
