#pragma once

// Closed-form low-noise risk of soft thresholding and the quantities derived
// from it. Risks are noise-normalized expected squared errors (nnse).
//
//   R(lambda; s, N) = s (1 + lambda^2) + 2 (N - s) G(lambda)
//   G(lambda)       = (1 + lambda^2) Phi(-lambda) - lambda phi(lambda)
//
// where phi / Phi are the standard normal pdf / cdf. Note 2 G(l) equals
// E[(|Z| - l)_+^2].

#include <pdrisk/scalar_search.hpp>
#include <pdrisk/types.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pdrisk {

inline double phi_pdf(double l) {
    return std::exp(-0.5 * l * l) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi(-l), evaluated through erfc so the upper tail keeps full relative
/// precision.
inline double phi_cdf_neg(double l) {
    return 0.5 * std::erfc(l / std::numbers::sqrt2);
}

namespace detail {

// Above this point both G and H switch to their asymptotic series. The
// direct formulas lose roughly log10(l^4) digits to cancellation; below 9
// that is at most ~1e-11 relative, and the truncated series is already
// below 1e-13 relative at 9.
inline constexpr double asymptotic_switch = 9.0;

/// sum_{j>=1} (-1)^(j+1) (2j-1)!! w(j) l^-(2j), truncated before the terms
/// start growing.
template <class Weight>
double alternating_mills_series(double l, Weight weight) {
    const double inv_l2 = 1.0 / (l * l);
    double power = inv_l2;
    double dfact = 1.0; // (2j-1)!!
    double sum = 0.0;
    double prev = INFINITY;
    for (int j = 1; j < 200; ++j) {
        const double mag = dfact * weight(j) * power;
        if (mag >= prev)
            break;
        sum += (j % 2 == 1) ? mag : -mag;
        prev = mag;
        if (mag <= 1e-18 * std::abs(sum))
            break;
        power *= inv_l2;
        dfact *= 2.0 * j + 1.0;
    }
    return sum;
}

} // namespace detail

/// G(l) = (1 + l^2) Phi(-l) - l phi(l) for l >= 0.
inline double g_lambda(double l) {
    detail::require(std::isfinite(l) && l >= 0.0,
                    "g_lambda: argument must be finite and >= 0");
    if (l < detail::asymptotic_switch) {
        const double direct = (1.0 + l * l) * phi_cdf_neg(l) - l * phi_pdf(l);
        return direct > 0.0 ? direct : 0.0;
    }
    // G(l) = phi(l)/l * sum_{j>=1} (-1)^(j+1) (2j-1)!! 2j l^-(2j)
    return phi_pdf(l) / l *
           detail::alternating_mills_series(l, [](int j) { return 2.0 * j; });
}

/// H(l) = phi(l) - l Phi(-l) = E[(Z - l)_+]; G'(l) = -2 H(l).
inline double h_lambda(double l) {
    detail::require(std::isfinite(l), "h_lambda: argument must be finite");
    if (l < detail::asymptotic_switch)
        return phi_pdf(l) - l * phi_cdf_neg(l);
    // H(l) = phi(l) * sum_{j>=1} (-1)^(j+1) (2j-1)!! l^-(2j)
    return phi_pdf(l) *
           detail::alternating_mills_series(l, [](int) { return 1.0; });
}

/// G'(l) = 2 l Phi(-l) - 2 phi(l)
inline double g_lambda_derivative(double l) { return -2.0 * h_lambda(l); }

/// (lambda, s, N) for the closed-form risk. lambda is in noise units.
struct AnalyticRiskParams {
    double lambda = 0.0;
    std::int64_t s = 0;
    std::int64_t bigN = 1;

    void validate() const {
        detail::require(std::isfinite(lambda) && lambda >= 0.0,
                        "AnalyticRiskParams: lambda must be finite and >= 0");
        detail::require(bigN >= 1, "AnalyticRiskParams: N must be >= 1");
        detail::require(s >= 0 && s <= bigN,
                        "AnalyticRiskParams: need 0 <= s <= N");
    }
};

inline double qp_risk(const AnalyticRiskParams &p) {
    p.validate();
    const double s = static_cast<double>(p.s);
    const double off = static_cast<double>(p.bigN - p.s);
    return s * (1.0 + p.lambda * p.lambda) + 2.0 * off * g_lambda(p.lambda);
}

inline double qp_risk(double lambda, std::int64_t s, std::int64_t bigN) {
    return qp_risk(AnalyticRiskParams{lambda, s, bigN});
}

/// dR/dlambda at lambda.
inline double qp_risk_lambda_derivative(double lambda, std::int64_t s,
                                        std::int64_t bigN) {
    AnalyticRiskParams{lambda, s, bigN}.validate();
    return 2.0 * static_cast<double>(s) * lambda +
           2.0 * static_cast<double>(bigN - s) * g_lambda_derivative(lambda);
}

/// sqrt(2 log N), the universal-threshold estimate of the optimal lambda.
inline double lambda_bar(std::int64_t bigN) {
    detail::require(bigN >= 2, "lambda_bar: N must be >= 2");
    return std::sqrt(2.0 * std::log(static_cast<double>(bigN)));
}

/// d/du R(u * lambda_bar(N); s, N).
inline double qp_risk_derivative(double u, std::int64_t s, std::int64_t bigN) {
    detail::require(std::isfinite(u) && u > 0.0,
                    "qp_risk_derivative: u must be finite and > 0");
    const double lb = lambda_bar(bigN);
    return lb * qp_risk_lambda_derivative(u * lb, s, bigN);
}

/// Minimizer of lambda -> R(lambda; s, N) on [0, lambda_bar + 2].
///
/// Golden-section narrows the bracket; function values stop resolving the
/// minimizer near 1e-7, so the last digits come from bisecting the sign of
/// the analytic derivative.
inline double lambda_star(std::int64_t s, std::int64_t bigN) {
    detail::require(bigN >= 1 && s >= 0 && s <= bigN,
                    "lambda_star: need 0 <= s <= N");
    if (s == 0)
        throw DegenerateInput("lambda_star: s = 0 has no finite minimizer");
    if (s == bigN)
        return 0.0;
    const double hi = lambda_bar(std::max<std::int64_t>(bigN, 2)) + 2.0;
    auto risk = [&](double l) { return qp_risk(l, s, bigN); };
    const auto coarse = detail::golden_section(risk, 0.0, hi, 1e-5);
    auto slope = [&](double l) { return qp_risk_lambda_derivative(l, s, bigN); };
    double lo = std::max(0.0, coarse.x - 1e-4);
    double up = std::min(hi, coarse.x + 1e-4);
    if (slope(lo) >= 0.0)
        lo = 0.0;
    if (slope(up) < 0.0)
        up = hi;
    if (slope(lo) >= 0.0)
        return 0.0;
    return detail::bisect_sign(slope, lo, up, 1e-13);
}

/// Optimally tuned QP risk min_lambda R(lambda; s, N), the statistical
/// dimension benchmark for the l1 descent cone.
inline double stat_dim_l1(std::int64_t s, std::int64_t bigN) {
    return qp_risk(lambda_star(s, bigN), s, bigN);
}

/// Mean squared error (1/N) sum (x*_i - x_i)^2.
inline double mse(const Vector &xstar, const Vector &x0) {
    detail::require(xstar.size() == x0.size() && x0.size() > 0,
                    "mse: vectors must be nonempty and of equal length");
    return (xstar - x0).squaredNorm() / static_cast<double>(x0.size());
}

/// Peak signal-to-noise ratio 10 log10(max_i x0_i^2 / mse), in dB.
inline double psnr(const Vector &xstar, const Vector &x0) {
    const double err = mse(xstar, x0);
    if (err == 0.0)
        throw UndefinedMetric("psnr: undefined for zero mse");
    const double peak = x0.cwiseAbs2().maxCoeff();
    return 10.0 * std::log10(peak / err);
}

} // namespace pdrisk
