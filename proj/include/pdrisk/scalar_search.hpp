#pragma once

#include <cmath>
#include <utility>

namespace pdrisk::detail {

struct ScalarMin {
    double x;
    double fx;
};

/// Golden-section search for a minimizer of a unimodal f on [a, b].
/// Stops once the bracket is narrower than abs_tol + rel_tol * |x|.
template <class F>
ScalarMin golden_section(F &&f, double a, double b, double abs_tol,
                         double rel_tol = 0.0, int max_iter = 500) {
    constexpr double inv_phi = 0.6180339887498948482;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (a + b);
        if (b - a <= abs_tol + rel_tol * std::abs(mid))
            break;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

/// Bisection for the sign change of g on [lo, hi]; g(lo) < 0 <= g(hi).
template <class G>
double bisect_sign(G &&g, double lo, double hi, double abs_tol,
                   int max_iter = 300) {
    for (int it = 0; it < max_iter && hi - lo > abs_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (g(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace pdrisk::detail
