#include <pdrisk/analytic_risk.hpp>
#include <pdrisk/geometry.hpp>

#include "oracles/oracles.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace pdrisk;
using Catch::Approx;
using testing_support::Rng;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("sup_linear_l1l2 examples") {
    const auto a = sup_linear_l1l2(vec({3, 1}), {1.0, 10.0, 2});
    CHECK(a.value == Approx(3.0));
    CHECK((a.maximizer - vec({1, 0})).norm() < 1e-15);

    CHECK(sup_linear_l1l2(vec({3, 4}), {100.0, 1.0, 2}).value == Approx(5.0));
    CHECK(sup_linear_l1l2(vec({3, 1}), {2.0, std::sqrt(2.0), 2}).value ==
          Approx(std::sqrt(20.0)).epsilon(1e-12));

    const auto z = sup_linear_l1l2(Vector::Zero(4), {1.0, 1.0, 4});
    CHECK(z.value == 0.0);
    CHECK(z.maximizer.isZero());

    CHECK_THROWS_AS(sup_linear_l1l2(vec({1, 2}), {1.0, 1.0, 3}), InvalidParameter);
    CHECK_THROWS_AS(sup_linear_l1l2(vec({1, 2}), {0.0, 1.0, 2}), InvalidParameter);
}

TEST_CASE("sup_linear_l1l2 agrees with the dual formula and stays feasible") {
    Rng rng(31);
    for (int trial = 0; trial < 3000; ++trial) {
        const Index n = rng.integer(1, 30);
        const Vector g = rng.normal_vector(n);
        const double lam = std::exp(rng.uniform(-2.0, 3.0));
        const double alpha = std::exp(rng.uniform(-2.0, 3.0));
        const auto out = sup_linear_l1l2(g, {lam, alpha, n});
        const double ref = oracle::sup_dual(g, lam, alpha);
        REQUIRE(std::abs(out.value - ref) <= 1e-8 * std::max(1.0, ref));
        REQUIRE(out.maximizer.cwiseAbs().sum() <= lam * (1.0 + 1e-10));
        REQUIRE(out.maximizer.norm() <= alpha * (1.0 + 1e-10));
        REQUIRE(std::abs(out.maximizer.dot(g) - out.value) <= 1e-10 * std::max(1.0, out.value));
    }
}

TEST_CASE("sup_linear_l1l2 agrees with a direction grid in two dimensions") {
    Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector g = rng.normal_vector(2);
        const double lam = std::exp(rng.uniform(-1.0, 1.5));
        const double alpha = std::exp(rng.uniform(-1.0, 1.5));
        const double v = sup_linear_l1l2(g, {lam, alpha, 2}).value;
        const double ref = oracle::sup_grid_2d(g, lam, alpha, 20000);
        REQUIRE(std::abs(v - ref) <= 1e-4 * std::max(1e-3, ref));
    }
}

TEST_CASE("gmw_estimate examples") {
    const auto one = gmw_estimate({1.0, 1.0, 1}, 20000, 5);
    CHECK(std::abs(one.mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * one.std_error);

    const auto inf = gmw_estimate({1.0, 1e6, 1000}, 2000, 6);
    CHECK(inf.mean == Approx(std::sqrt(2.0 * std::log(1000.0))).epsilon(0.15));

    const auto l2 = gmw_estimate({1e6, 1.0, 400}, 2000, 7);
    CHECK(l2.mean == Approx(20.0).epsilon(0.02));

    CHECK_THROWS_AS(gmw_estimate({1.0, 1.0, 3}, 1, 0), InvalidParameter);
    const auto again = gmw_estimate({1.0, 1.0, 1}, 20000, 5);
    CHECK(again.mean == one.mean);
}

TEST_CASE("gmw is nondecreasing in both radii") {
    const Index n = 50;
    double prev = 0.0;
    double prev_se = 0.0;
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        const auto e = gmw_estimate({lam, 1.0, n}, 1000, 8);
        REQUIRE(e.mean + 3.0 * e.std_error >= prev - 3.0 * prev_se);
        prev = e.mean;
        prev_se = e.std_error;
    }
    prev = prev_se = 0.0;
    for (double alpha : {0.1, 0.3, 1.0, 3.0}) {
        const auto e = gmw_estimate({2.0, alpha, n}, 1000, 8);
        REQUIRE(e.mean + 3.0 * e.std_error >= prev - 3.0 * prev_se);
        prev = e.mean;
        prev_se = e.std_error;
    }
}

TEST_CASE("Bellec bounds") {
    CHECK(bellec_upper(10, 1.0, 10) == Approx(std::sqrt(10.0)).epsilon(1e-15));
    CHECK(bellec_upper(1000, 0.1, 1000) ==
          Approx(std::min(4.0 * std::sqrt(std::log(8.0 * std::numbers::e * 10.0)),
                          0.1 * std::sqrt(1000.0))));
    CHECK(bellec_lower(5, 1.0, 1.0) == 0.0);
    CHECK(bellec_lower(500, 0.1, 1.0) == Approx(0.0).margin(1e-15));
    CHECK(bellec_lower(500, 1.0 / std::sqrt(10.0), 1.0) ==
          Approx(std::sqrt(2.0) / 4.0 * std::sqrt(std::log(10.0))).epsilon(1e-12));
    CHECK(bellec_lower(500, 1.0 / std::sqrt(10.0), 1.0) == Approx(0.5366).epsilon(1e-3));
    CHECK_THROWS_AS(bellec_lower(200, 0.1, 1.0), InvalidParameter);
    CHECK_THROWS_AS(bellec_upper(10, 1.5, 10), InvalidParameter);
    CHECK_THROWS_AS(bellec_lower(10, 1.0, 0.0), InvalidParameter);
}

TEST_CASE("capped l1 width lies between the Bellec bounds") {
    for (Index n : {200, 1000}) {
        for (double gamma : {0.1, 0.3}) {
            const auto e = gmw_estimate({1.0, gamma, n}, 2000, 9);
            const double arg = static_cast<double>(n) * gamma * gamma / 5.0;
            const double lower = arg >= 1.0 ? bellec_lower(n, gamma, 1.0) : 0.0;
            REQUIRE(e.mean >= lower - 3.0 * e.std_error);
            REQUIRE(e.mean <= bellec_upper(n, gamma, n) + 3.0 * e.std_error);
        }
    }
}

TEST_CASE("event samplers") {
    const EventSpec wide{EventKind::ZPlusMinus, -10.0, 10.0, 100};
    const auto d = sample_event_counted(wide, 1);
    CHECK(d.attempts == 1);
    CHECK(wide.contains(d.z));

    const Index n = 10000;
    const EventSpec an{EventKind::AN, 0.0, 0.0, n};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Vector z = sample_event(an, seed);
        const double nd = static_cast<double>(n);
        REQUIRE(z.squaredNorm() <= nd - 2.0 * std::sqrt(nd));
        REQUIRE(z.cwiseAbs().maxCoeff() <= std::sqrt(3.0 * std::log(nd)));
    }
    CHECK(sample_event(an, 3) == sample_event(an, 3));

    const EventSpec impossible{EventKind::ZPlusMinus, 50.0, 60.0, 4};
    CHECK_THROWS_AS(sample_event(impossible, 0, 1000), SamplingFailure);
    CHECK_THROWS_AS(sample_event({EventKind::ZPlusMinus, 1.0, 0.5, 10}, 0), InvalidParameter);
    CHECK_THROWS_AS(sample_event({EventKind::AN, 0.0, 0.0, 1}, 0), InvalidParameter);
}

TEST_CASE("Z+- acceptance rate follows the normal approximation") {
    // ||z||^2 - N over sqrt(2N) is approximately standard normal, so the
    // event {0.5 <= . <= 5} has probability Phi(5) - Phi(0.5).
    const Index n = 10000;
    const EventSpec spec{EventKind::ZPlusMinus, 0.5, 5.0, n};
    const int trials = 100000;
    NormalStream stream(77, 0, 0);
    Vector z(n);
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        for (Index i = 0; i < n; ++i)
            z[i] = stream();
        hits += spec.contains(z);
    }
    const double p = phi_cdf_neg(0.5) - phi_cdf_neg(5.0);
    CHECK(p == Approx(0.3085).epsilon(1e-3));
    const double rate = static_cast<double>(hits) / trials;
    const double se = std::sqrt(p * (1.0 - p) / trials);
    // The chi-square skew shifts the rate by about 0.003 at N = 1e4.
    CHECK(std::abs(rate - p) <= 3.0 * se + 0.004);
}

TEST_CASE("n0 arithmetic") {
    const auto a = n0_estimate({1.45, 5.0, 4.0, 3.78});
    CHECK(a.n0_2a == Approx(1.60e6).epsilon(0.01));
    CHECK(a.d5 == Approx(16.0 / (32.0 * 3.78 * 3.78)));
    CHECK(a.d1 == Approx(1.45 * 1.45 / (5.0 * 3.78 * 3.78)));
    CHECK(a.d2 == Approx(0.494).epsilon(0.01));
    CHECK(a.d2_ok);
    CHECK(a.d1_ok);
    const auto b = n0_estimate({1.58, 4.04, 4.0, 3.62});
    CHECK(b.n0_2a == Approx(4.92e5).epsilon(0.01));
    double prev = 0.0;
    for (double l : {1.0, 2.0, 4.0, 8.0}) {
        const double v = n0_estimate({1.0, 1.0, 4.0, l}).n0_2a;
        REQUIRE(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(n0_estimate({1.0, 1.0, 1.0, 0.5}), InvalidParameter);
}
