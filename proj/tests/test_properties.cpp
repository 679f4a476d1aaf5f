// Randomized invariants over many generated instances.
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace cct;
using cct::test::Q;

namespace {

double binomial_cdf_below(std::size_t trials, double success, std::size_t c) {
    double total = 0;
    for (std::size_t s = 0; s < c && s <= trials; ++s)
        total += binomial_d(trials, s) * std::pow(success, double(s)) * std::pow(1 - success, double(trials - s));
    return total;
}

CouponDistribution<double> permuted(const CouponDistribution<double>& p, SplitMix64& rng) {
    std::vector<double> e(p.entries().begin(), p.entries().end());
    std::shuffle(e.begin(), e.end(), rng);
    return CouponDistribution<double>::validate(std::move(e));
}

}  // namespace

TEST_CASE("majorization is a preorder compatible with mixing") {
    SplitMix64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng() % 5;
        const double p0 = (t % 2) ? 0.4 * rng.uniform() : 0.0;
        const auto p = random_distribution(rng, n, 1 - p0);
        CHECK(majorizes(p, p));
        CHECK(majorizes(p, permuted(p, rng)));
        CHECK(majorizes(p, almost_uniform(n, p.null_mass())));
        const std::size_t i = 1 + rng() % n;
        const std::size_t j = 1 + (i + rng() % (n - 1)) % n;
        const auto q = lambda_transform(p, i, j, rng.uniform());
        CHECK(majorizes(p, q));
        const auto r = lambda_transform(q, i, j, rng.uniform());
        if (majorizes(q, r)) CHECK(majorizes(p, r));
    }
}

TEST_CASE("survival is symmetric, monotone in k and in c") {
    SplitMix64 rng(22);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 2 + rng() % 5;
        const double p0 = (t % 2) ? 0.5 * rng.uniform() : 0.0;
        const auto p = random_distribution(rng, n, 1 - p0);
        const auto perm = permuted(p, rng);
        std::vector<double> prev;
        for (std::size_t c = 1; c <= n; ++c) {
            const auto a = survival_curve_to(p, c, 30).values;
            const auto b = survival_curve_to(perm, c, 30).values;
            for (std::size_t k = 0; k <= 30; ++k) {
                CHECK(a[k] == Catch::Approx(b[k]).margin(1e-12));
                CHECK(a[k] >= 0.0);
                CHECK(a[k] <= 1.0);
                if (k > 0) CHECK(a[k] <= a[k - 1] + 1e-12);
                if (!prev.empty()) CHECK(prev[k] <= a[k] + 1e-12);
            }
            prev = a;
        }
    }
}

TEST_CASE("tail bounds hold along the curve") {
    SplitMix64 rng(23);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 2 + rng() % 4;
        const double p0 = (t % 2) ? 0.5 * rng.uniform() : 0.0;
        const auto p = random_distribution(rng, n, 1 - p0);
        const std::size_t c = 1 + rng() % n;
        const auto curve = survival_curve_to(p, c, 80);
        const double r = curve.tail_rate;
        CHECK(r == Catch::Approx(collection_tail_rate(p, c)));
        for (std::size_t k = 0; k <= 80; ++k) CHECK(curve.values[k] <= binomial_cdf_below(k, 1 - r, c) + 1e-12);
        const std::size_t K = 10;
        for (std::size_t m = 1; m <= 70; ++m)
            CHECK(curve.values[K + m] <= curve.values[K] * binomial_cdf_below(m, 1 - r, c) + 1e-12);
    }
}

TEST_CASE("survival at k = 0 is exactly one in rational mode") {
    SplitMix64 rng(24);
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto p = test::random_rational(rng, n, n % 2 == 0);
        for (std::size_t c = 1; c <= n; ++c) CHECK(survival_inclusion_exclusion(p, c, 0) == 1);
    }
}

TEST_CASE("transform traces stay in their families") {
    SplitMix64 rng(25);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng() % 5;
        const double p0 = (t % 2) ? 0.5 * rng.uniform() : 0.0;
        const double theta = (1 - p0) / double(n) * (0.05 + 0.9 * rng.uniform());
        const auto p = random_distribution(rng, n, 1 - p0, theta);
        const std::size_t j = 1 + rng() % n;
        const auto fam = ThetaFamily<double>::make(n, p.null_mass(), theta);
        const auto up = maximize_trace(p, theta, j);
        CHECK(up.steps.size() <= n - 1);
        const CouponDistribution<double>* prev = &up.start;
        for (const auto& s : up.steps) {
            CHECK(fam.contains(s.result));
            CHECK(majorizes(s.result, *prev));
            prev = &s.result;
        }
        CHECK(approx_equal(up.final_vector(), extremal_member(fam, j), 1e-12));

        const auto down = uniformize_trace(p);
        CHECK(down.steps.size() <= n - 1);
        prev = &down.start;
        for (const auto& s : down.steps) {
            CHECK(majorizes(*prev, s.result));
            CHECK(s.lambda >= 0.0);
            CHECK(s.lambda <= 1.0);
            prev = &s.result;
        }
    }
}

TEST_CASE("rational maximize traces are exact") {
    SplitMix64 rng(26);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng() % 4;
        const auto p = test::random_rational(rng, n, true);
        Rational theta = p[0];
        for (std::size_t i = 1; i < n; ++i) theta = std::min(theta, p[i]);
        theta /= 2;
        const auto fam = ThetaFamily<Rational>::make(n, p.null_mass(), theta);
        const auto trace = maximize_trace(p, theta, 1);
        CHECK(trace.final_vector() == extremal_member(fam, 1));
        for (const auto& s : trace.steps) CHECK(s.result.null_mass() == p.null_mass());
    }
}
