#pragma once

#include "cct/cct.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace cct::test {

inline Rational Q(long num, long den = 1) { return Rational(num) / Rational(den); }

inline CouponDistribution<Rational> qdist(std::initializer_list<Rational> e) {
    return CouponDistribution<Rational>::validate(std::vector<Rational>(e));
}

inline CouponDistribution<Rational> qdist(const std::string& text) { return parse_distribution<Rational>(text); }

inline CouponDistribution<double> fdist(std::initializer_list<double> e) {
    return CouponDistribution<double>::validate(std::vector<double>(e));
}

/// Random rational law with denominators built from small integer weights;
/// the null coupon gets a weight only when with_null is set.
inline CouponDistribution<Rational> random_rational(SplitMix64& rng, std::size_t n, bool with_null) {
    std::vector<long> w(n + 1, 0);
    long total = 0;
    for (std::size_t s = 0; s <= n; ++s) {
        if (s == 0 && !with_null && n > 1) continue;
        w[s] = 1 + static_cast<long>(rng() % 9);
        total += w[s];
    }
    std::vector<Rational> e;
    for (std::size_t s = 1; s <= n; ++s) e.push_back(Q(w[s], total));
    return CouponDistribution<Rational>::validate(std::move(e));
}

}  // namespace cct::test

namespace cct::test {

/// Test-local oracle: Pr{fewer than c distinct non-null symbols in k draws},
/// by counting through every base-(n+1) draw sequence.
template <class T>
T brute_survival(const CouponDistribution<T>& p, std::size_t c, std::size_t k) {
    const std::size_t n = p.size();
    std::vector<T> w{p.null_mass()};
    for (std::size_t i = 0; i < n; ++i) w.push_back(p[i]);
    std::vector<std::size_t> digits(k, 0);
    T total(0);
    while (true) {
        std::vector<bool> seen(n + 1, false);
        std::size_t distinct = 0;
        T weight(1);
        for (auto d : digits) {
            weight *= w[d];
            if (d != 0 && !seen[d]) {
                seen[d] = true;
                ++distinct;
            }
        }
        if (distinct < c) total += weight;
        std::size_t pos = 0;
        while (pos < k && ++digits[pos] == n + 1) digits[pos++] = 0;
        if (pos == k) break;
    }
    return total;
}

}  // namespace cct::test
