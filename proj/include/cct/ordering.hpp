// ordering.hpp
//
// Strong stochastic order between collection times, decided on truncated
// survival curves, and the checks that mixing transforms, the almost-uniform
// vector and the extremal theta members order the collection time as
// claimed.
#pragma once

#include "cct/exact.hpp"
#include "cct/oracle.hpp"
#include "cct/probmodel.hpp"
#include "cct/scalar.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace cct {

enum class Relation { left_st_smaller, right_st_smaller, equal, crossing, undecided };

inline std::string_view to_string(Relation r) {
    switch (r) {
    case Relation::left_st_smaller: return "left_st_smaller";
    case Relation::right_st_smaller: return "right_st_smaller";
    case Relation::equal: return "equal";
    case Relation::crossing: return "crossing";
    case Relation::undecided: return "undecided";
    }
    return "undecided";
}

inline Relation relation_from_string(std::string_view s) {
    for (auto r : {Relation::left_st_smaller, Relation::right_st_smaller, Relation::equal, Relation::crossing,
                   Relation::undecided})
        if (to_string(r) == s) return r;
    throw Error(ErrorCode::ParseError, "unknown relation '" + std::string(s) + "'");
}

struct DominanceVerdict {
    Relation relation = Relation::undecided;
    std::optional<std::size_t> witness_k;
    std::size_t checked_up_to = 0;
    double residual_bound = 0;

    /// The claim "left is stochastically no larger than right" holds.
    bool left_dominated() const {
        return relation == Relation::left_st_smaller || relation == Relation::equal;
    }

    friend bool operator==(const DominanceVerdict&, const DominanceVerdict&) = default;
};

/// Default pointwise tolerance per mode.
template <Scalar T>
double default_compare_tol() {
    return is_exact_v<T> ? 0.0 : 1e-9;
}

/// Compares Pr{A > k} with Pr{B > k} for k up to the shorter truncation.
/// Both tail bounds must lie below tail_tol (defaults to tol); beyond the
/// checked range the verdict holds up to residual_bound. A crossing reports
/// the smallest k by which both orders have been violated.
template <Scalar T>
DominanceVerdict stochastic_compare(const SurvivalCurve<T>& a, const SurvivalCurve<T>& b, double tol,
                                    std::optional<double> tail_tol = std::nullopt) {
    const double tail_limit = tail_tol.value_or(tol);
    const double ra = to_double(a.tail_bound_at_K);
    const double rb = to_double(b.tail_bound_at_K);
    if (!(ra < tail_limit) || !(rb < tail_limit))
        throw Error(ErrorCode::InsufficientTruncation,
                    "tail bounds " + std::to_string(ra) + ", " + std::to_string(rb) + " not below " +
                        std::to_string(tail_limit));

    const std::size_t K = std::min(a.values.size(), b.values.size()) - 1;
    const T slack = from_double<T>(tol);
    std::optional<std::size_t> first_above;  // a > b + tol
    std::optional<std::size_t> first_below;  // b > a + tol
    for (std::size_t k = 0; k <= K; ++k) {
        if (!first_above && a.values[k] > b.values[k] + slack) first_above = k;
        if (!first_below && b.values[k] > a.values[k] + slack) first_below = k;
    }

    DominanceVerdict v;
    v.checked_up_to = K;
    v.residual_bound = std::max(ra, rb);
    if (!first_above && !first_below) v.relation = Relation::equal;
    else if (!first_above) v.relation = Relation::left_st_smaller;
    else if (!first_below) v.relation = Relation::right_st_smaller;
    else {
        v.relation = Relation::crossing;
        v.witness_k = std::max(*first_above, *first_below);
    }
    return v;
}

/// Curves for p and q, both truncated at the larger of their own
/// tail_tol-truncation points.
template <Scalar T>
std::pair<SurvivalCurve<T>, SurvivalCurve<T>> paired_curves(const CouponDistribution<T>& p,
                                                            const CouponDistribution<T>& q, std::size_t c,
                                                            double tail_tol) {
    const std::size_t Kp = survival_curve(p, c, tail_tol).truncation_k;
    const std::size_t Kq = survival_curve(q, c, tail_tol).truncation_k;
    const std::size_t K = std::max(Kp, Kq);
    return {survival_curve_to(p, c, K), survival_curve_to(q, c, K)};
}

namespace detail {

template <Scalar T>
double tail_tol_for(double tol) {
    return tol > 0 ? tol : 1e-9;
}

template <Scalar T>
DominanceVerdict compare_laws(const CouponDistribution<T>& left, const CouponDistribution<T>& right, std::size_t c,
                              double tol) {
    const double tail = tail_tol_for<T>(tol);
    auto [a, b] = paired_curves(left, right, c, tail);
    return stochastic_compare(a, b, tol, tail);
}

}  // namespace detail

/// Curve of lambda_transform(p, i, j, lambda) against the curve of p.
template <Scalar T>
DominanceVerdict verify_lambda_transform(const CouponDistribution<T>& p, std::size_t i, std::size_t j,
                                         const T& lambda, std::size_t c, double tol = default_compare_tol<T>()) {
    const auto mixed = lambda_transform(p, i, j, lambda);
    return detail::compare_laws(mixed, p, c, tol);
}

namespace detail {

template <Scalar T>
CouponDistribution<T> normalized_uniform(std::size_t n) {
    if (n < 2) throw Error(ErrorCode::InvalidC, "the uniform law over one coupon is degenerate; need n >= 2");
    return almost_uniform<T>(n, T(0));
}

}  // namespace detail

/// (u vs v, v vs p) where u is uniform over 1..n and v is almost-uniform
/// with p's null mass.
template <Scalar T>
std::pair<DominanceVerdict, DominanceVerdict> verify_sandwich(const CouponDistribution<T>& p, std::size_t c,
                                                              double tol = default_compare_tol<T>()) {
    const auto u = detail::normalized_uniform<T>(p.size());
    const auto v = almost_uniform<T>(p.size(), p.null_mass());
    return {detail::compare_laws(u, v, c, tol), detail::compare_laws(v, p, c, tol)};
}

/// p in A_theta against the canonical extremal member (gamma in position 1).
template <Scalar T>
DominanceVerdict verify_maximal(const CouponDistribution<T>& p, const T& theta, std::size_t c,
                                double tol = default_compare_tol<T>()) {
    const auto family = ThetaFamily<T>::make(p.size(), p.null_mass(), theta);
    if (!family.contains(p)) throw Error(ErrorCode::NotInFamily, "p is not in A_theta");
    return detail::compare_laws(p, extremal_member(family, 1), c, tol);
}

/// (E[T(u)], E[T(v)], E[T(p)]).
template <Scalar T>
std::array<T, 3> expectation_sandwich(const CouponDistribution<T>& p, std::size_t c) {
    const auto u = detail::normalized_uniform<T>(p.size());
    const auto v = almost_uniform<T>(p.size(), p.null_mass());
    return {expectation(u, c), expectation(v, c), expectation(p, c)};
}

// ---------------------------------------------------------------------------
// Randomized falsification suites.

/// Random vector with n entries summing to `mass`, each at least `floor`.
inline CouponDistribution<double> random_distribution(SplitMix64& rng, std::size_t n, double mass,
                                                      double floor = 0.0) {
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) {
        x = 0.05 + rng.uniform();
        total += x;
    }
    const double spread = mass - floor * static_cast<double>(n);
    for (auto& x : w) x = floor + spread * x / total;
    return CouponDistribution<double>::validate(std::move(w));
}

struct SuiteResult {
    std::string name;
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::vector<std::string> counterexamples;

    bool passed() const { return instances > 0 && failures == 0; }
};

namespace detail {

inline std::string describe(const CouponDistribution<double>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + ")";
}

inline void record(SuiteResult& r, bool ok, const std::string& what) {
    ++r.instances;
    if (!ok) {
        ++r.failures;
        if (r.counterexamples.size() < 5) r.counterexamples.push_back(what);
    }
}

inline std::size_t uniform_index(SplitMix64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

}  // namespace detail

/// Mixing two entries never lengthens the collection time.
inline SuiteResult lambda_transform_suite(std::uint64_t seed, std::size_t instances = 200, double tol = 1e-9) {
    SuiteResult r{"lambda_transform", 0, 0, {}};
    auto rng = SplitMix64::stream(seed, 1);
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = detail::uniform_index(rng, 2, 6);
        const double p0 = (t % 2 == 0) ? 0.0 : 0.5 * rng.uniform();
        const auto p = random_distribution(rng, n, 1.0 - p0);
        const std::size_t i = detail::uniform_index(rng, 1, n);
        std::size_t j = detail::uniform_index(rng, 1, n - 1);
        if (j >= i) ++j;
        const double lambda = rng.uniform();
        const std::size_t c = detail::uniform_index(rng, 1, n);
        const auto v = verify_lambda_transform(p, i, j, lambda, c, tol);
        detail::record(r, v.left_dominated(),
                       "p=" + detail::describe(p) + " i=" + std::to_string(i) + " j=" + std::to_string(j) +
                           " lambda=" + std::to_string(lambda) + " c=" + std::to_string(c));
    }
    return r;
}

/// Every step of a uniformizing trace lowers the survival curve, and the
/// endpoint is the almost-uniform vector.
inline SuiteResult uniformize_suite(std::uint64_t seed, std::size_t instances = 50, double tol = 1e-9) {
    SuiteResult r{"uniformize_chain", 0, 0, {}};
    auto rng = SplitMix64::stream(seed, 2);
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = detail::uniform_index(rng, 2, 6);
        const double p0 = (t % 2 == 0) ? 0.0 : 0.5 * rng.uniform();
        const auto p = random_distribution(rng, n, 1.0 - p0);
        const std::size_t c = detail::uniform_index(rng, 1, n);
        const auto trace = uniformize_trace(p);
        bool ok = trace.steps.size() <= n - 1 && approx_equal(trace.final_vector(), almost_uniform(n, p.null_mass()));
        const CouponDistribution<double>* prev = &trace.start;
        for (const auto& step : trace.steps) {
            ok = ok && detail::compare_laws(step.result, *prev, c, tol).left_dominated();
            prev = &step.result;
        }
        detail::record(r, ok, "p=" + detail::describe(p) + " c=" + std::to_string(c));
    }
    return r;
}

/// u <=st v <=st p for random p with positive null mass.
inline SuiteResult sandwich_suite(std::uint64_t seed, std::size_t instances = 100, double tol = 1e-9) {
    SuiteResult r{"sandwich", 0, 0, {}};
    auto rng = SplitMix64::stream(seed, 3);
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = detail::uniform_index(rng, 2, 5);
        const double p0 = 0.5 * (0.001 + 0.998 * rng.uniform());
        const auto p = random_distribution(rng, n, 1.0 - p0);
        const std::size_t c = detail::uniform_index(rng, 1, n);
        const auto [uv, vp] = verify_sandwich(p, c, tol);
        detail::record(r, uv.left_dominated() && vp.left_dominated(),
                       "p=" + detail::describe(p) + " c=" + std::to_string(c));
    }
    return r;
}

/// Every member of A_theta is dominated by the extremal member.
inline SuiteResult maximal_suite(std::uint64_t seed, std::size_t instances = 100, double tol = 1e-9) {
    SuiteResult r{"maximal", 0, 0, {}};
    auto rng = SplitMix64::stream(seed, 4);
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = detail::uniform_index(rng, 2, 6);
        const double p0 = (t % 2 == 0) ? 0.0 : 0.5 * rng.uniform();
        const double mass = 1.0 - p0;
        const double theta = (mass / static_cast<double>(n)) * (0.02 + 0.97 * rng.uniform());
        const auto p = random_distribution(rng, n, mass, theta);
        const std::size_t c = detail::uniform_index(rng, 1, n);
        const auto v = verify_maximal(p, theta, c, tol);
        detail::record(r, v.left_dominated(),
                       "p=" + detail::describe(p) + " theta=" + std::to_string(theta) + " c=" + std::to_string(c));
    }
    return r;
}

/// E[T(u)] <= E[T(v)] <= E[T(p)], and the closed-form expectation matches
/// the summed survival series.
inline SuiteResult expectation_suite(std::uint64_t seed, std::size_t instances = 100, double tol = 1e-9) {
    SuiteResult r{"expectation", 0, 0, {}};
    auto rng = SplitMix64::stream(seed, 5);
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = detail::uniform_index(rng, 2, 6);
        const double p0 = (t % 2 == 0) ? 0.0 : 0.5 * rng.uniform();
        const auto p = random_distribution(rng, n, 1.0 - p0);
        const std::size_t c = detail::uniform_index(rng, 1, n);
        const auto e = expectation_sandwich(p, c);
        const auto curve = survival_curve(p, c, 1e-13);
        Accumulator<double> series;
        for (double x : curve.values) series += x;
        const bool ok = e[0] <= e[1] + tol && e[1] <= e[2] + tol &&
                        std::abs(series.value() - e[2]) <= tol + curve.tail_bound_at_K;
        detail::record(r, ok, "p=" + detail::describe(p) + " c=" + std::to_string(c));
    }
    return r;
}

inline std::vector<SuiteResult> run_dominance_suites(std::uint64_t seed) {
    return {lambda_transform_suite(seed), uniformize_suite(seed), sandwich_suite(seed), maximal_suite(seed),
            expectation_suite(seed)};
}

}  // namespace cct
