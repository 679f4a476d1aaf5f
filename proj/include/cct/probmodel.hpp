// probmodel.hpp
//
// Probability vectors with a null coupon, the theta-constrained families,
// majorization, and the pairwise mixing transforms that move a vector down
// (towards the almost-uniform vector) or up (towards the extremal members)
// in the majorization order.
//
// Positions are 1-based throughout the public API, matching the usual
// coupon numbering 1..n (coupon 0 is the null coupon).
#pragma once

#include "cct/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cct {

template <Scalar T>
class CouponDistribution {
public:
    /// Checks every invariant and derives the null mass.
    static CouponDistribution validate(std::vector<T> entries) {
        if (entries.empty()) throw Error(ErrorCode::EmptyVector, "distribution has no entries");
        T sum(0);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const T& e = entries[i];
            if (!(e > T(0)))
                throw Error(ErrorCode::NonPositiveEntry, "entry " + std::to_string(i + 1) + " is not positive");
            if (!(e < T(1)))
                throw Error(ErrorCode::EntryAtLeastOne, "entry " + std::to_string(i + 1) + " is >= 1");
            sum += e;
        }
        if (sum > T(1) + tolerance<T>())
            throw Error(ErrorCode::MassExceedsOne, "entries sum to " + std::to_string(to_double(sum)));
        T null_mass = T(1) - sum;
        if (null_mass < T(0)) null_mass = T(0);
        return CouponDistribution(std::move(entries), std::move(null_mass));
    }

    std::size_t size() const noexcept { return entries_.size(); }
    std::span<const T> entries() const noexcept { return entries_; }
    const T& operator[](std::size_t index0) const { return entries_[index0]; }
    /// 1-based access.
    const T& at(std::size_t position) const {
        if (position < 1 || position > entries_.size())
            throw Error(ErrorCode::IndexOutOfRange, "position " + std::to_string(position));
        return entries_[position - 1];
    }
    const T& null_mass() const noexcept { return null_mass_; }

    /// Sum of the non-null entries, 1 - p0.
    T mass() const { return T(1) - null_mass_; }

    CouponDistribution<double> to_float() const {
        std::vector<double> e;
        e.reserve(entries_.size());
        for (const auto& x : entries_) e.push_back(to_double(x));
        return CouponDistribution<double>::validate(std::move(e));
    }

    friend bool operator==(const CouponDistribution& a, const CouponDistribution& b) {
        return a.entries_ == b.entries_;
    }

private:
    CouponDistribution(std::vector<T> entries, T null_mass)
        : entries_(std::move(entries)), null_mass_(std::move(null_mass)) {}

    std::vector<T> entries_;
    T null_mass_;
};

/// Entrywise comparison within the float tolerance (exact for rationals).
template <Scalar T>
bool approx_equal(std::span<const T> a, std::span<const T> b, double tol = kTolerance) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if constexpr (is_exact_v<T>) {
            if (a[i] != b[i]) return false;
        } else if (std::abs(a[i] - b[i]) > tol) {
            return false;
        }
    }
    return true;
}

template <Scalar T>
bool approx_equal(const CouponDistribution<T>& a, const CouponDistribution<T>& b, double tol = kTolerance) {
    return approx_equal<T>(a.entries(), b.entries(), tol);
}

/// v = ((1-p0)/n, ..., (1-p0)/n).
template <Scalar T>
CouponDistribution<T> almost_uniform(std::size_t n, const T& null_mass) {
    if (n == 0) throw Error(ErrorCode::EmptyVector, "n must be >= 1");
    if (null_mass < T(0) || !(null_mass < T(1)))
        throw Error(ErrorCode::DegenerateNullMass, "p0 must lie in [0,1)");
    T each = (T(1) - null_mass) / T(static_cast<long>(n));
    return CouponDistribution<T>::validate(std::vector<T>(n, each));
}

/// p / (1 - p0): the conditional law of a non-null draw.
template <Scalar T>
CouponDistribution<T> normalize(const CouponDistribution<T>& p) {
    const T mass = p.mass();
    if (!(mass > tolerance<T>()))
        throw Error(ErrorCode::DegenerateNullMass, "null mass is 1");
    if (p.null_mass() == T(0)) return p;
    std::vector<T> e(p.entries().begin(), p.entries().end());
    for (auto& x : e) x /= mass;
    if constexpr (!is_exact_v<T>) {
        // A lone entry of 1 after rounding is still the degenerate n = 1 law.
        for (auto& x : e) x = std::min(x, std::nextafter(1.0, 0.0));
    }
    return CouponDistribution<T>::validate(std::move(e));
}

/// True iff every partial sum of the m largest entries of a is at least the
/// same partial sum for b (within tolerance).
template <Scalar T>
bool majorizes(const CouponDistribution<T>& a, const CouponDistribution<T>& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::LengthMismatch, "majorizes: vectors differ in length");
    const T tol = is_exact_v<T> ? T(0) : T(kTolerance);
    T diff = a.mass() - b.mass();
    if (diff < T(0)) diff = -diff;
    if (diff > tol) throw Error(ErrorCode::MassMismatch, "majorizes: entry sums differ");

    std::vector<T> sa(a.entries().begin(), a.entries().end());
    std::vector<T> sb(b.entries().begin(), b.entries().end());
    std::sort(sa.begin(), sa.end(), std::greater<>());
    std::sort(sb.begin(), sb.end(), std::greater<>());
    T ra(0), rb(0);
    for (std::size_t m = 0; m < sa.size(); ++m) {
        ra += sa[m];
        rb += sb[m];
        if (ra < rb - tol) return false;
    }
    return true;
}

/// p'_i = lambda p_i + (1-lambda) p_j, p'_j = (1-lambda) p_i + lambda p_j.
template <Scalar T>
CouponDistribution<T> lambda_transform(const CouponDistribution<T>& p, std::size_t i, std::size_t j,
                                       const T& lambda) {
    const std::size_t n = p.size();
    if (i < 1 || i > n || j < 1 || j > n || i == j)
        throw Error(ErrorCode::IndexOutOfRange,
                    "lambda_transform needs distinct positions in 1.." + std::to_string(n));
    if (lambda < T(0) || lambda > T(1))
        throw Error(ErrorCode::LambdaOutOfRange, "lambda must lie in [0,1]");
    std::vector<T> e(p.entries().begin(), p.entries().end());
    const T pi = e[i - 1];
    const T pj = e[j - 1];
    e[i - 1] = lambda * pi + (T(1) - lambda) * pj;
    e[j - 1] = (T(1) - lambda) * pi + lambda * pj;
    return CouponDistribution<T>::validate(std::move(e));
}

template <Scalar T>
struct TransformStep {
    std::size_t index_i = 0;
    std::size_t index_j = 0;
    T lambda{0};
    CouponDistribution<T> result;
};

template <Scalar T>
struct TransformTrace {
    CouponDistribution<T> start;
    std::vector<TransformStep<T>> steps;

    const CouponDistribution<T>& final_vector() const {
        return steps.empty() ? start : steps.back().result;
    }
};

namespace detail {

// Replace entries i and j (0-based) so that i holds `pinned` and the pair's
// mass is conserved.
template <Scalar T>
CouponDistribution<T> pin_pair(const CouponDistribution<T>& p, std::size_t i, std::size_t j, const T& pinned) {
    std::vector<T> e(p.entries().begin(), p.entries().end());
    const T total = e[i] + e[j];
    e[i] = pinned;
    e[j] = total - pinned;
    return CouponDistribution<T>::validate(std::move(e));
}

template <Scalar T>
std::optional<std::size_t> first_index(const CouponDistribution<T>& p, auto&& pred) {
    for (std::size_t k = 0; k < p.size(); ++k)
        if (pred(p[k])) return k;
    return std::nullopt;
}

}  // namespace detail

/// Walks p to the almost-uniform vector v by pairwise mixing. Each step picks
/// p_i < (1-p0)/n < p_j and pins p'_i = (1-p0)/n. Explicit (i, j) pairs are
/// applied first; the remaining steps use the lowest-index deficient entry
/// and the lowest-index surplus entry.
template <Scalar T>
TransformTrace<T> uniformize_trace(const CouponDistribution<T>& p,
                                   std::span<const std::pair<std::size_t, std::size_t>> pairs = {}) {
    const std::size_t n = p.size();
    const T target = p.mass() / T(static_cast<long>(n));
    const T tol = tolerance<T>();
    TransformTrace<T> trace{p, {}};

    auto push_step = [&](std::size_t i0, std::size_t j0) {
        const auto& cur = trace.final_vector();
        const T lambda = (cur[j0] - target) / (cur[j0] - cur[i0]);
        auto next = detail::pin_pair(cur, i0, j0, target);
        trace.steps.push_back({i0 + 1, j0 + 1, lambda, std::move(next)});
    };

    for (const auto& [i, j] : pairs) {
        const auto& cur = trace.final_vector();
        if (i < 1 || i > n || j < 1 || j > n || i == j)
            throw Error(ErrorCode::IndexOutOfRange, "uniformize pair out of range");
        if (!(cur[i - 1] < target && target < cur[j - 1]))
            throw Error(ErrorCode::IndexOutOfRange,
                        "pair (" + std::to_string(i) + "," + std::to_string(j) + ") does not straddle the target");
        push_step(i - 1, j - 1);
    }

    while (trace.steps.size() < n) {
        const auto& cur = trace.final_vector();
        auto i0 = detail::first_index(cur, [&](const T& x) { return x < target - tol; });
        auto j0 = detail::first_index(cur, [&](const T& x) { return x > target + tol; });
        if (!i0 && !j0) break;
        // Rounding can leave one side just inside the tolerance band.
        if (!i0) i0 = detail::first_index(cur, [&](const T& x) { return x < target; });
        if (!j0) j0 = detail::first_index(cur, [&](const T& x) { return x > target; });
        if (!i0 || !j0) break;
        push_step(*i0, *j0);
    }
    return trace;
}

/// The constraint set A_theta = {p : sum p = 1 - p0, p_j >= theta} and its
/// extremal members B_theta, where all entries but one equal theta and the
/// remaining one holds gamma = 1 - p0 - (n-1) theta.
template <Scalar T>
struct ThetaFamily {
    std::size_t n = 0;
    T null_mass{0};
    T theta{0};
    T gamma{0};

    static ThetaFamily make(std::size_t n, const T& null_mass, const T& theta) {
        if (n == 0) throw Error(ErrorCode::EmptyVector, "n must be >= 1");
        if (null_mass < T(0) || !(null_mass < T(1)))
            throw Error(ErrorCode::DegenerateNullMass, "p0 must lie in [0,1)");
        const T ceiling = (T(1) - null_mass) / T(static_cast<long>(n));
        if (!(theta > T(0)) || theta > ceiling + tolerance<T>())
            throw Error(ErrorCode::InvalidTheta, "theta must lie in (0, (1-p0)/n]");
        ThetaFamily f{n, null_mass, theta, T(1) - null_mass - T(static_cast<long>(n - 1)) * theta};
        if (f.gamma < f.theta - tolerance<T>())
            throw Error(ErrorCode::InvalidTheta, "gamma < theta");
        return f;
    }

    bool contains(const CouponDistribution<T>& p) const {
        if (p.size() != n) return false;
        T diff = p.null_mass() - null_mass;
        if (diff < T(0)) diff = -diff;
        if (diff > tolerance<T>()) return false;
        return std::all_of(p.entries().begin(), p.entries().end(),
                           [&](const T& x) { return !(x < theta - tolerance<T>()); });
    }
};

/// The member of B_theta holding gamma at position j.
template <Scalar T>
CouponDistribution<T> extremal_member(const ThetaFamily<T>& family, std::size_t j) {
    if (j < 1 || j > family.n)
        throw Error(ErrorCode::IndexOutOfRange, "extremal position " + std::to_string(j));
    std::vector<T> e(family.n, family.theta);
    e[j - 1] = family.gamma;
    return CouponDistribution<T>::validate(std::move(e));
}

/// Walks p in A_theta up to the member of B_theta with gamma at position j:
/// repeatedly take the first i != j with p_i > theta and move its surplus
/// onto j.
template <Scalar T>
TransformTrace<T> maximize_trace(const CouponDistribution<T>& p, const T& theta, std::size_t j) {
    const std::size_t n = p.size();
    if (j < 1 || j > n) throw Error(ErrorCode::IndexOutOfRange, "target position " + std::to_string(j));
    const auto family = ThetaFamily<T>::make(n, p.null_mass(), theta);
    if (!family.contains(p)) throw Error(ErrorCode::NotInFamily, "some entry is below theta");

    const T tol = tolerance<T>();
    const std::size_t j0 = j - 1;
    TransformTrace<T> trace{p, {}};
    while (trace.steps.size() < n) {
        const auto& cur = trace.final_vector();
        std::optional<std::size_t> i0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j0 && cur[k] > theta + tol) {
                i0 = k;
                break;
            }
        }
        if (!i0) break;
        const T lambda = (cur[j0] - theta) / (cur[j0] - theta + cur[*i0] - theta);
        auto next = detail::pin_pair(cur, *i0, j0, theta);
        trace.steps.push_back({*i0 + 1, j, lambda, std::move(next)});
    }
    return trace;
}

}  // namespace cct
