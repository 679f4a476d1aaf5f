// exact.hpp
//
// Closed-form evaluation of the law of T_{c,n}(p), the number of draws needed
// to see c distinct non-null coupons:
//
//   Pr{T > k} = sum_{i=0}^{c-1} (-1)^{c-1-i} C(n-i-1, n-c) sum_{|J|=i} (p0 + P_J)^k
//
// together with the multinomial composition-sum form, the null-mass
// decomposition over the normalized law p/(1-p0), the expectation, and
// quantiles. Every evaluator is templated on the scalar mode.
#pragma once

#include "cct/probmodel.hpp"
#include "cct/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cct {

/// Upper bound on subset (or composition) terms a single evaluation may visit.
inline constexpr double kMaxTerms = 2e7;

/// Truncated survival function Pr{T > k}, k = 0..K.
///
/// tail_bound_at_K bounds both sum_{k>K} Pr{T > k} and sup_{k>K} Pr{T > k}.
/// It follows from T's remaining time from any incomplete state being
/// stochastically below NegBin(c, 1 - tail_rate).
template <Scalar T>
struct SurvivalCurve {
    std::vector<T> values;
    T tail_rate{0};
    std::size_t truncation_k = 0;
    T tail_bound_at_K{0};
    std::size_t c = 0;

    static constexpr bool exact = is_exact_v<T>;

    T cumulative(std::size_t k) const { return T(1) - values.at(k); }
};

/// One J in S_{i,n}: its members (1-based) and mass P_J.
template <Scalar T>
struct SubsetTerm {
    std::vector<std::size_t> members;
    T mass{0};
};

/// Calls fn(members) for every size-`size` subset of {0..n-1} (0-based) in
/// lexicographic order of member indices.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t size, Fn&& fn) {
    if (size > n) return;
    std::vector<std::size_t> idx(size);
    for (std::size_t t = 0; t < size; ++t) idx[t] = t;
    while (true) {
        fn(std::span<const std::size_t>(idx));
        if (size == 0) return;
        std::size_t t = size;
        while (t > 0 && idx[t - 1] == n - size + t - 1) --t;
        if (t == 0) return;
        ++idx[t - 1];
        for (std::size_t u = t; u < size; ++u) idx[u] = idx[u - 1] + 1;
    }
}

/// All subset terms of S_{i,n} in lexicographic order.
template <Scalar T>
std::vector<SubsetTerm<T>> subsets_of_size(const CouponDistribution<T>& p, std::size_t i) {
    std::vector<SubsetTerm<T>> out;
    for_each_subset(p.size(), i, [&](std::span<const std::size_t> idx) {
        SubsetTerm<T> term;
        for (auto m : idx) {
            term.members.push_back(m + 1);
            term.mass += p[m];
        }
        out.push_back(std::move(term));
    });
    return out;
}

/// Positive compositions (k_1, ..., k_m) of `target` into `parts` parts,
/// visited in lexicographic order. With zero parts the only composition is
/// the empty one, and it exists only for target 0.
class CompositionIterator {
public:
    CompositionIterator(std::size_t target, std::size_t parts) : target_(target), parts_(parts) {
        if (parts == 0) {
            valid_ = (target == 0);
            return;
        }
        if (target < parts) {
            valid_ = false;
            return;
        }
        current_.assign(parts, 1);
        current_.back() = target - (parts - 1);
        valid_ = true;
    }

    bool valid() const noexcept { return valid_; }
    std::span<const std::size_t> current() const noexcept { return current_; }
    std::size_t target() const noexcept { return target_; }
    std::size_t parts() const noexcept { return parts_; }

    /// Advances to the next composition; returns false past the last one.
    bool next() {
        if (!valid_ || parts_ <= 1) return valid_ = false;
        // Rightmost position t < parts-1 whose suffix still has slack: grow
        // it by one and reset the suffix to (1, ..., 1, rest).
        std::size_t suffix = current_.back();
        for (std::size_t t = parts_ - 1; t-- > 0;) {
            const std::size_t suffix_len = parts_ - 1 - t;
            if (suffix > suffix_len) {
                ++current_[t];
                for (std::size_t u = t + 1; u + 1 < parts_; ++u) current_[u] = 1;
                current_.back() = suffix - 1 - (suffix_len - 1);
                return true;
            }
            suffix += current_[t];
        }
        return valid_ = false;
    }

private:
    std::size_t target_;
    std::size_t parts_;
    std::vector<std::size_t> current_;
    bool valid_ = false;
};

namespace detail {

inline void require_c(std::size_t n, std::size_t c) {
    if (c < 1 || c > n)
        throw Error(ErrorCode::InvalidC, "c = " + std::to_string(c) + " outside 1.." + std::to_string(n));
}

inline double subset_workload(std::size_t n, std::size_t c) {
    double total = 0;
    for (std::size_t i = 0; i < c; ++i) total += binomial_d(n, i);
    return total;
}

inline void require_subset_workload(std::size_t n, std::size_t c) {
    const double w = subset_workload(n, c);
    if (w > kMaxTerms)
        throw Error(ErrorCode::WorkloadExceeded,
                    std::to_string(static_cast<long double>(w)) +
                        " subset terms exceed the 2e7 guard; use the Monte-Carlo oracle (--method mc)");
}

}  // namespace detail

/// p0 plus the c-1 largest entries: the largest self-loop probability of any
/// state holding fewer than c coupons.
template <Scalar T>
T collection_tail_rate(const CouponDistribution<T>& p, std::size_t c) {
    detail::require_c(p.size(), c);
    std::vector<T> sorted(p.entries().begin(), p.entries().end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    T rate = p.null_mass();
    for (std::size_t t = 0; t + 1 < c; ++t) rate += sorted[t];
    return rate;
}

/// The inclusion-exclusion sum prepared for repeated evaluation: one signed binomial weight per
/// layer i and the bases p0 + P_J of every J with |J| = i, layers in
/// increasing i and subsets in lexicographic order.
template <Scalar T>
class InclusionExclusion {
public:
    InclusionExclusion(const CouponDistribution<T>& p, std::size_t c) : c_(c) {
        const std::size_t n = p.size();
        detail::require_c(n, c);
        detail::require_subset_workload(n, c);
        for (std::size_t i = 0; i < c; ++i) {
            T weight = binomial_as<T>(n - i - 1, n - c);
            if ((c - 1 - i) % 2 == 1) weight = -weight;
            weights_.push_back(weight);
            layer_begin_.push_back(bases_.size());
            for_each_subset(n, i, [&](std::span<const std::size_t> idx) {
                T base = p.null_mass();
                for (auto m : idx) base += p[m];
                bases_.push_back(base);
            });
        }
        layer_begin_.push_back(bases_.size());

        tail_rate_ = collection_tail_rate(p, c);
    }

    std::size_t c() const noexcept { return c_; }
    std::size_t term_count() const noexcept { return bases_.size(); }
    /// p0 plus the c-1 largest entries: the largest self-loop probability of
    /// any incomplete collection state.
    const T& tail_rate() const noexcept { return tail_rate_; }

    T survival(std::uint64_t k) const {
        Accumulator<T> acc;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            Accumulator<T> layer;
            for (std::size_t t = layer_begin_[i]; t < layer_begin_[i + 1]; ++t) layer += ipow(bases_[t], k);
            acc += weights_[i] * layer.value();
        }
        return clamp01(acc.value());
    }

    /// Pr{T > k} for k = 0..K, updating the powers incrementally.
    std::vector<T> survival_range(std::size_t K) const {
        std::vector<T> out;
        out.reserve(K + 1);
        Stepper s(*this);
        for (std::size_t k = 0; k <= K; ++k) out.push_back(s.advance());
        return out;
    }

    /// sum_{k>=0} Pr{T > k} = sum_i w_i sum_J 1/(1 - p0 - P_J).
    T expectation() const {
        Accumulator<T> acc;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            Accumulator<T> layer;
            for (std::size_t t = layer_begin_[i]; t < layer_begin_[i + 1]; ++t)
                layer += T(1) / (T(1) - bases_[t]);
            acc += weights_[i] * layer.value();
        }
        return acc.value();
    }

    /// Yields Pr{T > 0}, Pr{T > 1}, ... on successive calls.
    class Stepper {
    public:
        explicit Stepper(const InclusionExclusion& ie) : ie_(&ie), powers_(ie.bases_.size(), T(1)) {}

        T advance() {
            Accumulator<T> acc;
            for (std::size_t i = 0; i < ie_->weights_.size(); ++i) {
                Accumulator<T> layer;
                for (std::size_t t = ie_->layer_begin_[i]; t < ie_->layer_begin_[i + 1]; ++t) layer += powers_[t];
                acc += ie_->weights_[i] * layer.value();
            }
            for (std::size_t t = 0; t < powers_.size(); ++t) powers_[t] *= ie_->bases_[t];
            return clamp01(acc.value());
        }

    private:
        const InclusionExclusion* ie_;
        std::vector<T> powers_;
    };

private:
    static T clamp01(T x) {
        if constexpr (!is_exact_v<T>) x = std::clamp(x, 0.0, 1.0);
        return x;
    }

    std::size_t c_;
    std::vector<T> weights_;
    std::vector<std::size_t> layer_begin_;
    std::vector<T> bases_;
    T tail_rate_{0};
};

template <Scalar T>
T survival_inclusion_exclusion(const CouponDistribution<T>& p, std::size_t c, std::uint64_t k) {
    return InclusionExclusion<T>(p, c).survival(k);
}

namespace detail {

template <Scalar T>
void require_tail_rate(const T& r) {
    if (!(r < T(1) - from_double<T>(kTolerance)))
        throw Error(ErrorCode::TailRateOne, "c distinct coupons are unreachable within tolerance");
}

template <Scalar T>
void require_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0,1)");
}

/// (c - 1 + r) / (1 - r): sum_{m>=1} Pr{NegBin(c, 1-r) > m}.
template <Scalar T>
T tail_factor(std::size_t c, const T& r) {
    return (T(static_cast<long>(c) - 1) + r) / (T(1) - r);
}

}  // namespace detail

/// Wraps survival values computed by any route (k = 0..K) with the tail
/// rate and tail bound of p.
template <Scalar T>
SurvivalCurve<T> curve_from_values(const CouponDistribution<T>& p, std::size_t c, std::vector<T> values) {
    SurvivalCurve<T> curve;
    curve.c = c;
    curve.tail_rate = collection_tail_rate(p, c);
    detail::require_tail_rate(curve.tail_rate);
    curve.values = std::move(values);
    curve.truncation_k = curve.values.size() - 1;
    curve.tail_bound_at_K = curve.values.back() * detail::tail_factor(c, curve.tail_rate);
    return curve;
}

/// Curve over k = 0..K for a fixed K.
template <Scalar T>
SurvivalCurve<T> survival_curve_to(const CouponDistribution<T>& p, std::size_t c, std::size_t K) {
    InclusionExclusion<T> ie(p, c);
    detail::require_tail_rate(ie.tail_rate());
    SurvivalCurve<T> curve;
    curve.c = c;
    curve.tail_rate = ie.tail_rate();
    curve.values = ie.survival_range(K);
    curve.truncation_k = K;
    curve.tail_bound_at_K = curve.values.back() * detail::tail_factor(c, curve.tail_rate);
    return curve;
}

/// Curve truncated at the smallest K whose tail bound is below delta.
template <Scalar T>
SurvivalCurve<T> survival_curve(const CouponDistribution<T>& p, std::size_t c, double delta) {
    detail::require_delta<T>(delta);
    InclusionExclusion<T> ie(p, c);
    detail::require_tail_rate(ie.tail_rate());
    const T factor = detail::tail_factor(c, ie.tail_rate());
    const T limit = from_double<T>(delta);

    SurvivalCurve<T> curve;
    curve.c = c;
    curve.tail_rate = ie.tail_rate();
    typename InclusionExclusion<T>::Stepper s(ie);
    while (true) {
        curve.values.push_back(s.advance());
        const T bound = curve.values.back() * factor;
        if (bound < limit) {
            curve.truncation_k = curve.values.size() - 1;
            curve.tail_bound_at_K = bound;
            return curve;
        }
    }
}

/// Multinomial composition sums: sum over J with |J| < c and over positive
/// compositions (k_j) of k of k! prod p_j^{k_j} / k_j!. For p0 > 0 the same
/// sums are taken conditionally on k0 null draws with the normalized law and
/// mixed over the binomial law of k0.
template <Scalar T>
T survival_by_compositions(const CouponDistribution<T>& p, std::size_t c, std::uint64_t k) {
    const std::size_t n = p.size();
    detail::require_c(n, c);

    double work = 0;
    for (std::uint64_t m = 0; m <= k; ++m) {
        for (std::size_t i = 1; i < c; ++i)
            if (m >= i) work += binomial_d(n, i) * binomial_d(m - 1, i - 1);
        if (p.null_mass() == T(0)) break;
    }
    if (work > kMaxTerms)
        throw Error(ErrorCode::WorkloadExceeded, "composition terms exceed the 2e7 guard");

    // The normalized law p/(1-p0), kept as a plain vector: for n = 1 it is
    // the point mass (1), which is not a valid CouponDistribution.
    std::vector<T> q(p.entries().begin(), p.entries().end());
    for (auto& x : q) x /= p.mass();
    std::vector<T> fact(k + 1, T(1));
    for (std::uint64_t t = 1; t <= k; ++t) fact[t] = fact[t - 1] * T(static_cast<long>(t));

    // Conditional survival given `total` non-null draws.
    auto conditional = [&](std::uint64_t total) {
        Accumulator<T> acc;
        for (std::size_t i = 0; i < c; ++i) {
            for_each_subset(n, i, [&](std::span<const std::size_t> idx) {
                for (CompositionIterator it(total, i); it.valid(); it.next()) {
                    T term = fact[total];
                    const auto parts = it.current();
                    for (std::size_t t = 0; t < parts.size(); ++t)
                        term *= ipow(q[idx[t]], parts[t]) / fact[parts[t]];
                    acc += term;
                }
            });
        }
        return acc.value();
    };

    if (p.null_mass() == T(0)) return conditional(k);

    const T p0 = p.null_mass();
    const T rest = T(1) - p0;
    Accumulator<T> acc;
    for (std::uint64_t k0 = 0; k0 <= k; ++k0) {
        const T weight = binomial_as<T>(k, k0) * ipow(p0, k0) * ipow(rest, k - k0);
        acc += weight * conditional(k - k0);
    }
    return acc.value();
}

/// Binomial mixture over the number of null draws of the survival of the
/// normalized law p/(1-p0).
template <Scalar T>
T survival_by_decomposition(const CouponDistribution<T>& p, std::size_t c, std::uint64_t k) {
    detail::require_c(p.size(), c);
    if (p.null_mass() == T(0)) return InclusionExclusion<T>(p, c).survival(k);
    const T p0 = p.null_mass();
    const T rest = T(1) - p0;
    // A single coupon normalizes to the point mass: collected on the first draw.
    std::vector<T> inner(k + 1, T(0));
    inner[0] = T(1);
    if (p.size() > 1) inner = InclusionExclusion<T>(normalize(p), c).survival_range(k);
    Accumulator<T> acc;
    for (std::uint64_t l = 0; l <= k; ++l)
        acc += binomial_as<T>(k, l) * ipow(p0, l) * ipow(rest, k - l) * inner[k - l];
    return acc.value();
}

/// E[T_{c,n}(p)].
template <Scalar T>
T expectation(const CouponDistribution<T>& p, std::size_t c) {
    InclusionExclusion<T> ie(p, c);
    detail::require_tail_rate(ie.tail_rate());
    return ie.expectation();
}

/// Smallest k with Pr{T > k} <= delta.
template <Scalar T>
std::size_t quantile(const CouponDistribution<T>& p, std::size_t c, double delta) {
    detail::require_delta<T>(delta);
    InclusionExclusion<T> ie(p, c);
    detail::require_tail_rate(ie.tail_rate());
    const T limit = from_double<T>(delta);
    typename InclusionExclusion<T>::Stepper s(ie);
    for (std::size_t k = 0;; ++k)
        if (!(s.advance() > limit)) return k;
}

}  // namespace cct
