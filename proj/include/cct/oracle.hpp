// oracle.hpp
//
// Independent ground truth for the closed forms in exact.hpp:
//   - an absorbing chain on the collected-subset state space,
//   - exhaustive enumeration of every draw sequence for small k,
//   - seeded Monte-Carlo sampling of the collection time.
// None of these share code paths with the inclusion-exclusion evaluator.
#pragma once

#include "cct/probmodel.hpp"
#include "cct/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace cct {

/// SplitMix64 (Steele, Lea and Flood; the generator behind Java's
/// SplittableRandom). Satisfies UniformRandomBitGenerator. Streams are split
/// deterministically: stream(seed, i) seeds a fresh generator with
/// mix(mix(seed) ^ mix(i + golden)).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept {
        return SplitMix64(mix(mix(seed) ^ mix(index + kGolden)));
    }

    result_type operator()() noexcept {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Inclusive upper bound on chain states and enumerated sequences.
inline constexpr double kMaxOracleStates = 1e7;

/// Absorbing chain on collected subsets J with |J| < c (all size-c subsets
/// merged into one absorbing state). From J the chain moves to J u {i} with
/// probability p_i for i not in J and stays with probability p0 + P_J.
template <Scalar T>
class CollectionChain {
public:
    CollectionChain(const CouponDistribution<T>& p, std::size_t c) : p_(p), c_(c) {
        const std::size_t n = p.size();
        if (c < 1 || c > n) throw Error(ErrorCode::InvalidC, "c outside 1..n");
        double states = 0;
        for (std::size_t s = 0; s < c; ++s) states += binomial_d(n, s);
        if (states > kMaxOracleStates)
            throw Error(ErrorCode::WorkloadExceeded, "chain needs more than 1e7 states; use the Monte-Carlo oracle");

        // choose_[a][t] = C(a, t) for the colex ranking of subsets.
        choose_.assign(n + 1, std::vector<std::uint64_t>(c + 1, 0));
        for (std::size_t a = 0; a <= n; ++a) {
            choose_[a][0] = 1;
            for (std::size_t t = 1; t <= std::min(a, c); ++t)
                choose_[a][t] = choose_[a - 1][t - 1] + (t <= a - 1 ? choose_[a - 1][t] : 0);
        }
        offset_.assign(c + 1, 0);
        for (std::size_t s = 0; s < c; ++s) offset_[s + 1] = offset_[s] + choose_[n][s];

        members_.resize(offset_[c]);
        self_loop_.resize(offset_[c]);
        for (std::size_t s = 0; s < c; ++s) {
            std::vector<std::size_t> idx(s);
            std::iota(idx.begin(), idx.end(), 0);
            while (true) {
                const std::size_t id = rank(idx);
                members_[id] = idx;
                T loop = p.null_mass();
                for (auto m : idx) loop += p[m];
                self_loop_[id] = loop;
                if (!next_combination(idx, n)) break;
            }
        }
        mass_.assign(offset_[c], T(0));
        mass_[0] = T(1);
    }

    std::size_t state_count() const noexcept { return mass_.size() + 1; }

    /// Advances one draw.
    void step() {
        std::vector<T> next(mass_.size(), T(0));
        const std::size_t n = p_.size();
        for (std::size_t id = 0; id < mass_.size(); ++id) {
            const T& m = mass_[id];
            if (m == T(0)) continue;
            next[id] += m * self_loop_[id];
            const auto& cur = members_[id];
            if (cur.size() + 1 == c_) {
                Accumulator<T> leaving;
                for (std::size_t i = 0; i < n; ++i)
                    if (!std::binary_search(cur.begin(), cur.end(), i)) leaving += p_[i];
                absorbed_ += m * leaving.value();
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (std::binary_search(cur.begin(), cur.end(), i)) continue;
                next[rank_with(cur, i)] += m * p_[i];
            }
        }
        mass_ = std::move(next);
    }

    /// Pr{T > k} after k calls to step().
    T survival() const {
        Accumulator<T> acc;
        for (const auto& m : mass_) acc += m;
        return acc.value();
    }

    const T& absorbed() const noexcept { return absorbed_; }

    /// Transient plus absorbed mass; 1 up to rounding.
    T total_mass() const { return survival() + absorbed_; }

private:
    static bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
        const std::size_t s = idx.size();
        std::size_t t = s;
        while (t > 0 && idx[t - 1] == n - s + t - 1) --t;
        if (t == 0) return false;
        ++idx[t - 1];
        for (std::size_t u = t; u < s; ++u) idx[u] = idx[u - 1] + 1;
        return true;
    }

    std::size_t rank(const std::vector<std::size_t>& idx) const {
        std::size_t r = offset_[idx.size()];
        for (std::size_t t = 0; t < idx.size(); ++t) r += choose_[idx[t]][t + 1];
        return r;
    }

    std::size_t rank_with(const std::vector<std::size_t>& idx, std::size_t extra) const {
        std::size_t r = offset_[idx.size() + 1];
        std::size_t pos = 0;
        bool placed = false;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            if (!placed && extra < idx[t]) {
                r += choose_[extra][++pos];
                placed = true;
            }
            r += choose_[idx[t]][++pos];
        }
        if (!placed) r += choose_[extra][++pos];
        return r;
    }

    CouponDistribution<T> p_;
    std::size_t c_;
    std::vector<std::vector<std::uint64_t>> choose_;
    std::vector<std::size_t> offset_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<T> self_loop_;
    std::vector<T> mass_;
    T absorbed_{0};
};

/// Pr{T > k} for k = 0..K from the absorbing chain.
template <Scalar T>
std::vector<T> survival_markov_range(const CouponDistribution<T>& p, std::size_t c, std::size_t K) {
    CollectionChain<T> chain(p, c);
    std::vector<T> out{chain.survival()};
    for (std::size_t k = 1; k <= K; ++k) {
        chain.step();
        out.push_back(chain.survival());
    }
    return out;
}

template <Scalar T>
T survival_markov(const CouponDistribution<T>& p, std::size_t c, std::size_t k) {
    return survival_markov_range(p, c, k).back();
}

/// law[d][u] = Pr{exactly u distinct non-null symbols among the first d
/// draws}, d = 0..k, by walking every draw sequence over {0, 1, ..., n}.
template <Scalar T>
std::vector<std::vector<T>> distinct_count_law(const CouponDistribution<T>& p, std::size_t k) {
    const std::size_t n = p.size();
    const double sequences = std::pow(static_cast<double>(n + 1), static_cast<double>(k));
    if (sequences > kMaxOracleStates)
        throw Error(ErrorCode::WorkloadExceeded, "(n+1)^k exceeds 1e7 sequences");

    // Symbol weights over {0, ..., n}. Rationals are put over a common
    // denominator so that sequence weights are exact integer products.
    std::vector<T> prob(n + 1);
    prob[0] = p.null_mass();
    for (std::size_t i = 0; i < n; ++i) prob[i + 1] = p[i];

    std::vector<unsigned> count(n + 1, 0);
    std::size_t distinct = 0;

    auto walk = [&](auto&& weights, auto unit, auto&& bins) {
        using W = decltype(unit);
        auto rec = [&](auto&& self, std::size_t depth, const W& w) -> void {
            bins[depth][distinct] += w;
            if (depth == k) return;
            for (std::size_t s = 0; s <= n; ++s) {
                if (weights[s] == 0) continue;
                if (s != 0 && count[s]++ == 0) ++distinct;
                self(self, depth + 1, W(w * weights[s]));
                if (s != 0 && --count[s] == 0) --distinct;
            }
        };
        rec(rec, 0, unit);
    };

    std::vector<std::vector<T>> law(k + 1, std::vector<T>(n + 1, T(0)));
    if constexpr (is_exact_v<T>) {
        BigInt denom(1);
        for (const auto& x : prob) denom = boost::multiprecision::lcm(denom, BigInt(denominator(x)));
        const double bits = std::log2(denom.convert_to<double>()) * static_cast<double>(k);
        std::vector<BigInt> big(n + 1);
        for (std::size_t s = 0; s <= n; ++s) big[s] = BigInt(numerator(prob[s] * T(denom)));

        std::vector<BigInt> scale(k + 1, BigInt(1));
        for (std::size_t d = 1; d <= k; ++d) scale[d] = scale[d - 1] * denom;

        if (bits < 126 && std::log2(denom.convert_to<double>()) < 63) {
            using u128 = unsigned __int128;
            std::vector<u128> w(n + 1);
            for (std::size_t s = 0; s <= n; ++s) w[s] = static_cast<u128>(big[s].convert_to<std::uint64_t>());
            std::vector<std::vector<u128>> bins(k + 1, std::vector<u128>(n + 1, 0));
            walk(w, static_cast<u128>(1), bins);
            for (std::size_t d = 0; d <= k; ++d)
                for (std::size_t u = 0; u <= n; ++u) {
                    const u128 v = bins[d][u];
                    BigInt num = BigInt(static_cast<std::uint64_t>(v >> 64));
                    num <<= 64;
                    num += BigInt(static_cast<std::uint64_t>(v));
                    law[d][u] = T(num) / T(scale[d]);
                }
        } else {
            std::vector<std::vector<BigInt>> bins(k + 1, std::vector<BigInt>(n + 1, BigInt(0)));
            walk(big, BigInt(1), bins);
            for (std::size_t d = 0; d <= k; ++d)
                for (std::size_t u = 0; u <= n; ++u) law[d][u] = T(bins[d][u]) / T(scale[d]);
        }
    } else {
        walk(prob, 1.0, law);
    }
    return law;
}

/// Probability that a length-k draw sequence holds fewer than c distinct
/// non-null coupons.
template <Scalar T>
T survival_enumeration(const CouponDistribution<T>& p, std::size_t c, std::size_t k) {
    if (c < 1 || c > p.size()) throw Error(ErrorCode::InvalidC, "c outside 1..n");
    const auto law = distinct_count_law(p, k);
    Accumulator<T> acc;
    for (std::size_t u = 0; u < c; ++u) acc += law[k][u];
    return acc.value();
}

/// Draws realizations of T_{c,n}(p) by cumulative inversion over
/// (p0, p1, ..., pn).
class CollectionSampler {
public:
    template <Scalar T>
    CollectionSampler(const CouponDistribution<T>& p, std::size_t c) : c_(c) {
        const std::size_t n = p.size();
        if (c < 1 || c > n) throw Error(ErrorCode::InvalidC, "c outside 1..n");
        cumulative_.resize(n + 1);
        double run = to_double(p.null_mass());
        cumulative_[0] = run;
        for (std::size_t i = 0; i < n; ++i) {
            run += to_double(p[i]);
            cumulative_[i + 1] = run;
        }
        stamp_.assign(n + 1, 0);
    }

    std::size_t n() const noexcept { return cumulative_.size() - 1; }
    std::size_t c() const noexcept { return c_; }

    /// One symbol in {0, ..., n}; 0 is the null coupon.
    std::size_t draw(SplitMix64& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) return cumulative_.size() - 1;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

    /// Number of draws until c distinct non-null coupons have been seen.
    std::uint64_t sample(SplitMix64& rng) {
        if (++generation_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            generation_ = 1;
        }
        std::uint64_t draws = 0;
        std::size_t seen = 0;
        while (seen < c_) {
            ++draws;
            const std::size_t s = draw(rng);
            if (s != 0 && stamp_[s] != generation_) {
                stamp_[s] = generation_;
                ++seen;
            }
        }
        return draws;
    }

private:
    std::size_t c_;
    std::vector<double> cumulative_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
};

template <Scalar T>
std::uint64_t sample_collection_time(const CouponDistribution<T>& p, std::size_t c, SplitMix64& rng) {
    CollectionSampler sampler(p, c);
    return sampler.sample(rng);
}

struct McEstimate {
    std::size_t k = 0;
    double estimate = 0;
    double half_width = 0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;

    double ci_low() const { return std::max(0.0, estimate - half_width); }
    double ci_high() const { return std::min(1.0, estimate + half_width); }
};

/// Worker count: CCT_WORKERS if set, otherwise the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("CCT_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// histogram[t] = number of replicates with T = t, for t <= cap; the last
/// slot counts every T > cap. Replicate r always uses stream(seed, r), so the
/// result does not depend on the number of workers.
template <Scalar T>
std::vector<std::uint64_t> collection_time_histogram(const CouponDistribution<T>& p, std::size_t c,
                                                     std::size_t cap, std::uint64_t replicates,
                                                     std::uint64_t seed, unsigned workers = 0) {
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, replicates)));
    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(cap + 2, 0));
    const CollectionSampler prototype(p, c);

    auto run = [&](unsigned w) {
        CollectionSampler sampler = prototype;
        auto& hist = partial[w];
        const std::uint64_t begin = replicates * w / workers;
        const std::uint64_t end = replicates * (w + 1) / workers;
        for (std::uint64_t r = begin; r < end; ++r) {
            auto rng = SplitMix64::stream(seed, r);
            const std::uint64_t t = sampler.sample(rng);
            ++hist[std::min<std::uint64_t>(t, cap + 1)];
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    std::vector<std::uint64_t> total(cap + 2, 0);
    for (const auto& h : partial)
        for (std::size_t t = 0; t < h.size(); ++t) total[t] += h[t];
    return total;
}

/// Per-k estimates of Pr{T > k}, k = 0..k_max, with normal-approximation 95%
/// intervals. The interval degenerates to zero width when no replicate (or
/// every replicate) exceeds k.
template <Scalar T>
std::vector<McEstimate> mc_survival_curve(const CouponDistribution<T>& p, std::size_t c, std::size_t k_max,
                                          std::uint64_t replicates, std::uint64_t seed,
                                          unsigned workers = 0) {
    if (replicates < 100) throw Error(ErrorCode::ConfigInvalid, "at least 100 replicates are required");
    const auto hist = collection_time_histogram(p, c, k_max, replicates, seed, workers);
    std::vector<McEstimate> out;
    std::uint64_t above = replicates;  // replicates with T > k
    const double r = static_cast<double>(replicates);
    for (std::size_t k = 0; k <= k_max; ++k) {
        above -= hist[k];
        const double est = static_cast<double>(above) / r;
        out.push_back({k, est, 1.96 * std::sqrt(est * (1.0 - est) / r), replicates, seed});
    }
    return out;
}

}  // namespace cct
