// icebergsim.hpp
//
// Slot-synchronous simulation of distributed iceberg detection. Every slot,
// each router draws one request signature (0 stands for the lumped sub-theta
// traffic). A router flushes its current collection to the server once it
// holds c distinct signatures, or when its timer expires, in which case the
// partial collection is sent. The server keeps cumulative per-signature
// counts and raises an alarm the first time a signature's share of the
// reported traffic reaches the global threshold.
#pragma once

#include "cct/exact.hpp"
#include "cct/oracle.hpp"
#include "cct/probmodel.hpp"
#include "cct/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cct {

struct RouterConfig {
    CouponDistribution<double> distribution;
    std::size_t c = 1;
    /// Slots after the last flush at which a partial flush is forced.
    std::optional<std::size_t> timer_k;

    friend bool operator==(const RouterConfig&, const RouterConfig&) = default;
};

/// Raises one signature's probability at a set of routers from a given slot
/// on; the extra mass is taken from the router's null mass.
struct Injection {
    std::uint64_t slot = 1;
    std::size_t signature = 1;          // 1-based
    std::vector<std::size_t> routers;   // 0-based router indices
    double boost = 0;

    friend bool operator==(const Injection&, const Injection&) = default;
};

struct SimConfig {
    std::vector<RouterConfig> routers;
    std::uint64_t horizon = 1;
    double global_threshold = 0.5;
    std::uint64_t seed = 0;
    double theta = 0;
    /// Reported slots the server needs before it may raise alarms.
    std::uint64_t warmup = 0;
    std::optional<Injection> injection;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Alarm {
    std::size_t signature = 0;
    std::uint64_t slot = 0;

    friend bool operator==(const Alarm&, const Alarm&) = default;
};

struct SimReport {
    /// inter_flush[r]: slots between consecutive flushes of router r.
    std::vector<std::vector<std::uint64_t>> inter_flush;
    /// timer_firings[r]: flushes of router r forced by its timer.
    std::vector<std::uint64_t> timer_firings;
    std::uint64_t timer_firing_count = 0;
    std::vector<Alarm> alarms;
    std::uint64_t message_count = 0;
    std::vector<std::uint64_t> detection_latency;

    /// server_counts[s]: draws of signature s received by the server (index 0 unused).
    std::vector<std::uint64_t> server_counts;
    std::uint64_t server_slots = 0;
    std::uint64_t non_null_draws = 0;
    std::uint64_t pending_draws = 0;

    std::uint64_t flush_events() const {
        std::uint64_t total = 0;
        for (const auto& r : inter_flush) total += r.size();
        return total;
    }

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline void validate(const SimConfig& cfg) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
    if (cfg.routers.empty()) fail("no routers");
    if (cfg.horizon < 1) fail("horizon must be >= 1");
    if (!(cfg.global_threshold > 0 && cfg.global_threshold < 1)) fail("global_threshold must lie in (0,1)");
    if (!(cfg.theta > 0)) fail("theta must be positive");
    const std::size_t n = cfg.routers.front().distribution.size();
    for (std::size_t r = 0; r < cfg.routers.size(); ++r) {
        const auto& rc = cfg.routers[r];
        const std::string who = "router " + std::to_string(r) + ": ";
        if (rc.distribution.size() != n) fail(who + "all routers must share n");
        if (rc.c < 1 || rc.c > n) fail(who + "c outside 1..n");
        if (rc.timer_k && *rc.timer_k < 1) fail(who + "timer_k must be >= 1");
        for (double x : rc.distribution.entries())
            if (x < cfg.theta - kTolerance) fail(who + "entry below theta");
    }
    if (cfg.injection) {
        const auto& inj = *cfg.injection;
        if (inj.signature < 1 || inj.signature > n) fail("injection signature outside 1..n");
        if (!(inj.boost > 0)) fail("injection boost must be positive");
        if (inj.slot < 1) fail("injection slot must be >= 1");
        for (auto r : inj.routers) {
            if (r >= cfg.routers.size()) fail("injection router index out of range");
            if (inj.boost > cfg.routers[r].distribution.null_mass() + kTolerance)
                fail("injection boost exceeds router " + std::to_string(r) + "'s null mass");
        }
    }
}

/// The router's law after an injection of `boost` on `signature`.
inline CouponDistribution<double> boosted(const CouponDistribution<double>& p, std::size_t signature, double boost) {
    std::vector<double> e(p.entries().begin(), p.entries().end());
    e[signature - 1] += boost;
    const double mass = std::accumulate(e.begin(), e.end(), 0.0);
    if (mass > 1.0) e[signature - 1] -= mass - 1.0;
    return CouponDistribution<double>::validate(std::move(e));
}

inline SimReport run_simulation(const SimConfig& cfg) {
    validate(cfg);
    const std::size_t routers = cfg.routers.size();
    const std::size_t n = cfg.routers.front().distribution.size();

    struct RouterState {
        CollectionSampler sampler;
        std::optional<CollectionSampler> injected;
        SplitMix64 rng;
        std::vector<std::uint64_t> counts;  // per signature, current collection
        std::vector<std::size_t> touched;
        std::size_t distinct = 0;
        std::uint64_t elapsed = 0;
    };

    std::vector<RouterState> state;
    state.reserve(routers);
    for (std::size_t r = 0; r < routers; ++r) {
        const auto& rc = cfg.routers[r];
        state.push_back({CollectionSampler(rc.distribution, rc.c), std::nullopt, SplitMix64::stream(cfg.seed, r),
                         std::vector<std::uint64_t>(n + 1, 0), {}, 0, 0});
    }
    if (cfg.injection) {
        for (auto r : cfg.injection->routers) {
            const auto& rc = cfg.routers[r];
            state[r].injected.emplace(boosted(rc.distribution, cfg.injection->signature, cfg.injection->boost), rc.c);
        }
    }

    SimReport rep;
    rep.inter_flush.resize(routers);
    rep.timer_firings.assign(routers, 0);
    rep.server_counts.assign(n + 1, 0);
    std::vector<bool> alarmed(n + 1, false);
    std::vector<std::size_t> updated;

    for (std::uint64_t slot = 1; slot <= cfg.horizon; ++slot) {
        updated.clear();
        const bool injected = cfg.injection && slot >= cfg.injection->slot;
        for (std::size_t r = 0; r < routers; ++r) {
            auto& st = state[r];
            const auto& rc = cfg.routers[r];
            const auto& sampler = (injected && st.injected) ? *st.injected : st.sampler;
            const std::size_t s = sampler.draw(st.rng);
            ++st.elapsed;
            if (s != 0) {
                ++rep.non_null_draws;
                if (st.counts[s]++ == 0) {
                    ++st.distinct;
                    st.touched.push_back(s);
                }
            }
            const bool full = st.distinct >= rc.c;
            const bool expired = rc.timer_k && st.elapsed >= *rc.timer_k;
            if (!full && !expired) continue;

            ++rep.message_count;
            if (!full) {
                ++rep.timer_firings[r];
                ++rep.timer_firing_count;
            }
            rep.inter_flush[r].push_back(st.elapsed);
            rep.server_slots += st.elapsed;
            for (auto sig : st.touched) {
                rep.server_counts[sig] += st.counts[sig];
                st.counts[sig] = 0;
                updated.push_back(sig);
            }
            st.touched.clear();
            st.distinct = 0;
            st.elapsed = 0;
        }

        if (rep.server_slots < std::max<std::uint64_t>(cfg.warmup, 1)) continue;
        std::sort(updated.begin(), updated.end());
        updated.erase(std::unique(updated.begin(), updated.end()), updated.end());
        for (auto sig : updated) {
            if (alarmed[sig]) continue;
            const double share = static_cast<double>(rep.server_counts[sig]) / static_cast<double>(rep.server_slots);
            if (share >= cfg.global_threshold) {
                alarmed[sig] = true;
                rep.alarms.push_back({sig, slot});
                if (cfg.injection && sig == cfg.injection->signature && slot >= cfg.injection->slot)
                    rep.detection_latency.push_back(slot - cfg.injection->slot);
            }
        }
    }

    for (const auto& st : state)
        for (auto sig : st.touched) rep.pending_draws += st.counts[sig];
    return rep;
}

/// Worst-case flush deadline: the delta-quantile of the collection time
/// under the extremal member of B_theta. Under any p in A_theta the
/// probability of no flush by the returned k is at most delta.
template <Scalar T>
std::size_t dimension_timer(std::size_t n, std::size_t c, const T& theta, const T& null_mass, double delta) {
    const auto family = ThetaFamily<T>::make(n, null_mass, theta);
    return quantile(extremal_member(family, 1), c, delta);
}

/// sup_k |empirical Pr{T > k} - curve Pr{T > k}|; the curve is taken as 0
/// past its truncation point.
template <Scalar T>
double empirical_vs_theory(std::span<const std::uint64_t> samples, const SurvivalCurve<T>& curve) {
    if (samples.size() < 100) throw Error(ErrorCode::TooFewSamples, "need at least 100 inter-flush samples");
    std::vector<std::uint64_t> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    const std::size_t K = std::max<std::size_t>(curve.values.size() - 1, sorted.back());
    double sup = 0;
    for (std::size_t k = 0; k <= K; ++k) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), k);
        const double emp = static_cast<double>(above) / total;
        const double theory = k < curve.values.size() ? to_double(curve.values[k]) : 0.0;
        sup = std::max(sup, std::abs(emp - theory));
    }
    return sup;
}

template <Scalar T>
double empirical_vs_theory(const SimReport& report, std::size_t router, const SurvivalCurve<T>& curve) {
    if (router >= report.inter_flush.size()) throw Error(ErrorCode::IndexOutOfRange, "router index");
    return empirical_vs_theory(std::span<const std::uint64_t>(report.inter_flush[router]), curve);
}

}  // namespace cct
