// io.hpp
//
// Text formats: distribution literals, CSV/JSON for survival curves,
// Monte-Carlo estimates, dominance verdicts and transform traces, and the
// JSON schema of the iceberg simulator.
#pragma once

#include "cct/exact.hpp"
#include "cct/icebergsim.hpp"
#include "cct/oracle.hpp"
#include "cct/ordering.hpp"
#include "cct/probmodel.hpp"
#include "cct/scalar.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cct {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Literals

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Exact value of a decimal literal such as "0.25", "-3", "1.5e-3".
inline Rational parse_decimal(const std::string& tok) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < tok.size() && (tok[pos] == '+' || tok[pos] == '-')) negative = tok[pos++] == '-';
    std::string digits;
    long scale = 0;
    bool seen_digit = false, seen_point = false;
    for (; pos < tok.size(); ++pos) {
        const char ch = tok[pos];
        if (ch >= '0' && ch <= '9') {
            digits += ch;
            seen_digit = true;
            if (seen_point) --scale;
        } else if (ch == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw Error(ErrorCode::ParseError, "not a number: '" + tok + "'");
    if (pos < tok.size()) {
        if (tok[pos] != 'e' && tok[pos] != 'E') throw Error(ErrorCode::ParseError, "not a number: '" + tok + "'");
        long exp = 0;
        const auto* first = tok.data() + pos + 1;
        const auto* last = tok.data() + tok.size();
        if (first != last && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, exp);
        if (ec != std::errc{} || ptr != last) throw Error(ErrorCode::ParseError, "bad exponent in '" + tok + "'");
        scale += exp;
    }
    // A leading zero would make the string constructor read octal.
    const auto nonzero = digits.find_first_not_of('0');
    Rational value{BigInt(nonzero == std::string::npos ? std::string("0") : digits.substr(nonzero))};
    BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
    if (scale < 0) value /= Rational(ten_pow);
    else value *= Rational(ten_pow);
    return negative ? Rational(-value) : value;
}

}  // namespace detail

/// True when the literal holds a slash fraction, which forces rational mode.
inline bool has_fraction(std::string_view text) { return text.find('/') != std::string_view::npos; }

/// One scalar: "a/b" or a decimal.
template <Scalar T>
T parse_scalar(const std::string& raw) {
    const std::string tok = detail::trim(raw);
    if (tok.empty()) throw Error(ErrorCode::ParseError, "empty number");
    const auto slash = tok.find('/');
    if (slash != std::string::npos) {
        const Rational num = detail::parse_decimal(detail::trim(tok.substr(0, slash)));
        const Rational den = detail::parse_decimal(detail::trim(tok.substr(slash + 1)));
        if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + tok + "'");
        const Rational v = num / den;
        if constexpr (is_exact_v<T>) return v;
        else return to_double(v);
    }
    if constexpr (is_exact_v<T>) {
        return detail::parse_decimal(tok);
    } else {
        double v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw Error(ErrorCode::ParseError, "not a number: '" + tok + "'");
        return v;
    }
}

template <Scalar T>
std::vector<T> parse_scalar_list(std::string_view text) {
    std::vector<T> out;
    for (const auto& tok : detail::split(text, ',')) out.push_back(parse_scalar<T>(tok));
    return out;
}

/// Comma-separated decimals or slash fractions, e.g. "1/16,1/6,1/4,1/8,19/48".
template <Scalar T>
CouponDistribution<T> parse_distribution(std::string_view text) {
    return CouponDistribution<T>::validate(parse_scalar_list<T>(text));
}

/// Decimal, or hexadecimal with a 0x prefix.
inline std::uint64_t parse_seed(std::string_view raw) {
    const std::string s = detail::trim(raw);
    int base = 10;
    std::size_t off = 0;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        off = 2;
    }
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + off, s.data() + s.size(), v, base);
    if (s.size() == off || ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(ErrorCode::ParseError, "bad seed '" + s + "'");
    return v;
}

/// "4:5,2:5" -> {(4,5), (2,5)}.
inline std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (detail::trim(text).empty()) return out;
    for (const auto& tok : detail::split(text, ',')) {
        const auto parts = detail::split(tok, ':');
        if (parts.size() != 2) throw Error(ErrorCode::ParseError, "pair '" + tok + "' is not i:j");
        out.emplace_back(static_cast<std::size_t>(parse_seed(parts[0])), static_cast<std::size_t>(parse_seed(parts[1])));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalars

/// Shortest round-trip decimal for doubles, "a/b" for rationals.
inline std::string format_scalar(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline std::string format_scalar(const Rational& x) { return x.str(); }

template <Scalar T>
json scalar_to_json(const T& x) {
    if constexpr (is_exact_v<T>) return x.str();
    else return x;
}

template <Scalar T>
T scalar_from_json(const json& j) {
    if (j.is_string()) return parse_scalar<T>(j.get<std::string>());
    if constexpr (is_exact_v<T>) return from_double<T>(j.get<double>());
    else return j.get<double>();
}

template <Scalar T>
std::string format_vector(std::span<const T> v, std::string_view sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += format_scalar(v[i]);
    }
    return s;
}

template <Scalar T>
constexpr std::string_view mode_name() {
    return is_exact_v<T> ? "rational" : "float";
}

// ---------------------------------------------------------------------------
// Survival curves

template <Scalar T>
std::string curve_to_csv(const SurvivalCurve<T>& curve) {
    std::ostringstream os;
    os << "k,survival,cumulative\n";
    for (std::size_t k = 0; k < curve.values.size(); ++k)
        os << k << ',' << format_scalar(curve.values[k]) << ',' << format_scalar(curve.cumulative(k)) << '\n';
    return os.str();
}

template <Scalar T>
json curve_to_json(const SurvivalCurve<T>& curve) {
    json values = json::array();
    for (const auto& v : curve.values) values.push_back(scalar_to_json(v));
    return {{"c", curve.c},
            {"values", values},
            {"tail_rate", scalar_to_json(curve.tail_rate)},
            {"truncation_k", curve.truncation_k},
            {"tail_bound_at_K", scalar_to_json(curve.tail_bound_at_K)},
            {"mode", mode_name<T>()}};
}

template <Scalar T>
SurvivalCurve<T> curve_from_json(const json& j) {
    SurvivalCurve<T> curve;
    curve.c = j.at("c").get<std::size_t>();
    for (const auto& v : j.at("values")) curve.values.push_back(scalar_from_json<T>(v));
    curve.tail_rate = scalar_from_json<T>(j.at("tail_rate"));
    curve.truncation_k = j.at("truncation_k").get<std::size_t>();
    curve.tail_bound_at_K = scalar_from_json<T>(j.at("tail_bound_at_K"));
    return curve;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimates

inline std::string mc_to_csv(std::span<const McEstimate> rows) {
    std::ostringstream os;
    os << "k,estimate,ci_low,ci_high,replicates,seed\n";
    for (const auto& r : rows)
        os << r.k << ',' << format_scalar(r.estimate) << ',' << format_scalar(r.ci_low()) << ','
           << format_scalar(r.ci_high()) << ',' << r.replicates << ',' << r.seed << '\n';
    return os.str();
}

inline json mc_to_json(std::span<const McEstimate> rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back({{"k", r.k},
                       {"estimate", r.estimate},
                       {"half_width", r.half_width},
                       {"ci_low", r.ci_low()},
                       {"ci_high", r.ci_high()},
                       {"replicates", r.replicates},
                       {"seed", r.seed}});
    return arr;
}

// ---------------------------------------------------------------------------
// Verdicts

inline json verdict_to_json(const DominanceVerdict& v) {
    return {{"relation", to_string(v.relation)},
            {"witness_k", v.witness_k ? json(*v.witness_k) : json(nullptr)},
            {"checked_up_to", v.checked_up_to},
            {"residual_bound", v.residual_bound}};
}

inline DominanceVerdict verdict_from_json(const json& j) {
    DominanceVerdict v;
    v.relation = relation_from_string(j.at("relation").get<std::string>());
    if (!j.at("witness_k").is_null()) v.witness_k = j.at("witness_k").get<std::size_t>();
    v.checked_up_to = j.at("checked_up_to").get<std::size_t>();
    v.residual_bound = j.at("residual_bound").get<double>();
    return v;
}

// ---------------------------------------------------------------------------
// Transform traces

template <Scalar T>
json trace_to_json(const TransformTrace<T>& trace) {
    auto vec = [](const CouponDistribution<T>& p) {
        json a = json::array();
        for (const auto& x : p.entries()) a.push_back(scalar_to_json(x));
        return a;
    };
    json steps = json::array();
    for (const auto& s : trace.steps)
        steps.push_back({{"i", s.index_i}, {"j", s.index_j}, {"lambda", scalar_to_json(s.lambda)}, {"result", vec(s.result)}});
    return {{"mode", mode_name<T>()}, {"start", vec(trace.start)}, {"steps", steps}};
}

template <Scalar T>
std::string trace_to_csv(const TransformTrace<T>& trace) {
    std::ostringstream os;
    os << "step,i,j,lambda";
    for (std::size_t m = 1; m <= trace.start.size(); ++m) os << ",p" << m;
    os << '\n' << "0,,,," << format_vector(trace.start.entries()) << '\n';
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& s = trace.steps[t];
        os << t + 1 << ',' << s.index_i << ',' << s.index_j << ',' << format_scalar(s.lambda) << ','
           << format_vector(s.result.entries()) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Simulator configuration and report
//
// Config schema:
//   {
//     "n": 5, "c": 3, "theta": 0.05, "p0": 0.1,
//     "horizon": 100000, "seed": 7 | "0x7", "global_threshold": 0.2, "warmup": 0,
//     "routers": [
//       {"preset": "uniform"},
//       {"preset": "extremal", "j": 1, "timer_k": 40},
//       {"entries": [0.1, 0.2, 0.3, 0.2, 0.1], "c": 2, "timer": "auto", "delta": 0.01}
//     ],
//     "injection": {"slot": 5000, "signature": 2, "routers": [0, 1], "boost": 0.05}
//   }
// Router fields default to the top-level c; presets need n, theta and p0.
// "timer": "auto" dimensions the timer for the router's c at the given delta.

inline SimConfig sim_config_from_json(const json& j) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
    try {
        SimConfig cfg;
        cfg.horizon = j.at("horizon").get<std::uint64_t>();
        cfg.global_threshold = j.at("global_threshold").get<double>();
        cfg.theta = j.at("theta").get<double>();
        const auto& seed = j.at("seed");
        cfg.seed = seed.is_string() ? parse_seed(seed.get<std::string>()) : seed.get<std::uint64_t>();
        cfg.warmup = j.value("warmup", std::uint64_t{0});
        // 0 and a negative p0 stand for "not given".
        const std::size_t n = j.value("n", std::size_t{0});
        const double p0 = j.value("p0", -1.0);
        const std::size_t c = j.value("c", std::size_t{0});

        for (const auto& r : j.at("routers")) {
            std::optional<CouponDistribution<double>> dist;
            if (r.contains("entries")) {
                std::vector<double> e;
                for (const auto& x : r["entries"]) e.push_back(scalar_from_json<double>(x));
                dist = CouponDistribution<double>::validate(std::move(e));
            } else {
                const std::string preset = r.at("preset").get<std::string>();
                if (n == 0 || p0 < 0) fail("presets need top-level n and p0");
                if (preset == "uniform") {
                    dist = almost_uniform(n, p0);
                } else if (preset == "extremal") {
                    dist = extremal_member(ThetaFamily<double>::make(n, p0, cfg.theta), r.value("j", std::size_t{1}));
                } else {
                    fail("unknown preset '" + preset + "'");
                }
            }
            RouterConfig rc{*dist, r.contains("c") ? r["c"].get<std::size_t>() : c, std::nullopt};
            if (rc.c == 0) fail("router needs c (per router or top level)");
            if (r.contains("timer_k")) {
                rc.timer_k = r["timer_k"].get<std::size_t>();
            } else if (r.value("timer", std::string{}) == "auto") {
                if (p0 < 0) fail("\"timer\": \"auto\" needs top-level p0");
                rc.timer_k = dimension_timer<double>(rc.distribution.size(), rc.c, cfg.theta, p0, r.at("delta").get<double>());
            }
            cfg.routers.push_back(std::move(rc));
        }
        if (j.contains("injection") && !j["injection"].is_null()) {
            const auto& ij = j["injection"];
            cfg.injection = Injection{ij.at("slot").get<std::uint64_t>(), ij.at("signature").get<std::size_t>(),
                                      ij.at("routers").get<std::vector<std::size_t>>(), ij.at("boost").get<double>()};
        }
        validate(cfg);
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
}

/// Presets are written out as explicit entries so the result re-parses to an
/// equal configuration.
inline json sim_config_to_json(const SimConfig& cfg) {
    json routers = json::array();
    for (const auto& r : cfg.routers) {
        json e = json::array();
        for (double x : r.distribution.entries()) e.push_back(x);
        json rj = {{"entries", e}, {"c", r.c}};
        if (r.timer_k) rj["timer_k"] = *r.timer_k;
        routers.push_back(rj);
    }
    json j = {{"n", cfg.routers.empty() ? 0 : cfg.routers.front().distribution.size()},
              {"theta", cfg.theta},
              {"horizon", cfg.horizon},
              {"seed", cfg.seed},
              {"global_threshold", cfg.global_threshold},
              {"warmup", cfg.warmup},
              {"routers", routers}};
    if (cfg.injection) {
        const auto& inj = *cfg.injection;
        j["injection"] = {{"slot", inj.slot}, {"signature", inj.signature}, {"routers", inj.routers}, {"boost", inj.boost}};
    }
    return j;
}

inline json sim_report_to_json(const SimReport& rep) {
    json alarms = json::array();
    for (const auto& a : rep.alarms) alarms.push_back({{"signature", a.signature}, {"slot", a.slot}});
    return {{"inter_flush", rep.inter_flush},
            {"timer_firings", rep.timer_firings},
            {"timer_firing_count", rep.timer_firing_count},
            {"alarms", alarms},
            {"message_count", rep.message_count},
            {"detection_latency", rep.detection_latency},
            {"server_counts", rep.server_counts},
            {"server_slots", rep.server_slots},
            {"non_null_draws", rep.non_null_draws},
            {"pending_draws", rep.pending_draws}};
}

inline SimReport sim_report_from_json(const json& j) {
    SimReport rep;
    rep.inter_flush = j.at("inter_flush").get<std::vector<std::vector<std::uint64_t>>>();
    rep.timer_firings = j.at("timer_firings").get<std::vector<std::uint64_t>>();
    rep.timer_firing_count = j.at("timer_firing_count").get<std::uint64_t>();
    for (const auto& a : j.at("alarms"))
        rep.alarms.push_back({a.at("signature").get<std::size_t>(), a.at("slot").get<std::uint64_t>()});
    rep.message_count = j.at("message_count").get<std::uint64_t>();
    rep.detection_latency = j.at("detection_latency").get<std::vector<std::uint64_t>>();
    rep.server_counts = j.at("server_counts").get<std::vector<std::uint64_t>>();
    rep.server_slots = j.at("server_slots").get<std::uint64_t>();
    rep.non_null_draws = j.at("non_null_draws").get<std::uint64_t>();
    rep.pending_draws = j.at("pending_draws").get<std::uint64_t>();
    return rep;
}

/// One row per inter-flush sample: router,index,slots.
inline std::string inter_flush_csv(const SimReport& rep) {
    std::ostringstream os;
    os << "router,index,slots\n";
    for (std::size_t r = 0; r < rep.inter_flush.size(); ++r)
        for (std::size_t i = 0; i < rep.inter_flush[r].size(); ++i) os << r << ',' << i << ',' << rep.inter_flush[r][i] << '\n';
    return os.str();
}

}  // namespace cct
