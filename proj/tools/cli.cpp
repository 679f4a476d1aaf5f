#include "cli.hpp"

#include "cct/cct.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cct::cli {
namespace {

struct Options {
    std::string p, q, p0, theta, lambda, pairs, seed = "0x5eed";
    std::string method = "exact", mode, format = "csv", kind;
    std::string config, out_path, samples_out;
    std::optional<std::size_t> c, kmax, n, i, j;
    std::optional<double> delta, tol;
    std::uint64_t replicates = 100000;
};

enum class Mode { Float, Rational };

Mode resolve_mode(const Options& o) {
    if (o.mode == "rational") return Mode::Rational;
    if (o.mode == "float") return Mode::Float;
    for (const auto* s : {&o.p, &o.q, &o.p0, &o.theta, &o.lambda})
        if (has_fraction(*s)) return Mode::Rational;
    return Mode::Float;
}

template <class Fn>
void with_mode(const Options& o, Fn&& fn) {
    if (resolve_mode(o) == Mode::Rational) fn.template operator()<Rational>();
    else fn.template operator()<double>();
}

void need(bool ok, const std::string& what) {
    if (!ok) throw CLI::ValidationError(what);
}

/// --p, checked against --p0 when both are given.
template <Scalar T>
CouponDistribution<T> distribution_arg(const std::string& text, const std::string& p0_text) {
    auto p = parse_distribution<T>(text);
    if (!p0_text.empty()) {
        const T given = parse_scalar<T>(p0_text);
        T diff = given - p.null_mass();
        if (diff < T(0)) diff = -diff;
        if (diff > tolerance<T>())
            throw Error(ErrorCode::MassMismatch, "--p0 " + p0_text + " disagrees with the implied null mass " +
                                                     format_scalar(p.null_mass()));
    }
    return p;
}

bool as_json(const Options& o) { return o.format == "json"; }

template <Scalar T>
void print_vector(std::ostream& out, const Options& o, const CouponDistribution<T>& p) {
    if (as_json(o)) {
        json a = json::array();
        for (const auto& x : p.entries()) a.push_back(scalar_to_json(x));
        out << json{{"entries", a}, {"p0", scalar_to_json(p.null_mass())}, {"mode", mode_name<T>()}}.dump(2) << '\n';
    } else {
        out << format_vector(p.entries()) << '\n';
    }
}

void run_dist(const Options& o, std::ostream& out) {
    need(!o.p.empty() && o.c, "dist needs --p and --c");
    need(o.kmax || o.delta, "dist needs --kmax or --delta");
    with_mode(o, [&]<Scalar T>() {
        const auto p = distribution_arg<T>(o.p, o.p0);
        const std::size_t c = *o.c;
        if (o.method == "mc") {
            need(o.kmax.has_value(), "--method mc needs --kmax");
            const auto rows = mc_survival_curve(p, c, *o.kmax, o.replicates, parse_seed(o.seed));
            if (as_json(o)) out << mc_to_json(rows).dump(2) << '\n';
            else out << mc_to_csv(rows);
            return;
        }
        SurvivalCurve<T> curve;
        if (o.method == "exact") {
            curve = o.kmax ? survival_curve_to(p, c, *o.kmax) : survival_curve(p, c, *o.delta);
        } else {
            need(o.kmax.has_value(), "--method " + o.method + " needs --kmax");
            std::vector<T> values;
            if (o.method == "markov") {
                values = survival_markov_range(p, c, *o.kmax);
            } else if (o.method == "composition") {
                for (std::size_t k = 0; k <= *o.kmax; ++k) values.push_back(survival_by_compositions(p, c, k));
            } else if (o.method == "decomposition") {
                for (std::size_t k = 0; k <= *o.kmax; ++k) values.push_back(survival_by_decomposition(p, c, k));
            } else if (o.method == "enumeration") {
                const auto law = distinct_count_law(p, *o.kmax);
                for (std::size_t k = 0; k <= *o.kmax; ++k) {
                    Accumulator<T> acc;
                    for (std::size_t u = 0; u < c; ++u) acc += law[k][u];
                    values.push_back(acc.value());
                }
            } else {
                need(false, "unknown --method " + o.method);
            }
            curve = curve_from_values(p, c, std::move(values));
        }
        if (as_json(o)) out << curve_to_json(curve).dump(2) << '\n';
        else out << curve_to_csv(curve);
    });
}

void run_expect(const Options& o, std::ostream& out) {
    need(!o.p.empty() && o.c, "expect needs --p and --c");
    with_mode(o, [&]<Scalar T>() {
        const auto p = distribution_arg<T>(o.p, o.p0);
        const T e = expectation(p, *o.c);
        if (!as_json(o)) {
            out << format_scalar(e) << '\n';
            return;
        }
        json j{{"expectation", scalar_to_json(e)}, {"mode", mode_name<T>()}};
        if (p.size() >= 2) {
            const auto s = expectation_sandwich(p, *o.c);
            j["sandwich"] = {{"uniform", scalar_to_json(s[0])},
                             {"almost_uniform", scalar_to_json(s[1])},
                             {"p", scalar_to_json(s[2])}};
        }
        out << j.dump(2) << '\n';
    });
}

void run_quantile(const Options& o, std::ostream& out) {
    need(!o.p.empty() && o.c && o.delta, "quantile needs --p, --c and --delta");
    with_mode(o, [&]<Scalar T>() {
        const auto p = distribution_arg<T>(o.p, o.p0);
        const std::size_t k = quantile(p, *o.c, *o.delta);
        if (as_json(o)) out << json{{"k", k}, {"delta", *o.delta}}.dump(2) << '\n';
        else out << k << '\n';
    });
}

void run_compare(const Options& o, std::ostream& out) {
    need(!o.p.empty() && !o.q.empty() && o.c, "compare needs --p, --q and --c");
    with_mode(o, [&]<Scalar T>() {
        const auto a = parse_distribution<T>(o.p);
        const auto b = parse_distribution<T>(o.q);
        const double tol = o.tol.value_or(default_compare_tol<T>());
        const double tail = tol > 0 ? tol : 1e-9;
        auto [ca, cb] = paired_curves(a, b, *o.c, tail);
        const auto v = stochastic_compare(ca, cb, tol, tail);
        if (as_json(o)) {
            out << verdict_to_json(v).dump(2) << '\n';
        } else {
            out << "relation,witness_k,checked_up_to,residual_bound\n"
                << to_string(v.relation) << ',' << (v.witness_k ? std::to_string(*v.witness_k) : std::string{})
                << ',' << v.checked_up_to << ',' << format_scalar(v.residual_bound) << '\n';
        }
    });
}

void run_transform(const Options& o, std::ostream& out) {
    need(!o.p.empty(), "transform needs --p");
    with_mode(o, [&]<Scalar T>() {
        const auto p = distribution_arg<T>(o.p, o.p0);
        TransformTrace<T> trace{p, {}};
        if (o.kind == "uniformize") {
            const auto pairs = parse_pairs(o.pairs);
            trace = uniformize_trace(p, std::span<const std::pair<std::size_t, std::size_t>>(pairs));
        } else if (o.kind == "maximize") {
            need(!o.theta.empty() && o.j, "transform maximize needs --theta and --j");
            trace = maximize_trace(p, parse_scalar<T>(o.theta), *o.j);
        } else if (o.kind == "mix") {
            need(o.i && o.j && !o.lambda.empty(), "transform mix needs --i, --j and --lambda");
            const T lambda = parse_scalar<T>(o.lambda);
            trace.steps.push_back({*o.i, *o.j, lambda, lambda_transform(p, *o.i, *o.j, lambda)});
        } else {
            need(false, "transform kind must be uniformize, maximize or mix");
        }
        if (as_json(o)) out << trace_to_json(trace).dump(2) << '\n';
        else out << trace_to_csv(trace);
    });
}

void run_extremal(const Options& o, std::ostream& out) {
    need(o.n && !o.theta.empty() && !o.p0.empty(), "extremal needs --n, --theta and --p0");
    with_mode(o, [&]<Scalar T>() {
        const auto family = ThetaFamily<T>::make(*o.n, parse_scalar<T>(o.p0), parse_scalar<T>(o.theta));
        print_vector(out, o, extremal_member(family, o.j.value_or(1)));
    });
}

void run_timer(const Options& o, std::ostream& out) {
    need(o.n && o.c && !o.theta.empty() && !o.p0.empty() && o.delta,
         "timer needs --n, --c, --theta, --p0 and --delta");
    with_mode(o, [&]<Scalar T>() {
        const std::size_t k = dimension_timer<T>(*o.n, *o.c, parse_scalar<T>(o.theta), parse_scalar<T>(o.p0), *o.delta);
        if (as_json(o)) out << json{{"timer_k", k}}.dump(2) << '\n';
        else out << k << '\n';
    });
}

void run_simulate(const Options& o, std::ostream& out, bool seed_given) {
    need(!o.config.empty(), "simulate needs --config");
    std::ifstream in(o.config);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read " + o.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    auto cfg = sim_config_from_json(j);
    if (seed_given) cfg.seed = parse_seed(o.seed);
    const auto rep = run_simulation(cfg);
    const std::string report = sim_report_to_json(rep).dump(2) + "\n";
    if (!o.samples_out.empty()) {
        std::ofstream s(o.samples_out);
        if (!s) throw Error(ErrorCode::ConfigInvalid, "cannot write " + o.samples_out);
        s << inter_flush_csv(rep);
    }
    if (!o.out_path.empty()) {
        std::ofstream f(o.out_path);
        if (!f) throw Error(ErrorCode::ConfigInvalid, "cannot write " + o.out_path);
        f << report;
    }
    if (o.format == "csv" && o.out_path.empty()) out << inter_flush_csv(rep);
    else if (o.out_path.empty()) out << report;
}

int run_verify(const Options& o, std::ostream& out) {
    const auto results = run_dominance_suites(parse_seed(o.seed));
    bool ok = true;
    json arr = json::array();
    if (!as_json(o)) out << "suite,instances,failures,status\n";
    for (const auto& r : results) {
        ok = ok && r.passed();
        if (as_json(o)) {
            arr.push_back({{"suite", r.name},
                           {"instances", r.instances},
                           {"failures", r.failures},
                           {"passed", r.passed()},
                           {"counterexamples", r.counterexamples}});
        } else {
            out << r.name << ',' << r.instances << ',' << r.failures << ',' << (r.passed() ? "PASS" : "FAIL") << '\n';
        }
    }
    if (as_json(o)) out << json{{"seed", parse_seed(o.seed)}, {"passed", ok}, {"suites", arr}}.dump(2) << '\n';
    return ok ? kOk : kDomainError;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cct: waiting times for collecting c distinct coupons with a null coupon", "cct"};
    app.require_subcommand(1, 1);
    Options o;

    auto add_p = [&](CLI::App* sub) { sub->add_option("--p", o.p, "entries p1..pn, decimals or fractions"); };
    auto add_p0 = [&](CLI::App* sub) { sub->add_option("--p0", o.p0, "null mass (implied by --p when omitted)"); };
    auto add_c = [&](CLI::App* sub) { sub->add_option("--c", o.c, "number of distinct coupons to collect"); };
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--mode", o.mode, "arithmetic mode")->check(CLI::IsMember({"float", "rational"}));
        sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "seed, decimal or 0x hex"); };

    auto* dist = app.add_subcommand("dist", "survival curve Pr{T > k}");
    add_p(dist), add_p0(dist), add_c(dist), add_common(dist), add_seed(dist);
    dist->add_option("--kmax", o.kmax, "last k to evaluate");
    dist->add_option("--delta", o.delta, "truncate once the tail bound is below delta");
    dist->add_option("--method", o.method, "evaluation route")
        ->check(CLI::IsMember({"exact", "markov", "mc", "composition", "decomposition", "enumeration"}));
    dist->add_option("--replicates", o.replicates, "Monte-Carlo replicates");

    auto* expect = app.add_subcommand("expect", "expected collection time");
    add_p(expect), add_p0(expect), add_c(expect), add_common(expect);

    auto* quant = app.add_subcommand("quantile", "smallest k with Pr{T > k} <= delta");
    add_p(quant), add_p0(quant), add_c(quant), add_common(quant);
    quant->add_option("--delta", o.delta, "tail probability");

    auto* compare = app.add_subcommand("compare", "stochastic order between two laws");
    add_p(compare), add_c(compare), add_common(compare);
    compare->add_option("--q", o.q, "second distribution");
    compare->add_option("--tol", o.tol, "pointwise tolerance");

    auto* transform = app.add_subcommand("transform", "mixing traces: uniformize, maximize, mix");
    add_p(transform), add_p0(transform), add_common(transform);
    transform->add_option("kind", o.kind, "uniformize | maximize | mix")->required();
    transform->add_option("--pairs", o.pairs, "explicit uniformizing pairs, e.g. 4:5,2:5");
    transform->add_option("--theta", o.theta, "probability floor");
    transform->add_option("--i", o.i, "first position (mix)");
    transform->add_option("--j", o.j, "second position (mix) or gamma position (maximize)");
    transform->add_option("--lambda", o.lambda, "mixing weight (mix)");

    auto* extremal = app.add_subcommand("extremal", "extremal member of B_theta");
    add_p0(extremal), add_common(extremal);
    extremal->add_option("--n", o.n, "number of coupons");
    extremal->add_option("--theta", o.theta, "probability floor");
    extremal->add_option("--j", o.j, "position holding gamma (default 1)");

    auto* timer = app.add_subcommand("timer", "worst-case flush deadline");
    add_p0(timer), add_c(timer), add_common(timer);
    timer->add_option("--n", o.n, "number of coupons");
    timer->add_option("--theta", o.theta, "probability floor");
    timer->add_option("--delta", o.delta, "allowed probability of no flush by the deadline");

    auto* simulate = app.add_subcommand("simulate", "run the iceberg detection simulator");
    add_common(simulate), add_seed(simulate);
    simulate->add_option("--config", o.config, "SimConfig JSON file");
    simulate->add_option("--out", o.out_path, "write the SimReport JSON here");
    simulate->add_option("--samples-out", o.samples_out, "write inter-flush samples CSV here");

    auto* verify = app.add_subcommand("verify", "randomized dominance suites");
    add_common(verify), add_seed(verify);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    try {
        if (dist->parsed()) run_dist(o, out);
        else if (expect->parsed()) run_expect(o, out);
        else if (quant->parsed()) run_quantile(o, out);
        else if (compare->parsed()) run_compare(o, out);
        else if (transform->parsed()) run_transform(o, out);
        else if (extremal->parsed()) run_extremal(o, out);
        else if (timer->parsed()) run_timer(o, out);
        else if (simulate->parsed()) run_simulate(o, out, simulate->count("--seed") > 0);
        else if (verify->parsed()) return run_verify(o, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
    return kOk;
}

}  // namespace cct::cli
