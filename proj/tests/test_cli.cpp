#include "cli.hpp"
#include "cct/cct.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "cct");
    std::ostringstream out, err;
    const int code = cct::cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

std::string column(const std::string& row, std::size_t index) {
    std::istringstream is(row);
    std::string cell;
    for (std::size_t i = 0; i <= index; ++i) std::getline(is, cell, ',');
    return cell;
}

}  // namespace

TEST_CASE("dist prints the exact curve") {
    const auto r = run({"dist", "--p", "1/2,1/2", "--c", "2", "--kmax", "5", "--method", "exact"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "k,survival,cumulative");
    const double want[] = {1, 1, 0.5, 0.25, 0.125, 0.0625};
    for (std::size_t k = 0; k <= 5; ++k)
        CHECK(cct::to_double(cct::parse_scalar<cct::Rational>(column(rows[k + 1], 1))) == want[k]);

    const auto f = run({"dist", "--p", "0.5,0.5", "--c", "2", "--kmax", "5"});
    REQUIRE(f.code == 0);
    CHECK(column(lines(f.out)[3], 1) == "0.5");
}

TEST_CASE("dist routes agree") {
    std::vector<std::string> outs;
    for (std::string m : {"exact", "markov", "composition", "decomposition", "enumeration"}) {
        const auto r = run({"dist", "--p", "1/2,3/10", "--c", "2", "--kmax", "4", "--method", m});
        REQUIRE(r.code == 0);
        outs.push_back(r.out);
    }
    for (const auto& o : outs) CHECK(o == outs.front());
}

TEST_CASE("dist with delta and json") {
    const auto r = run({"dist", "--p", "0.55,0.25", "--c", "2", "--delta", "1e-6", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["mode"] == "float");
    CHECK(j["tail_bound_at_K"].get<double>() < 1e-6);
}

TEST_CASE("dist Monte Carlo is reproducible") {
    const std::vector<std::string> args{"dist", "--p", "0.5,0.5", "--c", "2", "--kmax", "6", "--method", "mc",
                                        "--replicates", "5000", "--seed", "0x1f"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out)[0] == "k,estimate,ci_low,ci_high,replicates,seed");
    CHECK(column(lines(a.out)[1], 5) == "31");
}

TEST_CASE("timer, quantile, expect, extremal") {
    CHECK(run({"timer", "--n", "2", "--c", "2", "--theta", "0.25", "--p0", "0.2", "--delta", "0.1"}).out == "9\n");
    CHECK(run({"quantile", "--p", "1/2,1/2", "--c", "2", "--delta", "0.05"}).out == "6\n");
    CHECK(run({"expect", "--p", "1/4,1/4,1/4,1/4", "--c", "4"}).out == "25/3\n");
    CHECK(run({"extremal", "--n", "5", "--theta", "1/20", "--p0", "1/10", "--j", "4"}).out ==
          "1/20,1/20,1/20,7/10,1/20\n");
    const auto e = run({"expect", "--p", "0.5,0.3", "--c", "2", "--format", "json"});
    REQUIRE(e.code == 0);
    CHECK(nlohmann::json::parse(e.out).contains("sandwich"));
}

TEST_CASE("transform traces") {
    const auto u = run({"transform", "uniformize", "--p", "1/16,1/6,1/4,1/8,19/48", "--pairs", "4:5,2:5,1:3,3:5"});
    REQUIRE(u.code == 0);
    const auto rows = lines(u.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[2] == "1,4,5,47/65,1/16,1/6,1/4,1/5,77/240");
    CHECK(rows[3] == "2,2,5,29/37,1/16,1/5,1/4,1/5,23/80");
    CHECK(rows[4] == "3,1,3,4/15,1/5,1/5,9/80,1/5,23/80");
    CHECK(rows[5] == "4,3,5,1/2,1/5,1/5,1/5,1/5,1/5");

    const auto m = run({"transform", "maximize", "--p", "1/16,1/6,1/4,1/8,71/240", "--theta", "1/20", "--j", "4"});
    REQUIRE(m.code == 0);
    CHECK(lines(m.out).back() == "4,5,4,97/156,1/20,1/20,1/20,7/10,1/20");

    const auto x = run({"transform", "mix", "--p", "0.3,0.5", "--i", "1", "--j", "2", "--lambda", "0.5"});
    REQUIRE(x.code == 0);
    CHECK(lines(x.out).back() == "1,1,2,0.5,0.4,0.4");
}

TEST_CASE("compare") {
    const auto r = run({"compare", "--p", "0.25,0.25,0.25,0.25", "--q", "0.7,0.1,0.1,0.1", "--c", "2"});
    REQUIRE(r.code == 0);
    CHECK(column(lines(r.out)[1], 0) == "left_st_smaller");
    const auto j = run({"compare", "--p", "1/2,1/2", "--q", "1/2,1/2", "--c", "2", "--format", "json"});
    REQUIRE(j.code == 0);
    CHECK(nlohmann::json::parse(j.out)["relation"] == "equal");
}

TEST_CASE("simulate writes report and samples") {
    const std::string out_path = "cli_test_report.json";
    const std::string samples_path = "cli_test_samples.csv";
    const auto r = run({"simulate", "--config", std::string(CCT_CONFIG_DIR) + "/sim_extremal_timer.json", "--out",
                        out_path, "--samples-out", samples_path});
    REQUIRE(r.code == 0);
    std::ifstream rep(out_path);
    const auto j = nlohmann::json::parse(rep);
    CHECK(j["inter_flush"].size() == 3);
    CHECK(j["detection_latency"].size() == 1);
    std::ifstream samples(samples_path);
    std::string header;
    std::getline(samples, header);
    CHECK(header == "router,index,slots");
    std::remove(out_path.c_str());
    std::remove(samples_path.c_str());

    const auto again = run({"simulate", "--config", std::string(CCT_CONFIG_DIR) + "/sim_uniform.json", "--seed",
                            "12", "--format", "json"});
    REQUIRE(again.code == 0);
    CHECK(again.out == run({"simulate", "--config", std::string(CCT_CONFIG_DIR) + "/sim_uniform.json", "--seed",
                            "12", "--format", "json"})
                           .out);
}

TEST_CASE("exit codes") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"dist", "--p", "0.5,0.5", "--c", "2", "--kmax", "3", "--unknown"}).code == 2);
    CHECK(run({"dist", "--p", "0.5,0.5", "--kmax", "3"}).code == 2);
    CHECK(run({"dist", "--p", "0.5,0.5", "--c", "2", "--kmax", "3", "--format", "xml"}).code == 2);

    const auto d = run({"expect", "--p", "0.7,0.4", "--c", "1"});
    CHECK(d.code == 1);
    CHECK(d.err.find("MassExceedsOne") != std::string::npos);
    CHECK(run({"expect", "--p", "0.5,0.3", "--p0", "0.3", "--c", "1"}).code == 1);
    CHECK(run({"expect", "--p", "0.5,0.3", "--p0", "0.2", "--c", "1"}).code == 0);
    CHECK(run({"quantile", "--p", "0.5,0.5", "--c", "2", "--delta", "2"}).code == 1);
    CHECK(run({"simulate", "--config", "/nonexistent.json"}).code == 1);
}

TEST_CASE("verify runs the dominance suites") {
    const auto r = run({"verify"});
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(column(rows[i], 3) == "PASS");
}
