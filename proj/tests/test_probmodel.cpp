#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace cct;
using cct::test::fdist;
using cct::test::Q;
using cct::test::qdist;

TEST_CASE("validate derives the null mass") {
    CHECK(fdist({0.5, 0.3}).null_mass() == Catch::Approx(0.2));
    CHECK(fdist({0.25, 0.25, 0.25, 0.25}).null_mass() == 0.0);
    CHECK(qdist({Q(1, 2), Q(1, 3)}).null_mass() == Q(1, 6));
}

TEST_CASE("validate rejects malformed vectors") {
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("no error raised");
        return ErrorCode::ParseError;
    };
    CHECK(code_of([] { fdist({0.7, 0.4}); }) == ErrorCode::MassExceedsOne);
    CHECK(code_of([] { fdist({}); }) == ErrorCode::EmptyVector);
    CHECK(code_of([] { fdist({0.5, 0.0}); }) == ErrorCode::NonPositiveEntry);
    CHECK(code_of([] { fdist({1.0}); }) == ErrorCode::EntryAtLeastOne);
}

TEST_CASE("normalize divides by 1 - p0") {
    CHECK(approx_equal(normalize(fdist({0.4, 0.4})), fdist({0.5, 0.5})));
    CHECK(normalize(fdist({0.5, 0.5})) == fdist({0.5, 0.5}));
    const auto q = qdist({Q(1, 20), Q(1, 20), Q(1, 20), Q(7, 10), Q(1, 20)});
    CHECK(normalize(q) == qdist({Q(1, 18), Q(1, 18), Q(1, 18), Q(7, 9), Q(1, 18)}));
    CHECK(normalize(q).null_mass() == 0);
}

TEST_CASE("majorization") {
    CHECK(majorizes(fdist({0.7, 0.1, 0.1, 0.1}), fdist({0.25, 0.25, 0.25, 0.25})));
    CHECK_FALSE(majorizes(fdist({0.25, 0.25, 0.25, 0.25}), fdist({0.7, 0.1, 0.1, 0.1})));
    CHECK(majorizes(fdist({0.5, 0.3, 0.2}), fdist({0.4, 0.4, 0.2})));
    CHECK(majorizes(fdist({0.5, 0.3, 0.2}), fdist({0.5, 0.3, 0.2})));
    CHECK_THROWS_AS(majorizes(fdist({0.5, 0.5}), fdist({0.3, 0.3, 0.4})), Error);
    CHECK_THROWS_AS(majorizes(fdist({0.5, 0.3}), fdist({0.5, 0.5})), Error);
}

TEST_CASE("lambda_transform") {
    const auto p = qdist("1/16,1/6,1/4,1/8,19/48");
    CHECK(lambda_transform(p, 4, 5, Q(47, 65)) == qdist("1/16,1/6,1/4,1/5,77/240"));
    CHECK(lambda_transform(p, 2, 3, Q(1)) == p);
    CHECK(approx_equal(lambda_transform(fdist({0.3, 0.5}), 1, 2, 0.5), fdist({0.4, 0.4})));
    CHECK_THROWS_AS(lambda_transform(p, 2, 2, Q(1, 2)), Error);
    CHECK_THROWS_AS(lambda_transform(p, 0, 2, Q(1, 2)), Error);
    CHECK_THROWS_AS(lambda_transform(p, 1, 2, Q(3, 2)), Error);
}

TEST_CASE("uniformize_trace reproduces the worked example with its pairs") {
    const auto p = qdist("1/16,1/6,1/4,1/8,19/48");
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{4, 5}, {2, 5}, {1, 3}, {3, 5}};
    const auto trace = uniformize_trace(p, std::span<const std::pair<std::size_t, std::size_t>>(pairs));
    REQUIRE(trace.steps.size() == 4);
    CHECK(trace.steps[0].result == qdist("1/16,1/6,1/4,1/5,77/240"));
    CHECK(trace.steps[1].result == qdist("1/16,1/5,1/4,1/5,69/240"));
    CHECK(trace.steps[2].result == qdist("1/5,1/5,9/80,1/5,69/240"));
    CHECK(trace.steps[3].result == qdist("1/5,1/5,1/5,1/5,1/5"));
    CHECK(trace.steps[0].lambda == Q(47, 65));
    for (const auto& s : trace.steps) {
        const auto& before = &s == &trace.steps.front() ? trace.start : (&s - 1)->result;
        CHECK(lambda_transform(before, s.index_i, s.index_j, s.lambda) == s.result);
    }
}

TEST_CASE("uniformize_trace default rule and edge cases") {
    const auto p = qdist("1/16,1/6,1/4,1/8,19/48");
    const auto trace = uniformize_trace(p);
    CHECK(trace.steps.size() <= 4);
    CHECK(trace.final_vector() == qdist("1/5,1/5,1/5,1/5,1/5"));
    CHECK(uniformize_trace(qdist("1/4,1/4,1/4,1/4")).steps.empty());
    CHECK(uniformize_trace(fdist({0.4, 0.4})).steps.empty());

    const std::vector<std::pair<std::size_t, std::size_t>> bad{{5, 4}};
    CHECK_THROWS_AS(uniformize_trace(p, std::span<const std::pair<std::size_t, std::size_t>>(bad)), Error);

    const auto f = uniformize_trace(fdist({0.05, 0.1, 0.2, 0.35, 0.1}));
    CHECK(f.steps.size() <= 4);
    for (double x : f.final_vector().entries()) CHECK(x == Catch::Approx(0.16).margin(1e-12));
}

TEST_CASE("theta families") {
    const auto fam = ThetaFamily<Rational>::make(5, Q(1, 10), Q(1, 20));
    CHECK(fam.gamma == Q(7, 10));
    CHECK(extremal_member(fam, 4) == qdist("1/20,1/20,1/20,7/10,1/20"));
    CHECK(approx_equal(extremal_member(ThetaFamily<double>::make(2, 0.2, 0.25), 1), fdist({0.55, 0.25})));

    const auto flat = ThetaFamily<Rational>::make(3, Q(1, 10), Q(3, 10));
    CHECK(extremal_member(flat, 2) == almost_uniform(3, Q(1, 10)));

    CHECK_THROWS_AS(ThetaFamily<double>::make(2, 0.2, 0.5), Error);
    CHECK_THROWS_AS(ThetaFamily<double>::make(2, 0.2, 0.0), Error);
    CHECK_THROWS_AS(extremal_member(fam, 6), Error);
}

TEST_CASE("almost_uniform") {
    CHECK(almost_uniform(5, Q(0)) == qdist("1/5,1/5,1/5,1/5,1/5"));
    CHECK(approx_equal(almost_uniform(2, 0.2), fdist({0.4, 0.4})));
    CHECK(approx_equal(almost_uniform(3, 0.1), fdist({0.3, 0.3, 0.3})));
}

TEST_CASE("maximize_trace reproduces the worked example") {
    const auto p = qdist("1/16,1/6,1/4,1/8,71/240");
    CHECK(p.null_mass() == Q(1, 10));
    const auto trace = maximize_trace(p, Q(1, 20), 4);
    REQUIRE(trace.steps.size() == 4);
    CHECK(trace.steps[0].result == qdist("1/20,1/6,1/4,11/80,71/240"));
    CHECK(trace.steps[1].result == qdist("1/20,1/20,1/4,61/240,71/240"));
    CHECK(trace.steps[2].result == qdist("1/20,1/20,1/20,109/240,71/240"));
    CHECK(trace.steps[3].result == qdist("1/20,1/20,1/20,7/10,1/20"));
    const auto fam = ThetaFamily<Rational>::make(5, Q(1, 10), Q(1, 20));
    for (const auto& s : trace.steps) {
        CHECK(fam.contains(s.result));
        CHECK(s.lambda >= 0);
        CHECK(s.lambda <= 1);
    }
}

TEST_CASE("maximize_trace edge cases") {
    const auto q = qdist("1/20,1/20,1/20,7/10,1/20");
    CHECK(maximize_trace(q, Q(1, 20), 4).steps.empty());

    const auto t = maximize_trace(fdist({0.4, 0.4}), 0.25, 1);
    REQUIRE(t.steps.size() == 1);
    CHECK(approx_equal(t.final_vector(), fdist({0.55, 0.25})));

    CHECK_THROWS_AS(maximize_trace(fdist({0.1, 0.7}), 0.25, 1), Error);
    CHECK_THROWS_AS(maximize_trace(fdist({0.4, 0.4}), 0.25, 3), Error);
}
