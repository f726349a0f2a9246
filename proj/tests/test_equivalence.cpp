#include <catch_amalgamated.hpp>

#include <cmath>

#include "mdm/equivalence.hpp"
#include "mdm/error.hpp"

using namespace mdm;
using Catch::Approx;

namespace {

DeltaMResult result(double v, DeltaKind kind = DeltaKind::relative) {
    DeltaMResult r;
    r.value = v;
    r.kind = kind;
    r.k = 10000;
    return r;
}

EquivalenceDecision pass(double threshold) {
    return test_negligible(result(0.1), {threshold, DeltaKind::relative});
}

}  // namespace

TEST_CASE("strict inequality against the threshold") {
    CHECK(test_negligible(result(0.25), {0.30, DeltaKind::relative}).designation ==
          Designation::practically_equivalent);
    CHECK(test_negligible(result(0.30), {0.30, DeltaKind::relative}).designation ==
          Designation::not_practically_equivalent);
    CHECK(test_negligible(result(0.31), {0.30, DeltaKind::relative}).designation ==
          Designation::not_practically_equivalent);
    const auto d = test_negligible(result(0.25), {0.30, DeltaKind::relative});
    CHECK(d.threshold.value == 0.30);
    CHECK(d.delta_m.value == 0.25);
}

TEST_CASE("threshold errors") {
    try {
        test_negligible(result(0.2, DeltaKind::raw), {0.3, DeltaKind::relative});
        FAIL("expected ScaleMismatch");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::ScaleMismatch);
    }
    CHECK_THROWS_AS(test_negligible(result(0.2), {0.0, DeltaKind::relative}), StatError);
    CHECK_THROWS_AS(test_negligible(result(0.2), {-1.0, DeltaKind::relative}), StatError);
}

TEST_CASE("threshold monotonicity") {
    for (double v : {0.0, 0.05, 0.2, 0.29999, 0.3, 0.7}) {
        bool seen = false;
        for (double t : {0.01, 0.1, 0.3, 0.31, 0.5, 1.0, 5.0}) {
            const bool eq = test_negligible(result(v), {t, DeltaKind::relative}).designation ==
                            Designation::practically_equivalent;
            if (seen) CHECK(eq);
            seen = seen || eq;
        }
    }
    CHECK(test_negligible(result(1e6), {INFINITY, DeltaKind::relative}).designation ==
          Designation::practically_equivalent);
}

TEST_CASE("changing the threshold never resamples") {
    const auto r = compute_delta_m({3.45, 0.24, 6}, {3.26, 0.22, 6}, 0.05, 10000, {1, 0});
    const auto before = posterior_draw_calls();
    for (double t : {0.1, 0.2, 0.3, 0.4, 0.5}) test_negligible(r, {t, DeltaKind::raw});
    CHECK(posterior_draw_calls() == before);
}

TEST_CASE("consensus of two analysts") {
    DecisionMatrix m;
    // analyst A: lenient threshold, B: strict; values a..g
    const std::map<std::string, double> values = {{"a", 0.05}, {"b", 0.08}, {"c", 0.5},  {"d", 0.1},
                                                  {"e", 0.12}, {"f", 0.2},  {"g", 0.25}};
    for (const auto& [id, v] : values) {
        m["A"][id] = test_negligible(result(v), {0.3, DeltaKind::relative});
        m["B"][id] = test_negligible(result(v), {0.15, DeltaKind::relative});
    }
    CHECK(consensus(m) == std::vector<std::string>{"a", "b", "d", "e"});

    DecisionMatrix one;
    one["A"] = m["A"];
    CHECK(consensus(one) == std::vector<std::string>{"a", "b", "d", "e", "f", "g"});
}

TEST_CASE("disjoint pass sets give an empty consensus") {
    DecisionMatrix m;
    m["A"]["x"] = pass(0.3);
    m["A"]["y"] = pass(0.05);
    m["B"]["x"] = pass(0.05);
    m["B"]["y"] = pass(0.3);
    CHECK(consensus(m).empty());
}

TEST_CASE("adding analysts never grows the consensus") {
    DecisionMatrix m;
    for (int i = 0; i < 6; ++i) {
        const std::string id = "r" + std::to_string(i);
        m["A"][id] = test_negligible(result(0.05 * i), {0.3, DeltaKind::relative});
    }
    auto previous = consensus(m);
    for (double t : {0.22, 0.12, 0.02}) {
        const std::string name = "T" + std::to_string(t);
        for (int i = 0; i < 6; ++i) {
            const std::string id = "r" + std::to_string(i);
            m[name][id] = test_negligible(result(0.05 * i), {t, DeltaKind::relative});
        }
        const auto now = consensus(m);
        CHECK(now.size() <= previous.size());
        for (const auto& id : now) CHECK(std::find(previous.begin(), previous.end(), id) != previous.end());
        previous = now;
    }
}

TEST_CASE("incomplete decision matrix") {
    DecisionMatrix m;
    m["A"]["x"] = pass(0.3);
    m["A"]["y"] = pass(0.3);
    m["B"]["x"] = pass(0.3);
    try {
        consensus(m);
        FAIL("expected IncompleteDecisionMatrix");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::IncompleteDecisionMatrix);
    }
}

TEST_CASE("MACB") {
    // centred posterior: both bounds equal in size
    const SampleSummary x{10.0, 1.0, 40};
    const double v = macb(x, x, 0.05, 100000, {1, 0});
    const auto draws = difference_draws(draw_posterior_means(x, x, 100000, {1, 0}));
    const auto [lo, hi] = equal_tailed_interval(draws, 0.05);
    CHECK(v == Approx((hi - lo) / 2.0).epsilon(0.02));
    CHECK(v >= 0.0);

    // far from zero only one tail of |d| matters, so the two-sided bound lines up with delta_M at alpha/2
    const SampleSummary y{20.0, 1.0, 40};
    const double far = macb(x, y, 0.05, 100000, {2, 0});
    const double dm = compute_delta_m(x, y, 0.025, 100000, {2, 0}).value;
    CHECK(far == Approx(dm).epsilon(0.005));
    CHECK(far > 10.0);

    for (double ybar : {-5.0, 0.0, 9.9, 10.5}) CHECK(macb(x, {ybar, 2.0, 8}, 0.1, 2000, {3, 0}) >= 0.0);
}
