#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mdm/delta_m.hpp"
#include "mdm/error.hpp"
#include "oracle.hpp"

using namespace mdm;
using Catch::Approx;

namespace {

oracle::Summary os(const SampleSummary& s) { return {s.mean, s.sd, s.n}; }

std::vector<double> sorted_abs(std::vector<double> v) {
    for (auto& x : v) x = std::abs(x);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("upper bound of a toy symmetric set") {
    std::vector<double> draws;
    for (int i = 1; i <= 10; ++i) {
        draws.push_back(i);
        draws.push_back(-i);
    }
    const double c = zero_centered_upper_bound(draws, 0.5);
    const auto a = sorted_abs(draws);
    // rank ceil(0.5 * 20) = 10
    CHECK(c == a[9]);
    CHECK(c == 5.0);
    CHECK(upper_bound_rank(20, 0.5) == 10);
    CHECK(upper_bound_rank(10000, 0.05) == 9500);
    CHECK(upper_bound_rank(3, 0.999) == 1);
}

TEST_CASE("bound of standard normal draws is z 0.975") {
    std::mt19937_64 eng(123);
    std::normal_distribution<double> nd;
    std::vector<double> draws(1000000);
    for (auto& d : draws) d = nd(eng);
    const double z = oracle::normal_quantile(0.975);
    CHECK(zero_centered_upper_bound(draws, 0.05) == Approx(z).margin(0.01));
}

TEST_CASE("quantile rule agrees with the ECDF bisection") {
    std::mt19937_64 eng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::student_t_distribution<double> td(3.0 + trial);
        std::vector<double> draws(1000 + 137 * trial);
        const double shift = 0.3 * trial - 2.0;
        for (auto& d : draws) d = shift + td(eng);
        for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
            const double c = zero_centered_upper_bound(draws, alpha);
            const double root = oracle::ecdf_bound(draws, alpha);
            const auto a = sorted_abs(draws);
            const auto r = upper_bound_rank(a.size(), alpha) - 1;
            const double lo = r > 0 ? a[r - 1] : 0.0;
            const double hi = r + 1 < a.size() ? a[r + 1] : a[r];
            CHECK(root >= lo);
            CHECK(root <= hi);
        }
    }
}

TEST_CASE("bound input validation") {
    std::vector<double> none;
    try {
        zero_centered_upper_bound(none, 0.05);
        FAIL("expected EmptyDraws");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::EmptyDraws);
    }
    std::vector<double> some = {1.0, 2.0};
    CHECK_THROWS_AS(zero_centered_upper_bound(some, 0.0), StatError);
    CHECK_THROWS_AS(zero_centered_upper_bound(some, 1.0), StatError);
}

TEST_CASE("delta_M of identical normal-ish groups") {
    const SampleSummary x{10.0, 1.0, 50};
    const auto r = compute_delta_m(x, x, 0.05, 100000, {1, 0});
    CHECK(r.kind == DeltaKind::raw);
    CHECK(r.k == 100000);
    CHECK(r.value == Approx(0.40).margin(0.02));
    CHECK(r.value == Approx(oracle::delta_m(os(x), os(x), 0.05)).epsilon(0.01));
}

TEST_CASE("delta_M for the first cholesterol row") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto r = compute_delta_m(x, y, 0.05, 100000, {2, 0});
    CHECK(r.value > 0.19);
    const double ref = oracle::delta_m(os(x), os(y), 0.05);
    CHECK(r.value == Approx(ref).epsilon(0.02));
}

TEST_CASE("delta_M shrinks as alpha grows on identical draws") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto draws = draw_posterior_means(x, y, 10000, {3, 0});
    double previous = std::numeric_limits<double>::infinity();
    for (double alpha : {0.001, 0.01, 0.05, 0.1, 0.2, 0.4}) {
        const double v = delta_m_from_draws(draws, alpha).value;
        CHECK(v <= previous);
        previous = v;
    }
    CHECK(compute_delta_m(x, y, 0.05, 10000, {3, 0}).value >=
          compute_delta_m(x, y, 0.10, 10000, {3, 0}).value);
}

TEST_CASE("r-delta_M for the first cholesterol row") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto r = compute_r_delta_m(x, y, 0.05, 100000, {4, 0});
    CHECK(r.kind == DeltaKind::relative);
    CHECK(r.value > 0.19 / 3.45);
    CHECK(r.value == Approx(oracle::r_delta_m(os(x), os(y), 0.05)).epsilon(0.02));
}

TEST_CASE("r-delta_M ignores the measurement unit") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto base = compute_r_delta_m(x, y, 0.05, 10000, {5, 0});
    CHECK(compute_r_delta_m(x.scaled(1024.0), y.scaled(1024.0), 0.05, 10000, {5, 0}).value == base.value);
    CHECK(compute_r_delta_m(x.scaled(1000.0), y.scaled(1000.0), 0.05, 10000, {5, 0}).value ==
          Approx(base.value).epsilon(1e-12));
}

TEST_CASE("r-delta_M of identical groups against the oracle") {
    const SampleSummary x{20.0, 2.0, 20};
    const auto r = compute_r_delta_m(x, x, 0.05, 100000, {6, 0});
    CHECK(r.value > 0.0);
    CHECK(r.value < 0.15);
    CHECK(r.value == Approx(oracle::r_delta_m(os(x), os(x), 0.05)).epsilon(0.02));
}

TEST_CASE("relative preconditions") {
    try {
        compute_r_delta_m({0.0, 1.0, 10}, {1.0, 1.0, 10}, 0.05, 10000, {});
        FAIL("expected ControlMeanNotPositive");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::ControlMeanNotPositive);
    }
    try {
        compute_r_delta_m({0.2, 1.0, 6}, {1.0, 1.0, 10}, 0.05, 10000, {});
        FAIL("expected ControlNearZero");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::ControlNearZero);
    }
    CHECK_THROWS_AS(compute_delta_m({0.0, 1.0, 10}, {1.0, 1.0, 10}, 1.5, 10000, {}), StatError);
}

TEST_CASE("raw scale equivariance") {
    const SampleSummary x{3.0, 1.5, 7}, y{2.0, 0.5, 12};
    const auto base = compute_delta_m(x, y, 0.05, 10000, {7, 0});
    CHECK(compute_delta_m(x.scaled(4.0), y.scaled(4.0), 0.05, 10000, {7, 0}).value == 4.0 * base.value);
    CHECK(compute_delta_m(x.scaled(0.37), y.scaled(0.37), 0.05, 10000, {7, 0}).value ==
          Approx(0.37 * base.value).epsilon(1e-12));
}

TEST_CASE("values are non-negative and deterministic") {
    std::mt19937_64 eng(8);
    std::uniform_real_distribution<double> u(0.5, 5.0);
    for (int i = 0; i < 20; ++i) {
        const SampleSummary x{30.0 + u(eng), u(eng), 5 + i}, y{30.0 + u(eng), u(eng), 6 + i};
        const RngSeed s{static_cast<std::uint64_t>(i), 1};
        const auto a = compute_delta_m(x, y, 0.05, 2000, s);
        CHECK(a.value >= 0.0);
        CHECK(a.value == compute_delta_m(x, y, 0.05, 2000, s).value);
        const auto b = compute_r_delta_m(x, y, 0.05, 2000, s);
        CHECK(b.value >= 0.0);
        CHECK(b.value == compute_r_delta_m(x, y, 0.05, 2000, s).value);
    }
}

TEST_CASE("delta_M covers the observed difference") {
    std::mt19937_64 eng(9);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 10; ++i) {
        const SampleSummary x{u(eng), 1.0 + std::abs(u(eng)), 4 + 3 * i};
        const SampleSummary y{u(eng), 1.0 + std::abs(u(eng)), 5 + 2 * i};
        const auto draws = draw_posterior_means(x, y, 100000, {10, static_cast<std::uint64_t>(i)});
        const auto a = sorted_abs(difference_draws(draws));
        for (double alpha : {0.05, 0.2, 0.45}) {
            const double v = delta_m_from_draws(draws, alpha).value;
            const auto r = upper_bound_rank(a.size(), alpha) - 1;
            // one ECDF step of slack
            CHECK(a[std::min(r + 1, a.size() - 1)] >= std::abs(y.mean - x.mean));
            CHECK(v >= a[r]);
        }
    }
}

TEST_CASE("credibility rates") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const double r05 = credibility_rate(x, y, 0.05, 10000, {1, 0}, {1, 1});
    CHECK(r05 >= 0.93);
    CHECK(r05 <= 0.97);
    CHECK(credibility_rate(x, y, 0.20, 10000, {1, 0}, {1, 1}) == Approx(0.80).margin(0.02));
    CHECK(credibility_rate(x, y, 0.05, 10000, {1, 0}, {1, 1}, DeltaKind::relative) == Approx(0.95).margin(0.02));
    CHECK(credibility_rate_for_bound(x, y, std::numeric_limits<double>::infinity(), 50000, {1, 1}) == 1.0);
}

TEST_CASE("mean credibility over a small grid") {
    const std::vector<CalibrationPoint> grid = {{0.0, 6}, {1.0, 12}, {4.0, 24}};
    CHECK(mean_credibility(0.1, DeltaKind::raw, grid, 10000, {3, 0}, 1) == Approx(0.9).margin(0.02));
    CHECK(default_calibration_grid().size() == 25);
    const auto [x, y] = calibration_summaries({2.0, 24});
    CHECK((y.mean - x.mean) / std::sqrt(x.sd * x.sd / x.n + y.sd * y.sd / y.n) == Approx(2.0));
    // independent of worker count
    CHECK(mean_credibility(0.1, DeltaKind::raw, grid, 2000, {3, 0}, 1) ==
          mean_credibility(0.1, DeltaKind::raw, grid, 2000, {3, 0}, 3));
}

TEST_CASE("equal-tailed interval") {
    std::vector<double> v(101);
    for (int i = 0; i <= 100; ++i) v[i] = i;
    const auto [lo, hi] = equal_tailed_interval(v, 0.1);
    CHECK(lo == Approx(5.0));
    CHECK(hi == Approx(95.0));
}
