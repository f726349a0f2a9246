#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

#include "mdm/error.hpp"
#include "mdm/posterior.hpp"
#include "oracle.hpp"

using namespace mdm;
using Catch::Approx;

namespace {

double sample_mean(const std::vector<double>& v) { return oracle::mean(v); }

double sample_variance(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("summary validation") {
    CHECK_NOTHROW(SampleSummary{1.0, 1.0, 2}.validate());
    CHECK_THROWS_AS(SampleSummary({1.0, 1.0, 1}).validate(), StatError);
    CHECK_THROWS_AS(SampleSummary({1.0, 0.0, 5}).validate(), StatError);
    CHECK_THROWS_AS(SampleSummary({1.0, -1.0, 5}).validate(), StatError);
    CHECK_THROWS_AS(SampleSummary({NAN, 1.0, 5}).validate(), StatError);
    try {
        SampleSummary{1.0, 1.0, 1}.validate();
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::DegenerateSample);
    }
}

TEST_CASE("summarize reduces observations") {
    const std::vector<double> obs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    const auto s = summarize(obs);
    CHECK(s.mean == Approx(5.0));
    CHECK(s.sd == Approx(std::sqrt(32.0 / 7.0)));
    CHECK(s.n == 8);
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(summarize(one), StatError);
}

TEST_CASE("draw count and degenerate inputs are rejected") {
    const SampleSummary ok{1.0, 1.0, 10};
    try {
        draw_posterior_means(ok, ok, 999, {1, 0});
        FAIL("expected DrawCountTooSmall");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::DrawCountTooSmall);
    }
    try {
        draw_posterior_means(ok, SampleSummary{1.0, 0.0, 10}, 1000, {1, 0});
        FAIL("expected DegenerateSample");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::DegenerateSample);
    }
}

TEST_CASE("posterior mean location, large n") {
    const SampleSummary x{5.0, 1.0, 100};
    const auto d = draw_posterior_means(x, x, 100000, {11, 0});
    REQUIRE(d.mu_x_draws.size() == 100000);
    REQUIRE(d.mu_y_draws.size() == 100000);
    CHECK(std::abs(sample_mean(d.mu_x_draws) - 5.0) < 0.01);
}

TEST_CASE("small-sample posterior median and variance match the t law") {
    const SampleSummary x{3.45, 0.24, 6};
    const auto d = draw_posterior_means(x, x, 100000, {12, 0});
    CHECK(std::abs(median(d.mu_x_draws) - 3.45) < 0.003);
    // df / (df - 2) inflation, df = 5
    const double expected = 0.24 * 0.24 / 6.0 * (5.0 / 3.0);
    // heavy tails (df = 5) make the sample variance noisy; allow 5%
    CHECK(sample_variance(d.mu_x_draws) == Approx(expected).epsilon(0.05));
}

TEST_CASE("identical seeds reproduce draws bit for bit") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto a = draw_posterior_means(x, y, 5000, {42, 7});
    const auto b = draw_posterior_means(x, y, 5000, {42, 7});
    CHECK(a.mu_x_draws == b.mu_x_draws);
    CHECK(a.mu_y_draws == b.mu_y_draws);
    const auto c = draw_posterior_means(x, y, 5000, {42, 8});
    CHECK(a.mu_x_draws != c.mu_x_draws);
}

TEST_CASE("draws are reproducible across threads") {
    const SampleSummary x{1.0, 2.0, 9}, y{2.0, 1.0, 7};
    const auto reference = draw_posterior_means(x, y, 4000, {5, 5});
    std::vector<PosteriorDrawSet> results(4);
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < 4; ++t) {
            pool.emplace_back([&, t] { results[t] = draw_posterior_means(x, y, 4000, {5, 5}); });
        }
    }
    for (const auto& r : results) {
        CHECK(r.mu_x_draws == reference.mu_x_draws);
        CHECK(r.mu_y_draws == reference.mu_y_draws);
    }
}

TEST_CASE("group streams are independent") {
    const SampleSummary x{0.0, 1.0, 30};
    const auto d = draw_posterior_means(x, x, 20000, {3, 0});
    CHECK(d.mu_x_draws != d.mu_y_draws);
    double sxy = 0.0;
    for (std::size_t i = 0; i < d.mu_x_draws.size(); ++i) sxy += d.mu_x_draws[i] * d.mu_y_draws[i];
    const double corr = sxy / d.mu_x_draws.size() /
                        std::sqrt(sample_variance(d.mu_x_draws) * sample_variance(d.mu_y_draws));
    CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("difference and relative difference arithmetic") {
    PosteriorDrawSet d;
    d.k = 2;
    d.mu_x_draws = {1.0, 2.0};
    d.mu_y_draws = {3.0, 5.0};
    CHECK(difference_draws(d) == std::vector<double>{2.0, 3.0});

    d.mu_x_draws = {2.0, 4.0};
    d.mu_y_draws = {3.0, 3.0};
    CHECK(relative_difference_draws(d) == std::vector<double>{0.5, -0.25});
}

TEST_CASE("difference draws of identical groups centre on zero") {
    const SampleSummary x{10.0, 2.0, 20};
    const int k = 100000;
    const auto diff = difference_draws(draw_posterior_means(x, x, k, {9, 1}));
    const double s_dm = std::sqrt(2.0 * 4.0 / 20.0);
    CHECK(std::abs(median(diff)) < 3.0 * s_dm / std::sqrt(static_cast<double>(k)) * 1.3);
}

TEST_CASE("difference draws for the first cholesterol row") {
    const SampleSummary x{3.45, 0.24, 6}, y{3.26, 0.22, 6};
    const auto diff = difference_draws(draw_posterior_means(x, y, 100000, {10, 0}));
    CHECK(oracle::mean(diff) == Approx(-0.19).margin(0.003));
}

TEST_CASE("relative difference is scale invariant") {
    const SampleSummary x{20.0, 2.0, 8}, y{23.0, 3.0, 9};
    const auto base = relative_difference_draws(draw_posterior_means(x, y, 5000, {4, 4}));
    // power-of-two factors are exact in binary floating point
    const auto exact = relative_difference_draws(draw_posterior_means(x.scaled(1024.0), y.scaled(1024.0), 5000, {4, 4}));
    CHECK(exact == base);
    // decimal factors agree to rounding
    const auto tenfold = relative_difference_draws(draw_posterior_means(x.scaled(10.0), y.scaled(10.0), 5000, {4, 4}));
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(std::abs(tenfold[i] - base[i]) <= 1e-12 * std::max(1.0, std::abs(base[i])));
    }
}

TEST_CASE("control mean near zero is refused for relative draws") {
    // posterior mass below zero from the oracle t CDF is far above 1e-3
    const oracle::Summary ox{0.01, 1.0, 6};
    REQUIRE(oracle::posterior_cdf(ox, 0.0) > 1e-3);
    const SampleSummary x{0.01, 1.0, 6}, y{1.0, 1.0, 6};
    try {
        relative_difference_draws(draw_posterior_means(x, y, 10000, {1, 1}));
        FAIL("expected ControlNearZero");
    } catch (const StatError& e) {
        CHECK(e.kind() == ErrorKind::ControlNearZero);
    }
}

TEST_CASE("location equivariance") {
    const SampleSummary x{0.0, 1.5, 7}, y{0.0, 0.5, 12};
    const auto base = draw_posterior_means(x, y, 3000, {21, 0});
    const double a = 4.0;
    const auto shifted = draw_posterior_means({a, 1.5, 7}, {a, 0.5, 12}, 3000, {21, 0});
    for (std::size_t i = 0; i < base.mu_x_draws.size(); ++i) {
        // base means are zero, so the shift is the only arithmetic
        CHECK(shifted.mu_x_draws[i] == base.mu_x_draws[i] + a);
        CHECK(shifted.mu_y_draws[i] == base.mu_y_draws[i] + a);
    }
    // with a nonzero base the shift holds up to rounding
    const auto b1 = draw_posterior_means({3.3, 1.5, 7}, y, 3000, {21, 0});
    const auto b2 = draw_posterior_means({3.3 + 100.0, 1.5, 7}, y, 3000, {21, 0});
    for (std::size_t i = 0; i < b1.mu_x_draws.size(); ++i) {
        CHECK(std::abs(b2.mu_x_draws[i] - (b1.mu_x_draws[i] + 100.0)) < 1e-12);
    }
}

TEST_CASE("scale equivariance") {
    const SampleSummary x{3.0, 1.5, 7}, y{2.0, 0.5, 12};
    const auto base = draw_posterior_means(x, y, 3000, {22, 0});
    const auto scaled = draw_posterior_means(x.scaled(8.0), y.scaled(8.0), 3000, {22, 0});
    for (std::size_t i = 0; i < base.mu_x_draws.size(); ++i) {
        CHECK(scaled.mu_x_draws[i] == 8.0 * base.mu_x_draws[i]);
        CHECK(scaled.mu_y_draws[i] == 8.0 * base.mu_y_draws[i]);
    }
    const auto odd = draw_posterior_means(x.scaled(3.7), y.scaled(3.7), 3000, {22, 0});
    for (std::size_t i = 0; i < base.mu_x_draws.size(); ++i) {
        CHECK(odd.mu_x_draws[i] == Approx(3.7 * base.mu_x_draws[i]).epsilon(1e-12));
    }
}

TEST_CASE("empirical CDF converges to the t CDF") {
    for (const SampleSummary s : {SampleSummary{0.0, 1.0, 4}, SampleSummary{2.0, 3.0, 11}}) {
        const int k = 100000;
        auto d = draw_posterior_means(s, s, k, {31, static_cast<std::uint64_t>(s.n)});
        auto& v = d.mu_x_draws;
        std::sort(v.begin(), v.end());
        const oracle::Summary os{s.mean, s.sd, s.n};
        double sup = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double f = oracle::posterior_cdf(os, v[i]);
            sup = std::max({sup, std::abs(f - (i + 1.0) / k), std::abs(f - static_cast<double>(i) / k)});
        }
        CHECK(sup < 2.0 / std::sqrt(static_cast<double>(k)));
    }
}

TEST_CASE("draw call counter advances") {
    const auto before = posterior_draw_calls();
    draw_posterior_means({1.0, 1.0, 5}, {1.0, 1.0, 5}, 1000, {});
    CHECK(posterior_draw_calls() == before + 1);
}
