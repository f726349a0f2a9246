#include "mdm/posterior.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "mdm/error.hpp"

namespace mdm {

namespace {

std::atomic<std::uint64_t> g_draw_calls{0};

constexpr std::uint64_t kControlStream = 0x58;
constexpr std::uint64_t kExperimentStream = 0x59;

void require_draw_count(int k) {
    if (k < kMinDrawCount) {
        throw StatError(ErrorKind::DrawCountTooSmall,
                        "k = " + std::to_string(k) + " but at least " +
                            std::to_string(kMinDrawCount) + " draws are required");
    }
}

}  // namespace

void SampleSummary::validate() const {
    if (n < 2) {
        throw StatError(ErrorKind::DegenerateSample,
                        "n = " + std::to_string(n) + " (need at least 2 observations)");
    }
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw StatError(ErrorKind::DegenerateSample, "sd must be positive and finite");
    }
    if (!std::isfinite(mean)) {
        throw StatError(ErrorKind::DegenerateSample, "mean must be finite");
    }
}

double SampleSummary::standard_error() const { return sd / std::sqrt(static_cast<double>(n)); }

SampleSummary summarize(std::span<const double> observations) {
    const auto count = observations.size();
    if (count < 2) {
        throw StatError(ErrorKind::DegenerateSample, "need at least 2 observations");
    }
    const double mean =
        std::accumulate(observations.begin(), observations.end(), 0.0) / static_cast<double>(count);
    double ss = 0.0;
    for (double v : observations) ss += (v - mean) * (v - mean);
    SampleSummary s{mean, std::sqrt(ss / static_cast<double>(count - 1)), static_cast<int>(count)};
    s.validate();
    return s;
}

std::vector<double> standard_t_draws(double df, int k, const RngSeed& seed) {
    auto engine = make_engine(seed);
    std::student_t_distribution<double> dist(df);
    std::vector<double> out(static_cast<std::size_t>(k));
    for (auto& v : out) v = dist(engine);
    return out;
}

PosteriorDrawSet draw_posterior_means(const SampleSummary& x, const SampleSummary& y, int k,
                                      const RngSeed& seed) {
    g_draw_calls.fetch_add(1, std::memory_order_relaxed);
    x.validate();
    y.validate();
    require_draw_count(k);

    PosteriorDrawSet out;
    out.k = k;
    out.seed = seed;
    out.mu_x_draws = standard_t_draws(x.n - 1, k, derive(seed, {kControlStream}));
    out.mu_y_draws = standard_t_draws(y.n - 1, k, derive(seed, {kExperimentStream}));

    const double se_x = x.standard_error();
    const double se_y = y.standard_error();
    for (auto& v : out.mu_x_draws) v = x.mean + se_x * v;
    for (auto& v : out.mu_y_draws) v = y.mean + se_y * v;
    return out;
}

std::vector<double> difference_draws(const PosteriorDrawSet& draws) {
    std::vector<double> out(draws.mu_x_draws.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = draws.mu_y_draws[i] - draws.mu_x_draws[i];
    return out;
}

std::vector<double> relative_difference_draws(const PosteriorDrawSet& draws) {
    const auto& mx = draws.mu_x_draws;
    std::size_t nonpositive = 0;
    for (double v : mx) nonpositive += (v <= 0.0) ? 1 : 0;
    const double fraction = mx.empty() ? 1.0 : static_cast<double>(nonpositive) / mx.size();
    if (fraction >= kControlNearZeroFraction) {
        throw StatError(ErrorKind::ControlNearZero,
                        "fraction " + std::to_string(fraction) +
                            " of control-mean draws are <= 0; use the raw difference instead");
    }
    std::vector<double> out(mx.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (draws.mu_y_draws[i] - mx[i]) / mx[i];
    return out;
}

std::uint64_t posterior_draw_calls() noexcept { return g_draw_calls.load(std::memory_order_relaxed); }

}  // namespace mdm
