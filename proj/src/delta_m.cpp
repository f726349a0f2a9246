#include "mdm/delta_m.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mdm/error.hpp"
#include "mdm/parallel.hpp"

namespace mdm {

namespace {

void require_alpha(double alpha_dm) {
    if (!(alpha_dm > 0.0 && alpha_dm < 1.0)) {
        throw StatError(ErrorKind::InvalidArgument,
                        "alpha_dm must lie in (0, 1), got " + std::to_string(alpha_dm));
    }
}

void require_positive_control(const SampleSummary& x) {
    if (!(x.mean > 0.0)) {
        throw StatError(ErrorKind::ControlMeanNotPositive,
                        "relative statistics need a positive control mean, got " +
                            std::to_string(x.mean));
    }
}

double type7_quantile(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(DeltaKind kind) noexcept {
    return kind == DeltaKind::raw ? "raw" : "relative";
}

std::size_t upper_bound_rank(std::size_t k, double alpha_dm) {
    // Guard against (1 - alpha) * K landing a hair above an integer.
    const double target = (1.0 - alpha_dm) * static_cast<double>(k);
    auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
    return std::clamp<std::size_t>(rank, 1, k);
}

double zero_centered_upper_bound(std::span<const double> draws, double alpha_dm) {
    if (draws.empty()) throw StatError(ErrorKind::EmptyDraws, "no draws supplied");
    require_alpha(alpha_dm);
    std::vector<double> magnitudes(draws.size());
    std::transform(draws.begin(), draws.end(), magnitudes.begin(),
                   [](double d) { return std::abs(d); });
    const auto idx = upper_bound_rank(magnitudes.size(), alpha_dm) - 1;
    std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(idx),
                     magnitudes.end());
    return magnitudes[idx];
}

DeltaMResult delta_m_from_draws(const PosteriorDrawSet& draws, double alpha_dm) {
    const auto diff = difference_draws(draws);
    return {zero_centered_upper_bound(diff, alpha_dm), alpha_dm, draws.k, draws.seed,
            DeltaKind::raw};
}

DeltaMResult r_delta_m_from_draws(const PosteriorDrawSet& draws, double alpha_dm) {
    const auto rel = relative_difference_draws(draws);
    return {zero_centered_upper_bound(rel, alpha_dm), alpha_dm, draws.k, draws.seed,
            DeltaKind::relative};
}

DeltaMResult compute_delta_m(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
                             int k, const RngSeed& seed) {
    require_alpha(alpha_dm);
    return delta_m_from_draws(draw_posterior_means(x, y, k, seed), alpha_dm);
}

DeltaMResult compute_r_delta_m(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
                               int k, const RngSeed& seed) {
    require_alpha(alpha_dm);
    x.validate();
    require_positive_control(x);
    return r_delta_m_from_draws(draw_posterior_means(x, y, k, seed), alpha_dm);
}

double credibility_rate_for_bound(const SampleSummary& x, const SampleSummary& y, double bound,
                                  int check_k, const RngSeed& check_seed, DeltaKind kind) {
    const auto check = draw_posterior_means(x, y, check_k, check_seed);
    const auto values =
        kind == DeltaKind::raw ? difference_draws(check) : relative_difference_draws(check);
    const auto inside = std::count_if(values.begin(), values.end(),
                                      [bound](double v) { return std::abs(v) <= bound; });
    return static_cast<double>(inside) / static_cast<double>(values.size());
}

double credibility_rate(const SampleSummary& x, const SampleSummary& y, double alpha_dm, int k,
                        const RngSeed& seed, const RngSeed& check_seed, DeltaKind kind) {
    const auto result = kind == DeltaKind::raw ? compute_delta_m(x, y, alpha_dm, k, seed)
                                               : compute_r_delta_m(x, y, alpha_dm, k, seed);
    return credibility_rate_for_bound(x, y, result.value, kCredibilityCheckMultiplier * k,
                                      check_seed, kind);
}

std::pair<double, double> equal_tailed_interval(std::span<const double> draws, double alpha) {
    if (draws.empty()) throw StatError(ErrorKind::EmptyDraws, "no draws supplied");
    require_alpha(alpha);
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    return {type7_quantile(sorted, alpha / 2.0), type7_quantile(sorted, 1.0 - alpha / 2.0)};
}

}  // namespace mdm

namespace mdm {

std::vector<CalibrationPoint> default_calibration_grid() {
    std::vector<CalibrationPoint> grid;
    for (double effect : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        for (int n : {6, 12, 24, 48, 96}) grid.push_back({effect, n});
    }
    return grid;
}

std::pair<SampleSummary, SampleSummary> calibration_summaries(const CalibrationPoint& point) {
    const SampleSummary x{100.0, 10.0, point.n};
    const double s_dm = std::sqrt(2.0 * 100.0 / point.n);
    return {x, SampleSummary{100.0 + point.effect * s_dm, 10.0, point.n}};
}

double mean_credibility(double alpha_dm, DeltaKind kind, const std::vector<CalibrationPoint>& grid,
                        int k, const RngSeed& seed, unsigned parallelism) {
    if (grid.empty()) throw StatError(ErrorKind::InvalidArgument, "empty calibration grid");
    std::vector<double> rates(grid.size());
    parallel_for(grid.size(), parallelism, [&](std::size_t i) {
        const auto [x, y] = calibration_summaries(grid[i]);
        const auto s = derive(seed, {static_cast<std::uint64_t>(i)});
        rates[i] = credibility_rate(x, y, alpha_dm, k, derive(s, {1}), derive(s, {2}), kind);
    });
    return std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
}

}  // namespace mdm
