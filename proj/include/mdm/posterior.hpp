#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdm/rng.hpp"

namespace mdm {

/// Sufficient statistics of one group: sample mean, sample standard deviation
/// and observation count.
struct SampleSummary {
    double mean = 0.0;
    double sd = 1.0;
    int n = 2;

    /// Throws DegenerateSample unless n >= 2, sd > 0 and mean is finite.
    void validate() const;

    double standard_error() const;

    /// Summary with mean and sd multiplied by `factor`; n unchanged.
    SampleSummary scaled(double factor) const { return {mean * factor, sd * factor, n}; }

    friend bool operator==(const SampleSummary&, const SampleSummary&) = default;
};

/// Reduce raw observations to a summary (mean, unbiased sd, n).
SampleSummary summarize(std::span<const double> observations);

inline constexpr int kMinDrawCount = 1000;
inline constexpr int kDefaultDrawCount = 10000;

/// Paired draws of the control (x) and experiment (y) population means from
/// their marginal Student-t posteriors under the noninformative prior.
struct PosteriorDrawSet {
    int k = 0;
    std::vector<double> mu_x_draws;
    std::vector<double> mu_y_draws;
    RngSeed seed;
};

/// mu_x[i] = x.mean + x.se * T_i with T_i ~ t(x.n - 1), independent streams
/// for each group derived from `seed`. Standard-t variates are drawn first and
/// then shifted/scaled, so location and scale equivariance hold per seed.
PosteriorDrawSet draw_posterior_means(const SampleSummary& x, const SampleSummary& y, int k,
                                      const RngSeed& seed);

/// k standard Student-t variates with `df` degrees of freedom.
std::vector<double> standard_t_draws(double df, int k, const RngSeed& seed);

/// mu_y[i] - mu_x[i].
std::vector<double> difference_draws(const PosteriorDrawSet& draws);

inline constexpr double kControlNearZeroFraction = 1e-3;

/// (mu_y[i] - mu_x[i]) / mu_x[i]. Throws ControlNearZero when at least a
/// 1e-3 fraction of control draws is <= 0.
std::vector<double> relative_difference_draws(const PosteriorDrawSet& draws);

/// Number of draw_posterior_means calls made by this process. Diagnostic only;
/// used to check that threshold tests never resample.
std::uint64_t posterior_draw_calls() noexcept;

}  // namespace mdm
