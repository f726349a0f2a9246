#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mdm/posterior.hpp"

namespace mdm {

enum class DeltaKind { raw, relative };

std::string_view to_string(DeltaKind kind) noexcept;

/// A most-difference-in-means value: delta_M in measurement units (raw) or
/// r-delta_M as a unitless fraction (relative), at credibility 1 - alpha_dm.
struct DeltaMResult {
    double value = 0.0;
    double alpha_dm = 0.05;
    int k = 0;
    RngSeed seed;
    DeltaKind kind = DeltaKind::raw;
};

/// Upper bound c of the zero-centred interval (-c, c] holding a 1 - alpha_dm
/// share of the draws. Computed as the order statistic of |draws| at rank
/// ceil((1 - alpha_dm) * K), which is the exact solution on the ECDF since
/// P(-c < d <= c) = P(|d| <= c) for the empirical measure. No interpolation,
/// so the bound never understates the ECDF solution.
double zero_centered_upper_bound(std::span<const double> draws, double alpha_dm);

/// 1-based rank used by zero_centered_upper_bound for K draws.
std::size_t upper_bound_rank(std::size_t k, double alpha_dm);

DeltaMResult compute_delta_m(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
                             int k, const RngSeed& seed);

/// Requires x.mean > 0 (ControlMeanNotPositive) and a control posterior bounded
/// away from zero (ControlNearZero).
DeltaMResult compute_r_delta_m(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
                               int k, const RngSeed& seed);

/// Both statistics from an existing draw set (no resampling).
DeltaMResult delta_m_from_draws(const PosteriorDrawSet& draws, double alpha_dm);
DeltaMResult r_delta_m_from_draws(const PosteriorDrawSet& draws, double alpha_dm);

/// Share of 5k fresh posterior draws (from `check_seed`) whose absolute
/// (relative) difference is within the delta_M (r-delta_M) computed from k
/// draws under `seed`. Should sit near 1 - alpha_dm.
double credibility_rate(const SampleSummary& x, const SampleSummary& y, double alpha_dm, int k,
                        const RngSeed& seed, const RngSeed& check_seed,
                        DeltaKind kind = DeltaKind::raw);

/// Share of check draws with |difference| <= bound, for an externally supplied
/// bound (e.g. +infinity).
double credibility_rate_for_bound(const SampleSummary& x, const SampleSummary& y, double bound,
                                  int check_k, const RngSeed& check_seed,
                                  DeltaKind kind = DeltaKind::raw);

inline constexpr int kCredibilityCheckMultiplier = 5;

/// Equal-tailed 1 - alpha interval of the draws (empirical alpha/2 and
/// 1 - alpha/2 quantiles, type-7 interpolation).
std::pair<double, double> equal_tailed_interval(std::span<const double> draws, double alpha);

}  // namespace mdm

namespace mdm {

/// One calibration configuration: standardized effect xbar_DM / s_DM and the
/// per-group size.
struct CalibrationPoint {
    double effect = 0.0;
    int n = 6;
};

/// Effects {0, 0.5, 1, 2, 4} x group sizes {6, 12, 24, 48, 96}.
std::vector<CalibrationPoint> default_calibration_grid();

/// Control mean 100, both sds 10, experiment mean shifted by effect * s_DM.
std::pair<SampleSummary, SampleSummary> calibration_summaries(const CalibrationPoint& point);

/// Mean credibility rate over the grid; each point uses its own derived seeds.
double mean_credibility(double alpha_dm, DeltaKind kind, const std::vector<CalibrationPoint>& grid,
                        int k, const RngSeed& seed, unsigned parallelism = 0);

}  // namespace mdm
