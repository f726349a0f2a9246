#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdm/delta_m.hpp"
#include "mdm/posterior.hpp"
#include "mdm/rng.hpp"

namespace mdm {

enum class RegionScale { raw, relative_to_control_mean };

/// Zero-centred null interval [lower, upper] of negligible effect sizes.
/// Relative regions are fractions of the control sample mean.
struct NullRegion {
    double lower = -1.0;
    double upper = 1.0;
    RegionScale scale = RegionScale::raw;

    void validate() const;

    /// Raw-unit bounds for a given control summary. Relative regions need a
    /// positive control mean (ControlMeanNotPositive otherwise).
    std::pair<double, double> resolve(const SampleSummary& x) const;

    static NullRegion symmetric(double half_width, RegionScale scale = RegionScale::raw) {
        return {-half_width, half_width, scale};
    }
};

enum class StatisticId {
    xbar_dm,
    r_xbar_dm,
    s_dm,
    rs_dm,
    bf,
    p_n,
    p_e,
    p_delta,
    cd,
    delta_m,
    r_delta_m,
    rnd,
};

inline constexpr std::array<StatisticId, 12> kAllStatistics = {
    StatisticId::xbar_dm, StatisticId::r_xbar_dm, StatisticId::s_dm,    StatisticId::rs_dm,
    StatisticId::bf,      StatisticId::p_n,       StatisticId::p_e,     StatisticId::p_delta,
    StatisticId::cd,      StatisticId::delta_m,   StatisticId::r_delta_m, StatisticId::rnd,
};

std::string_view to_string(StatisticId id) noexcept;
std::optional<StatisticId> statistic_from_string(std::string_view name);

enum class Direction { smaller_is_stronger_null, larger_is_stronger_null };

std::string_view to_string(Direction direction) noexcept;

/// Decision direction of each statistic when picking the experiment with the
/// higher null strength.
Direction direction_of(StatisticId id) noexcept;

/// True when the decision rule compares magnitudes (|xbar_DM|, |CD|, ...).
bool compares_magnitude(StatisticId id) noexcept;

/// One evaluated statistic. `value` is empty when the statistic could not be
/// computed for these inputs; `reason` then says why.
struct CandidateValue {
    StatisticId statistic_id = StatisticId::xbar_dm;
    std::optional<double> value;
    Direction direction = Direction::smaller_is_stronger_null;
    std::string reason;

    /// The quantity the decision rule compares (|value| for magnitude rules).
    std::optional<double> score() const;
};

/// Decision rule applied to two evaluations of the same statistic: true when
/// experiment 1 is predicted to have the higher null strength, false when
/// experiment 2 is, empty on a tie or a missing value.
std::optional<bool> predicts_first_stronger(const CandidateValue& first,
                                            const CandidateValue& second);

double xbar_dm(const SampleSummary& x, const SampleSummary& y);
double r_xbar_dm(const SampleSummary& x, const SampleSummary& y);
double s_dm(const SampleSummary& x, const SampleSummary& y);
double rs_dm(const SampleSummary& x, const SampleSummary& y);

/// Welch-Satterthwaite degrees of freedom.
double welch_df(const SampleSummary& x, const SampleSummary& y);

/// Welch t statistic (ybar - xbar) / s_DM.
double welch_t(const SampleSummary& x, const SampleSummary& y);

/// Two-tailed Welch t-test p-value.
double welch_p(const SampleSummary& x, const SampleSummary& y);

/// Two one-sided Welch tests against the region bounds; the larger p-value.
double tost_p(const SampleSummary& x, const SampleSummary& y, const NullRegion& region);

/// Two-sided 1 - alpha Welch confidence interval of mu_y - mu_x.
std::pair<double, double> welch_confidence_interval(const SampleSummary& x,
                                                    const SampleSummary& y, double alpha);

/// |I n H0| / |I| * max(|I| / (2|H0|), 1) for explicit intervals.
double sgpv_from_interval(double lower, double upper, double null_lower, double null_upper);

/// Second-generation p-value using the Welch interval at level 1 - alpha_dm.
double sgpv(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
            const NullRegion& region);

/// Posterior odds of non-equivalence under the flat prior: share of posterior
/// difference draws outside the region over the share inside. +inf when no
/// draw falls inside, 0 when all do.
double bf_proxy(const SampleSummary& x, const SampleSummary& y, const NullRegion& region, int k,
                const RngSeed& seed);
double bf_proxy_from_draws(std::span<const double> differences, double lower, double upper);

/// Cohen's d with the pooled standard deviation.
double cohens_d(const SampleSummary& x, const SampleSummary& y);

/// Uniform variate on (0, 1).
double rnd(const RngSeed& seed);

/// Every candidate statistic from one posterior draw set (seed) plus an
/// independent stream for rnd. Statistics that fail carry their reason.
std::vector<CandidateValue> evaluate_all(const SampleSummary& x, const SampleSummary& y,
                                         double alpha_dm, const NullRegion& region, int k,
                                         const RngSeed& seed);

/// Subset of the statistics; cheaper when the stochastic ones are not wanted.
std::vector<CandidateValue> evaluate(std::span<const StatisticId> ids, const SampleSummary& x,
                                     const SampleSummary& y, double alpha_dm,
                                     const NullRegion& region, int k, const RngSeed& seed);

}  // namespace mdm
