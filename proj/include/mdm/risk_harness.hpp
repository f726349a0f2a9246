#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdm/candidates.hpp"
#include "mdm/delta_m.hpp"
#include "mdm/null_strength.hpp"
#include "mdm/posterior.hpp"
#include "mdm/rng.hpp"

namespace mdm {

enum class Regime { null_results, positive_results };

std::string_view to_string(Regime regime) noexcept;
std::optional<Regime> regime_from_string(std::string_view name);

/// One comparison-error study: the family of null-strength measures (raw or
/// relative), the measure varied as ground truth (empty = all four varied
/// simultaneously) and the significance regime of the generated configs.
struct Investigation {
    DeltaKind scale = DeltaKind::raw;
    std::optional<MeasureId> independent;
    Regime regime = Regime::null_results;

    bool simultaneous() const { return !independent.has_value(); }

    /// The four measures of this family (location, spread, df, alpha).
    std::vector<MeasureId> family() const;

    /// Measures scored as ground truth: the independent one, or all four.
    std::vector<MeasureId> scored_measures() const;

    std::string label() const;
};

/// Raw family for abs_mu_dm/sigma_d, relative for abs_r_mu_dm/r_sigma_d,
/// `scale` decides for df_d and alpha_dm.
Investigation single_investigation(MeasureId measure, Regime regime,
                                   DeltaKind scale = DeltaKind::raw);

struct ConfigPair {
    PopulationConfig exp1;
    PopulationConfig exp2;
    MeasureId independent_measure = MeasureId::abs_mu_dm;
    Regime regime = Regime::null_results;
};

/// Uniform window; integer-valued knobs draw integers in [lo, hi].
struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

/// A parameter that is either fixed for both experiments or drawn from one of
/// two windows, the window assignment being a fair coin per pair.
struct Knob {
    double fixed = 0.0;
    std::optional<Window> low;
    std::optional<Window> high;

    bool varies() const { return low.has_value(); }
    static Knob constant(double v) { return {v, std::nullopt, std::nullopt}; }
    static Knob windows(Window lo, Window hi) { return {0.0, lo, hi}; }
};

/// Population-parameter template of one investigation. Location and spread
/// are mu_DM and sigma_D (raw) or r mu_DM and r sigma_D (relative); both groups
/// share sigma_D / sqrt(2) and the per-group size.
struct InvestigationDesign {
    Knob location;
    Knob spread;
    Knob group_size;
    Knob alpha;
    double control_mean_1 = 20.0;
    double control_mean_2 = 200.0;
};

InvestigationDesign default_design(const Investigation& investigation);

struct HarnessOptions {
    int k = kDefaultDrawCount;  ///< posterior draws per delta_M evaluation
    int t_ratio_samples = 100;  ///< datasets per expected t-ratio estimate
    int retry_budget = 2000;    ///< rejection-sampling attempts per pair
    unsigned parallelism = 0;   ///< worker threads, 0 = all cores
};

/// |t quantile at alpha_dm| with m + n - 1 degrees of freedom.
double critical_t(const PopulationConfig& config);

/// Mean Welch t over simulated datasets divided by |t_critical|.
double expected_t_ratio(const PopulationConfig& config, int m_samples, const RngSeed& seed);

/// Null regime iff |ratio| <= 1.
Regime classify_t_ratio(double ratio) noexcept;

/// Sample summaries of one simulated dataset, drawn from the exact sampling
/// distributions of the mean and variance of normal observations.
std::pair<SampleSummary, SampleSummary> draw_dataset(const PopulationConfig& config,
                                                     const RngSeed& seed);

std::vector<ConfigPair> generate_config_pairs(const Investigation& investigation, int n_pairs,
                                              const RngSeed& seed,
                                              const HarnessOptions& options = {});
std::vector<ConfigPair> generate_config_pairs(MeasureId measure, Regime regime, int n_pairs,
                                              const RngSeed& seed,
                                              const HarnessOptions& options = {});
std::vector<ConfigPair> generate_config_pairs(const InvestigationDesign& design,
                                              const Investigation& investigation, int n_pairs,
                                              const RngSeed& seed,
                                              const HarnessOptions& options = {});

struct IndependenceCheck {
    bool degenerate = false;          ///< constant designation, no test possible
    std::optional<double> p_value;    ///< two-tailed exact binomial vs 0.5
    int shared = 0;                   ///< pairs sharing the reference designation
    int compared = 0;                 ///< non-tied pairs
};

/// Shared ground-truth designations between `reference` (default: each pair's
/// independent measure) and every other measure.
std::map<MeasureId, IndependenceCheck> verify_designation_independence(
    std::span<const ConfigPair> pairs, std::optional<MeasureId> reference = std::nullopt);

/// Loss counts of several statistics against several ground truths on one pair.
struct LossTally {
    std::vector<StatisticId> statistics;
    std::vector<MeasureId> measures;
    std::vector<std::uint64_t> losses;  ///< row-major statistics x measures
    std::uint64_t decisions = 0;        ///< per cell

    std::uint64_t at(std::size_t stat, std::size_t measure) const {
        return losses[stat * measures.size() + measure];
    }
};

/// M simulated dataset pairs scored against the ground truth of each measure.
/// Tied predictions are broken by a seeded coin; statistics that fail to
/// evaluate count as a loss.
LossTally tally_pair(const ConfigPair& pair, std::span<const StatisticId> statistics,
                     std::span<const MeasureId> measures, const NullRegion& region, int m_samples,
                     const RngSeed& seed, const HarnessOptions& options = {});

/// Mean loss over M samples against the pair's independent measure.
double comparison_error(StatisticId statistic, const ConfigPair& pair, const NullRegion& region,
                        int m_samples, const RngSeed& seed, const HarnessOptions& options = {});

struct ErrorReport {
    StatisticId statistic_id = StatisticId::rnd;
    MeasureId measure = MeasureId::abs_mu_dm;
    Regime regime = Regime::null_results;
    DeltaKind scale = DeltaKind::raw;
    bool simultaneous = false;
    double error_rate = 0.0;
    int n_configs = 0;
    int m_samples_per_config = 0;
    std::uint64_t incorrect = 0;
    std::uint64_t decisions = 0;
    double binomial_p_vs_half = 1.0;
    RngSeed seed;
};

/// Integrated comparison error of every statistic against every scored
/// measure of the investigation. Bit-reproducible for a seed regardless of
/// the worker count.
std::vector<ErrorReport> run_investigation(const Investigation& investigation,
                                           std::span<const StatisticId> statistics, int n_configs,
                                           int m_samples, const NullRegion& region,
                                           const RngSeed& seed,
                                           const HarnessOptions& options = {});

/// Same, on already generated pairs.
std::vector<ErrorReport> score_pairs(const Investigation& investigation,
                                     std::span<const ConfigPair> pairs,
                                     std::span<const StatisticId> statistics, int m_samples,
                                     const NullRegion& region, const RngSeed& seed,
                                     const HarnessOptions& options = {});

ErrorReport integrated_error(StatisticId statistic, MeasureId measure, Regime regime,
                             int n_configs, int m_samples, const NullRegion& region,
                             const RngSeed& seed, const HarnessOptions& options = {},
                             DeltaKind scale = DeltaKind::raw);

/// Error rates relative to random guessing, scaled by the best (lowest) rate
/// of each measure column: (e - 0.5) / (0.5 - e_min). -1 marks the best
/// statistic; empty when no statistic beats 0.5 in that column.
std::vector<std::optional<double>> scaled_error_view(std::span<const ErrorReport> reports);

/// Null region used by the harness for each family: [-1, 1] raw units or
/// [-10%, +10%] of the control sample mean.
NullRegion default_region(DeltaKind scale);

struct CovariationResult {
    double rho = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    std::vector<double> means;  ///< statistic mean per series point
};

struct CovariationOptions {
    int bootstrap_resamples = 1000;
    int bonferroni_tests = 48;  ///< statistics x measures in the heatmap
};

/// Spearman rho between series position and the statistic's mean over
/// m_samples datasets per configuration, with a percentile bootstrap
/// interval at the Bonferroni-adjusted 95% level.
CovariationResult covariation_study(StatisticId statistic, MeasureId measure,
                                    std::span<const PopulationConfig> series, int m_samples,
                                    const NullRegion& region, const RngSeed& seed,
                                    const HarnessOptions& options = {},
                                    const CovariationOptions& covariation = {});

/// Eight configurations moving one measure towards higher null strength with
/// everything else held fixed.
std::vector<PopulationConfig> default_series(MeasureId measure, DeltaKind scale);

}  // namespace mdm
