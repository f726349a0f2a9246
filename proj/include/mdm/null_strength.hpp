#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>

namespace mdm {

/// Population parameters of one simulated experiment: control (x) and
/// experiment (y) means and variances, group sizes and credible level.
struct PopulationConfig {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double var_x = 1.0;
    double var_y = 1.0;
    int m = 2;
    int n = 2;
    double alpha_dm = 0.05;

    void validate() const;

    friend bool operator==(const PopulationConfig&, const PopulationConfig&) = default;
};

enum class MeasureId { abs_mu_dm, sigma_d, df_d, alpha_dm, abs_r_mu_dm, r_sigma_d };

inline constexpr std::array<MeasureId, 6> kAllMeasures = {
    MeasureId::abs_mu_dm, MeasureId::sigma_d,     MeasureId::df_d,
    MeasureId::alpha_dm,  MeasureId::abs_r_mu_dm, MeasureId::r_sigma_d,
};

std::string_view to_string(MeasureId id) noexcept;
std::optional<MeasureId> measure_from_string(std::string_view name);

enum class StrongerNull { lower, higher };

/// Direction in which each measure moves towards higher null strength.
StrongerNull stronger_null_direction(MeasureId id) noexcept;

bool is_relative_measure(MeasureId id) noexcept;

/// |mu_DM|, sigma_D, df_D, alpha_DM and, when mu_x > 0, |r mu_DM| and r sigma_D.
std::map<MeasureId, double> measures(const PopulationConfig& config);

/// Single measure; empty for relative measures when mu_x <= 0.
std::optional<double> measure_value(const PopulationConfig& config, MeasureId id);

enum class GroundTruth { exp1_higher_ns, exp2_higher_ns, tie };

std::string_view to_string(GroundTruth gt) noexcept;

/// Which experiment has the higher null strength according to one measure.
GroundTruth ground_truth(const PopulationConfig& first, const PopulationConfig& second,
                         MeasureId measure);

/// 0-1 loss: 0 when the prediction agrees with the ground truth. Throws
/// TieGroundTruth for tied ground truth.
int loss(GroundTruth truth, GroundTruth prediction);

}  // namespace mdm
