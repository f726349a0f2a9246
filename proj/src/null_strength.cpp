#include "mdm/null_strength.hpp"

#include <cmath>
#include <string>

#include "mdm/error.hpp"

namespace mdm {

void PopulationConfig::validate() const {
    if (!(var_x > 0.0) || !(var_y > 0.0)) {
        throw StatError(ErrorKind::InvalidArgument, "population variances must be positive");
    }
    if (m < 2 || n < 2) {
        throw StatError(ErrorKind::InvalidArgument, "group sizes must be at least 2");
    }
    if (!(alpha_dm > 0.0 && alpha_dm < 1.0)) {
        throw StatError(ErrorKind::InvalidArgument, "alpha_dm must lie in (0, 1)");
    }
    if (!std::isfinite(mu_x) || !std::isfinite(mu_y)) {
        throw StatError(ErrorKind::InvalidArgument, "population means must be finite");
    }
}

std::string_view to_string(MeasureId id) noexcept {
    switch (id) {
    case MeasureId::abs_mu_dm: return "abs_mu_dm";
    case MeasureId::sigma_d: return "sigma_d";
    case MeasureId::df_d: return "df_d";
    case MeasureId::alpha_dm: return "alpha_dm";
    case MeasureId::abs_r_mu_dm: return "abs_r_mu_dm";
    case MeasureId::r_sigma_d: return "r_sigma_d";
    }
    return "unknown";
}

std::optional<MeasureId> measure_from_string(std::string_view name) {
    for (auto id : kAllMeasures) {
        if (to_string(id) == name) return id;
    }
    if (name == "mu_dm") return MeasureId::abs_mu_dm;
    if (name == "r_mu_dm") return MeasureId::abs_r_mu_dm;
    if (name == "df") return MeasureId::df_d;
    if (name == "alpha") return MeasureId::alpha_dm;
    return std::nullopt;
}

StrongerNull stronger_null_direction(MeasureId id) noexcept {
    switch (id) {
    case MeasureId::df_d:
    case MeasureId::alpha_dm:
        return StrongerNull::higher;
    default:
        return StrongerNull::lower;
    }
}

bool is_relative_measure(MeasureId id) noexcept {
    return id == MeasureId::abs_r_mu_dm || id == MeasureId::r_sigma_d;
}

std::optional<double> measure_value(const PopulationConfig& c, MeasureId id) {
    const double mu_dm = c.mu_y - c.mu_x;
    const double sigma_d = std::sqrt(c.var_x + c.var_y);
    switch (id) {
    case MeasureId::abs_mu_dm: return std::abs(mu_dm);
    case MeasureId::sigma_d: return sigma_d;
    case MeasureId::df_d: return static_cast<double>(c.m + c.n - 2);
    case MeasureId::alpha_dm: return c.alpha_dm;
    case MeasureId::abs_r_mu_dm:
        if (!(c.mu_x > 0.0)) return std::nullopt;
        return std::abs(mu_dm / c.mu_x);
    case MeasureId::r_sigma_d:
        if (!(c.mu_x > 0.0)) return std::nullopt;
        return sigma_d / c.mu_x;
    }
    return std::nullopt;
}

std::map<MeasureId, double> measures(const PopulationConfig& config) {
    config.validate();
    std::map<MeasureId, double> out;
    for (auto id : kAllMeasures) {
        if (auto v = measure_value(config, id)) out.emplace(id, *v);
    }
    return out;
}

std::string_view to_string(GroundTruth gt) noexcept {
    switch (gt) {
    case GroundTruth::exp1_higher_ns: return "exp1_higher_ns";
    case GroundTruth::exp2_higher_ns: return "exp2_higher_ns";
    case GroundTruth::tie: return "tie";
    }
    return "unknown";
}

GroundTruth ground_truth(const PopulationConfig& first, const PopulationConfig& second,
                         MeasureId measure) {
    const auto a = measure_value(first, measure);
    const auto b = measure_value(second, measure);
    if (!a || !b) {
        throw StatError(ErrorKind::ControlMeanNotPositive,
                        std::string(to_string(measure)) + " needs positive control means");
    }
    if (*a == *b) return GroundTruth::tie;
    const bool first_lower = *a < *b;
    const bool first_wins =
        stronger_null_direction(measure) == StrongerNull::lower ? first_lower : !first_lower;
    return first_wins ? GroundTruth::exp1_higher_ns : GroundTruth::exp2_higher_ns;
}

int loss(GroundTruth truth, GroundTruth prediction) {
    if (truth == GroundTruth::tie) {
        throw StatError(ErrorKind::TieGroundTruth, "ground truth is a tie; loss is undefined");
    }
    return truth == prediction ? 0 : 1;
}

}  // namespace mdm
