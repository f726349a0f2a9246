#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mdm/candidates.hpp"
#include "mdm/delta_m.hpp"
#include "mdm/equivalence.hpp"
#include "mdm/posterior.hpp"
#include "mdm/rng.hpp"

namespace mdm {

inline constexpr std::string_view kStudyHeader =
    "group_x,xbar,s_x,m,group_y,ybar,s_y,n,units,alpha,species,provenance,claimed_ne";

struct StudyRecord {
    std::string group_x_label;
    double xbar = 0.0;
    double s_x = 0.0;
    int m = 0;
    std::string group_y_label;
    double ybar = 0.0;
    double s_y = 0.0;
    int n = 0;
    std::string units;
    std::string alpha_expr;
    double alpha = 0.05;  // parsed alpha_expr
    std::string species;
    std::string provenance;
    std::optional<bool> claimed_ne;  // empty when the table has no such column
    bool low_precision = false;      // a magnitude was given in scientific notation
    int line = 0;                    // 1-based line in the source file

    SampleSummary x() const { return {xbar, s_x, m}; }
    SampleSummary y() const { return {ybar, s_y, n}; }
};

/// "0.05" or "0.05/12"; the result must lie in (0, 1).
double parse_alpha_expr(std::string_view expr);

/// Split one CSV document into records of fields (quoted fields may hold
/// commas, doubled quotes and line breaks). Each row keeps its starting line.
struct CsvRow {
    int line = 0;
    std::vector<std::string> fields;
};
std::vector<CsvRow> read_csv(std::istream& in);

std::vector<StudyRecord> parse_study_csv(std::istream& in);
std::vector<StudyRecord> parse_study_csv(const std::filesystem::path& path);

struct StudyReportRow {
    StudyRecord record;
    std::optional<double> r_xbar_dm;
    std::vector<CandidateValue> candidate_values;
    /// r-delta_M, or delta_M when the control posterior reaches zero.
    std::optional<DeltaMResult> r_delta_m;
    std::optional<EquivalenceDecision> decision;
    std::optional<std::pair<double, double>> credible_interval;
    bool control_near_zero = false;
    std::string error;  // why a value is missing
};

/// Per-record analysis at the record's alpha with the null region
/// [-threshold, +threshold] of the control mean. Rows whose control posterior
/// reaches zero fall back to delta_M tested against threshold * xbar.
std::vector<StudyReportRow> analyze_study(const std::vector<StudyRecord>& records,
                                          double threshold_relative, int k, const RngSeed& seed,
                                          unsigned parallelism = 0);

enum class ReportFormat { csv, json };

std::optional<ReportFormat> report_format_from_string(std::string_view name);

/// Column names of the CSV report, in order.
std::vector<std::string> report_columns();

/// Rounded whole percent of a fraction, as printed in the tables.
long percent_rounded(double fraction);

nlohmann::json report_to_json(const std::vector<StudyReportRow>& rows);
std::vector<StudyReportRow> report_from_json(const nlohmann::json& doc);

std::string emit_report(const std::vector<StudyReportRow>& rows, ReportFormat format);

}  // namespace mdm
