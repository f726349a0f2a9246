#include "mdm/study_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mdm/error.hpp"
#include "mdm/parallel.hpp"

namespace mdm {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_header() {
    std::vector<std::string> out;
    std::string_view rest = kStudyHeader;
    while (true) {
        const auto comma = rest.find(',');
        out.emplace_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

[[noreturn]] void value_error(int line, std::string_view column, const std::string& what) {
    throw StatError(ErrorKind::ValueError, "row " + std::to_string(line) + ", column " +
                                               std::string(column) + ": " + what);
}

bool parse_number(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

bool scientific(std::string_view text) {
    return text.find_first_of("eE") != std::string_view::npos;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// JSON has no infinities; non-finite numbers travel as strings.
json number_to_json(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

json optional_number(const std::optional<double>& v) {
    return v ? number_to_json(*v) : json(nullptr);
}

std::optional<double> optional_number_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return number_from_json(j);
}

}  // namespace

double parse_alpha_expr(std::string_view expr) {
    const auto text = trim(expr);
    const auto slash = text.find('/');
    double value = 0.0;
    if (slash == std::string_view::npos) {
        if (!parse_number(text, value)) {
            throw StatError(ErrorKind::ValueError, "alpha is not a number: " + std::string(text));
        }
    } else {
        double num = 0.0, den = 0.0;
        if (!parse_number(text.substr(0, slash), num) || !parse_number(text.substr(slash + 1), den) ||
            den == 0.0) {
            throw StatError(ErrorKind::ValueError, "alpha is not a division: " + std::string(text));
        }
        value = num / den;
    }
    if (!(value > 0.0 && value < 1.0)) {
        throw StatError(ErrorKind::ValueError, "alpha must lie in (0, 1): " + std::string(text));
    }
    return value;
}

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool quoted = false;
    bool row_started = false;
    int line = 1;
    char c = 0;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row = CsvRow{};
        row_started = false;
    };

    while (in.get(c)) {
        if (!row_started) {
            row.line = line;
            row_started = true;
        }
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"': quoted = true; break;
        case ',': end_field(); break;
        case '\r': break;
        case '\n':
            end_row();
            ++line;
            break;
        default: field += c;
        }
    }
    if (quoted) {
        throw StatError(ErrorKind::ValueError,
                        "row " + std::to_string(row.line) + ": unterminated quoted field");
    }
    if (row_started) end_row();
    return rows;
}

std::vector<StudyRecord> parse_study_csv(std::istream& in) {
    auto rows = read_csv(in);
    if (!rows.empty() && !rows.front().fields.empty() && rows.front().fields.front().starts_with("\xEF\xBB\xBF")) {
        rows.front().fields.front().erase(0, 3);
    }
    // comments and blank lines
    std::erase_if(rows, [](const CsvRow& r) {
        if (r.fields.size() == 1 && trim(r.fields[0]).empty()) return true;
        return !r.fields.empty() && trim(r.fields[0]).starts_with("#");
    });
    if (rows.empty()) throw StatError(ErrorKind::SchemaMismatch, "no header row");

    const auto expected = split_header();
    std::vector<std::string> header;
    for (const auto& f : rows.front().fields) header.emplace_back(trim(f));

    if (header != expected) {
        const std::set<std::string> have(header.begin(), header.end());
        const std::set<std::string> want(expected.begin(), expected.end());
        std::string missing, extra;
        for (const auto& w : expected) {
            if (!have.contains(w)) missing += (missing.empty() ? "" : ", ") + w;
        }
        for (const auto& h : header) {
            if (!want.contains(h)) extra += (extra.empty() ? "" : ", ") + h;
        }
        std::string msg;
        if (!missing.empty()) msg += "missing column(s): " + missing;
        if (!extra.empty()) msg += (msg.empty() ? "" : "; ") + std::string("unexpected column(s): ") + extra;
        if (msg.empty()) msg = "columns out of order, expected: " + std::string(kStudyHeader);
        throw StatError(ErrorKind::SchemaMismatch, msg);
    }

    std::vector<StudyRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != expected.size()) {
            throw StatError(ErrorKind::ValueError,
                            "row " + std::to_string(row.line) + ": expected " +
                                std::to_string(expected.size()) + " fields, got " +
                                std::to_string(row.fields.size()));
        }
        StudyRecord rec;
        rec.line = row.line;
        auto text = [&](int i) { return std::string(trim(row.fields[static_cast<std::size_t>(i)])); };
        auto real = [&](int i) {
            double v = 0.0;
            const auto& f = row.fields[static_cast<std::size_t>(i)];
            if (!parse_number(f, v)) value_error(row.line, expected[static_cast<std::size_t>(i)], "not a number: '" + f + "'");
            if (scientific(f)) rec.low_precision = true;
            return v;
        };
        auto integer = [&](int i) {
            const double v = real(i);
            if (v != std::floor(v) || v < 2 || v > 1e9) {
                value_error(row.line, expected[static_cast<std::size_t>(i)], "group size must be an integer >= 2");
            }
            return static_cast<int>(v);
        };
        auto positive = [&](int i) {
            const double v = real(i);
            if (!(v > 0.0)) value_error(row.line, expected[static_cast<std::size_t>(i)], "sd must be positive");
            return v;
        };

        rec.group_x_label = text(0);
        rec.xbar = real(1);
        rec.s_x = positive(2);
        rec.m = integer(3);
        rec.group_y_label = text(4);
        rec.ybar = real(5);
        rec.s_y = positive(6);
        rec.n = integer(7);
        rec.units = text(8);
        rec.alpha_expr = text(9);
        try {
            rec.alpha = parse_alpha_expr(rec.alpha_expr);
        } catch (const StatError& e) {
            value_error(row.line, "alpha", e.detail());
        }
        rec.species = text(10);
        rec.provenance = text(11);
        auto ne = text(12);
        std::transform(ne.begin(), ne.end(), ne.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ne == "yes" || ne == "y" || ne == "true" || ne == "1") {
            rec.claimed_ne = true;
        } else if (ne == "no" || ne == "n" || ne == "false" || ne == "0") {
            rec.claimed_ne = false;
        } else if (!ne.empty()) {
            value_error(row.line, "claimed_ne", "expected yes/no, got '" + ne + "'");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<StudyRecord> parse_study_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StatError(ErrorKind::Io, "cannot open " + path.string());
    return parse_study_csv(in);
}

std::vector<StudyReportRow> analyze_study(const std::vector<StudyRecord>& records,
                                          double threshold_relative, int k, const RngSeed& seed,
                                          unsigned parallelism) {
    if (!(threshold_relative > 0.0)) {
        throw StatError(ErrorKind::InvalidArgument, "threshold must be positive");
    }
    const auto region = NullRegion::symmetric(threshold_relative, RegionScale::relative_to_control_mean);

    std::vector<StudyReportRow> rows(records.size());
    parallel_for(records.size(), parallelism, [&](std::size_t i) {
        auto& row = rows[i];
        row.record = records[i];
        const auto x = row.record.x();
        const auto y = row.record.y();
        const double alpha = row.record.alpha;
        const auto rs = derive(seed, {static_cast<std::uint64_t>(i)});

        try {
            x.validate();
            y.validate();
        } catch (const StatError& e) {
            row.error = e.what();
            return;
        }
        try {
            row.r_xbar_dm = r_xbar_dm(x, y);
        } catch (const StatError& e) {
            row.error = e.what();
        }
        row.candidate_values = evaluate_all(x, y, alpha, region, k, rs);

        const auto draws = draw_posterior_means(x, y, k, rs);
        std::vector<double> shown;
        try {
            row.r_delta_m = r_delta_m_from_draws(draws, alpha);
            shown = relative_difference_draws(draws);
        } catch (const StatError& e) {
            if (e.kind() != ErrorKind::ControlNearZero && e.kind() != ErrorKind::ControlMeanNotPositive) throw;
            row.control_near_zero = true;
            row.error = e.what();
            row.r_delta_m = delta_m_from_draws(draws, alpha);
            shown = difference_draws(draws);
        }
        row.credible_interval = equal_tailed_interval(shown, alpha);

        Threshold threshold{threshold_relative, DeltaKind::relative};
        if (row.control_near_zero) threshold = {threshold_relative * x.mean, DeltaKind::raw};
        try {
            row.decision = test_negligible(*row.r_delta_m, threshold);
        } catch (const StatError& e) {
            row.error = e.what();
        }
    });
    return rows;
}

std::optional<ReportFormat> report_format_from_string(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    return std::nullopt;
}

std::vector<std::string> report_columns() {
    std::vector<std::string> cols = {"provenance", "group_x", "group_y", "rxbar_dm_pct"};
    for (auto id : kAllStatistics) cols.emplace_back(to_string(id));
    for (const char* c : {"null_strength", "null_strength_kind", "decision", "ci_lower", "ci_upper",
                          "alpha", "control_near_zero", "low_precision", "error"}) {
        cols.emplace_back(c);
    }
    return cols;
}

long percent_rounded(double fraction) { return std::lround(fraction * 100.0); }

json report_to_json(const std::vector<StudyReportRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        const auto& r = row.record;
        json rec = {
            {"group_x", r.group_x_label}, {"xbar", r.xbar},           {"s_x", r.s_x},
            {"m", r.m},                   {"group_y", r.group_y_label}, {"ybar", r.ybar},
            {"s_y", r.s_y},               {"n", r.n},                 {"units", r.units},
            {"alpha_expr", r.alpha_expr}, {"alpha", r.alpha},         {"species", r.species},
            {"provenance", r.provenance}, {"low_precision", r.low_precision}, {"line", r.line},
        };
        rec["claimed_ne"] = r.claimed_ne ? json(*r.claimed_ne) : json(nullptr);

        json candidates = json::array();
        for (const auto& cv : row.candidate_values) {
            candidates.push_back({{"statistic", to_string(cv.statistic_id)},
                                  {"value", optional_number(cv.value)},
                                  {"direction", to_string(cv.direction)},
                                  {"reason", cv.reason}});
        }

        json j;
        j["record"] = rec;
        j["r_xbar_dm"] = optional_number(row.r_xbar_dm);
        j["r_xbar_dm_pct"] = row.r_xbar_dm ? json(percent_rounded(*row.r_xbar_dm)) : json(nullptr);
        j["candidates"] = candidates;
        if (row.r_delta_m) {
            const auto& d = *row.r_delta_m;
            j["null_strength"] = {{"value", number_to_json(d.value)},
                                  {"kind", to_string(d.kind)},
                                  {"alpha_dm", d.alpha_dm},
                                  {"k", d.k},
                                  {"seed", {{"master", d.seed.master_seed}, {"stream", d.seed.stream_id}}}};
        } else {
            j["null_strength"] = nullptr;
        }
        if (row.decision) {
            j["decision"] = {{"designation", to_string(row.decision->designation)},
                             {"threshold", number_to_json(row.decision->threshold.value)},
                             {"threshold_kind", to_string(row.decision->threshold.kind)}};
        } else {
            j["decision"] = nullptr;
        }
        j["credible_interval"] = row.credible_interval
                                     ? json::array({number_to_json(row.credible_interval->first),
                                                    number_to_json(row.credible_interval->second)})
                                     : json(nullptr);
        j["control_near_zero"] = row.control_near_zero;
        j["error"] = row.error;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<StudyReportRow> report_from_json(const json& doc) {
    auto kind_from = [](const std::string& s) {
        return s == "relative" ? DeltaKind::relative : DeltaKind::raw;
    };
    std::vector<StudyReportRow> rows;
    for (const auto& j : doc) {
        StudyReportRow row;
        const auto& rec = j.at("record");
        auto& r = row.record;
        r.group_x_label = rec.at("group_x").get<std::string>();
        r.xbar = rec.at("xbar").get<double>();
        r.s_x = rec.at("s_x").get<double>();
        r.m = rec.at("m").get<int>();
        r.group_y_label = rec.at("group_y").get<std::string>();
        r.ybar = rec.at("ybar").get<double>();
        r.s_y = rec.at("s_y").get<double>();
        r.n = rec.at("n").get<int>();
        r.units = rec.at("units").get<std::string>();
        r.alpha_expr = rec.at("alpha_expr").get<std::string>();
        r.alpha = rec.at("alpha").get<double>();
        r.species = rec.at("species").get<std::string>();
        r.provenance = rec.at("provenance").get<std::string>();
        r.low_precision = rec.at("low_precision").get<bool>();
        r.line = rec.at("line").get<int>();
        if (!rec.at("claimed_ne").is_null()) r.claimed_ne = rec.at("claimed_ne").get<bool>();

        row.r_xbar_dm = optional_number_from_json(j.at("r_xbar_dm"));
        for (const auto& c : j.at("candidates")) {
            CandidateValue cv;
            const auto id = statistic_from_string(c.at("statistic").get<std::string>());
            if (!id) throw StatError(ErrorKind::SchemaMismatch, "unknown statistic in report");
            cv.statistic_id = *id;
            cv.direction = direction_of(*id);
            cv.value = optional_number_from_json(c.at("value"));
            cv.reason = c.at("reason").get<std::string>();
            row.candidate_values.push_back(std::move(cv));
        }
        if (const auto& ns = j.at("null_strength"); !ns.is_null()) {
            DeltaMResult d;
            d.value = number_from_json(ns.at("value"));
            d.kind = kind_from(ns.at("kind").get<std::string>());
            d.alpha_dm = ns.at("alpha_dm").get<double>();
            d.k = ns.at("k").get<int>();
            d.seed = {ns.at("seed").at("master").get<std::uint64_t>(),
                      ns.at("seed").at("stream").get<std::uint64_t>()};
            row.r_delta_m = d;
        }
        if (const auto& dj = j.at("decision"); !dj.is_null() && row.r_delta_m) {
            EquivalenceDecision dec;
            dec.delta_m = *row.r_delta_m;
            dec.threshold = {number_from_json(dj.at("threshold")),
                             kind_from(dj.at("threshold_kind").get<std::string>())};
            dec.designation = dj.at("designation").get<std::string>() == to_string(Designation::practically_equivalent)
                                  ? Designation::practically_equivalent
                                  : Designation::not_practically_equivalent;
            row.decision = dec;
        }
        if (const auto& ci = j.at("credible_interval"); !ci.is_null()) {
            row.credible_interval = std::pair{number_from_json(ci.at(0)), number_from_json(ci.at(1))};
        }
        row.control_near_zero = j.at("control_near_zero").get<bool>();
        row.error = j.at("error").get<std::string>();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string emit_report(const std::vector<StudyReportRow>& rows, ReportFormat format) {
    if (format == ReportFormat::json) return report_to_json(rows).dump(2) + "\n";

    std::ostringstream out;
    const auto cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& row : rows) {
        std::vector<std::string> f;
        f.push_back(row.record.provenance);
        f.push_back(row.record.group_x_label);
        f.push_back(row.record.group_y_label);
        f.push_back(row.r_xbar_dm ? std::to_string(percent_rounded(*row.r_xbar_dm)) : "");
        for (auto id : kAllStatistics) {
            const auto it = std::find_if(row.candidate_values.begin(), row.candidate_values.end(),
                                         [id](const CandidateValue& cv) { return cv.statistic_id == id; });
            f.push_back(it != row.candidate_values.end() && it->value ? format_number(*it->value) : "");
        }
        f.push_back(row.r_delta_m ? format_number(row.r_delta_m->value) : "");
        f.push_back(row.r_delta_m ? std::string(to_string(row.r_delta_m->kind)) : "");
        f.push_back(row.decision ? std::string(to_string(row.decision->designation)) : "");
        f.push_back(row.credible_interval ? format_number(row.credible_interval->first) : "");
        f.push_back(row.credible_interval ? format_number(row.credible_interval->second) : "");
        f.push_back(format_number(row.record.alpha));
        f.push_back(row.control_near_zero ? "true" : "false");
        f.push_back(row.record.low_precision ? "true" : "false");
        f.push_back(row.error);
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << csv_field(f[i]);
        out << "\n";
    }
    return out.str();
}

}  // namespace mdm
