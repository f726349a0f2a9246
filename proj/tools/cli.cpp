#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mdm/candidates.hpp"
#include "mdm/delta_m.hpp"
#include "mdm/error.hpp"
#include "mdm/null_strength.hpp"
#include "mdm/posterior.hpp"
#include "mdm/risk_harness.hpp"
#include "mdm/study_io.hpp"

namespace mdm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    int k = kDefaultDrawCount;
    std::string format = "json";
    std::string output = "-";
    unsigned parallelism = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_parallelism) {
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--k", c.k, "Posterior draws per evaluation")->check(CLI::Range(kMinDrawCount, 100000000));
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output,-o", c.output, "Output file, - for stdout");
    if (with_parallelism) sub->add_option("--parallelism", c.parallelism, "Worker threads, 0 = all cores");
}

json manifest(const std::string& command, const std::vector<std::string>& args, const Common& c) {
    return {{"tool", "mdm"},
            {"version", kVersion},
            {"command", command},
            {"arguments", std::vector<std::string>(args.begin() + 1, args.end())},
            {"seed", c.seed},
            {"k", c.k}};
}

std::string csv_manifest_line(const json& m) { return "# manifest: " + m.dump() + "\n"; }

// Write to a sibling temp file, then rename over the target.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw StatError(ErrorKind::Io, "cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw StatError(ErrorKind::Io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw StatError(ErrorKind::Io, "cannot move output into place: " + target.string());
    }
}

std::vector<double> read_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StatError(ErrorKind::Io, "cannot open " + path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (auto& ch : line) {
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        }
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                values.push_back(v);
            } catch (const std::exception&) {
                if (first) continue;  // header
                throw UsageError("non-numeric observation '" + tok + "' in " + path);
            }
        }
        first = false;
    }
    return values;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json seed_json(const RngSeed& s) { return {{"master", s.master_seed}, {"stream", s.stream_id}}; }

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": not a number list: " + text);
        }
    }
    if (out.empty()) throw UsageError(std::string(flag) + " is empty");
    return out;
}

// ---- compute

struct GroupFlags {
    std::optional<double> mean;
    std::optional<double> sd;
    std::optional<int> n;
    std::string file;
};

SampleSummary group_summary(const GroupFlags& g, const char* mean_flag, const char* sd_flag,
                            const char* n_flag, const char* file_flag) {
    const bool any_summary = g.mean || g.sd || g.n;
    if (!g.file.empty()) {
        if (any_summary) {
            throw UsageError(std::string(file_flag) + " cannot be combined with " + mean_flag + "/" +
                             sd_flag + "/" + n_flag);
        }
        const auto obs = read_observations(g.file);
        if (obs.size() < 2) throw UsageError(std::string(file_flag) + " needs at least 2 observations");
        return summarize(obs);
    }
    if (!g.mean) throw UsageError(std::string(mean_flag) + " is required");
    if (!g.sd) throw UsageError(std::string(sd_flag) + " is required");
    if (!g.n) throw UsageError(std::string(n_flag) + " is required");
    if (!std::isfinite(*g.mean)) throw UsageError(std::string(mean_flag) + " must be finite");
    if (!(*g.sd > 0.0) || !std::isfinite(*g.sd)) throw UsageError(std::string(sd_flag) + " must be positive");
    if (*g.n < 2) throw UsageError(std::string(n_flag) + " must be at least 2");
    return {*g.mean, *g.sd, *g.n};
}

int cmd_compute(const GroupFlags& gx, const GroupFlags& gy, double alpha, bool relative,
                const Common& c, const json& man, std::ostream& out) {
    const auto x = group_summary(gx, "--xbar", "--sx", "--m", "--x-file");
    const auto y = group_summary(gy, "--ybar", "--sy", "--n", "--y-file");
    const RngSeed seed{c.seed, 0};
    DeltaMResult r;
    try {
        r = relative ? compute_r_delta_m(x, y, alpha, c.k, seed) : compute_delta_m(x, y, alpha, c.k, seed);
    } catch (const StatError& e) {
        if (e.kind() == ErrorKind::ControlNearZero || e.kind() == ErrorKind::ControlMeanNotPositive) {
            throw StatError(e.kind(), e.detail() + "; rerun without --relative for raw delta_M");
        }
        throw;
    }
    const std::string name = relative ? "r_delta_m" : "delta_m";
    std::string doc;
    if (c.format == "json") {
        json j = {{"manifest", man},
                  {"result",
                   {{"statistic", name},
                    {"value", r.value},
                    {"credible_level", 1.0 - r.alpha_dm},
                    {"alpha_dm", r.alpha_dm},
                    {"k", r.k},
                    {"seed", seed_json(r.seed)}}}};
        doc = j.dump(2) + "\n";
    } else {
        doc = csv_manifest_line(man) + "statistic,value,credible_level,alpha_dm,k,seed\n" + name + "," +
              fmt(r.value) + "," + fmt(1.0 - r.alpha_dm) + "," + fmt(r.alpha_dm) + "," +
              std::to_string(r.k) + "," + std::to_string(r.seed.master_seed) + "\n";
    }
    write_output(c.output, doc, out);
    return kExitOk;
}

// ---- study

int cmd_study(const std::string& input, double threshold, const Common& c, const json& man,
              std::ostream& out) {
    if (!(threshold > 0.0)) throw UsageError("--threshold must be positive");
    const auto records = parse_study_csv(fs::path(input));
    const auto rows = analyze_study(records, threshold, c.k, RngSeed{c.seed, 0}, c.parallelism);
    std::string doc;
    if (c.format == "json") {
        doc = json{{"manifest", man}, {"rows", report_to_json(rows)}}.dump(2) + "\n";
    } else {
        doc = csv_manifest_line(man) + emit_report(rows, ReportFormat::csv);
    }
    write_output(c.output, doc, out);
    return kExitOk;
}

// ---- simulate

struct SimulateFlags {
    std::string measure;
    std::string regime = "null";
    std::string scale = "raw";
    std::string statistics = "all";
    int n_configs = 200;
    int m_samples = 50;
    int t_ratio_samples = 100;
    std::optional<double> half_width;
    bool scaled = false;
};

std::vector<StatisticId> parse_statistics(const std::string& text) {
    if (text == "all") return {kAllStatistics.begin(), kAllStatistics.end()};
    std::vector<StatisticId> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto id = statistic_from_string(tok);
        if (!id) throw UsageError("--statistics: unknown statistic '" + tok + "'");
        out.push_back(*id);
    }
    if (out.empty()) throw UsageError("--statistics is empty");
    return out;
}

json report_json(const ErrorReport& r, const std::optional<double>& scaled) {
    json j = {{"statistic", to_string(r.statistic_id)},
              {"measure", to_string(r.measure)},
              {"regime", to_string(r.regime)},
              {"scale", to_string(r.scale)},
              {"simultaneous", r.simultaneous},
              {"error_rate", r.error_rate},
              {"n_configs", r.n_configs},
              {"m_samples", r.m_samples_per_config},
              {"incorrect", r.incorrect},
              {"decisions", r.decisions},
              {"binomial_p", r.binomial_p_vs_half},
              {"seed", seed_json(r.seed)}};
    if (scaled) j["scaled_error"] = *scaled;
    return j;
}

int cmd_simulate(const SimulateFlags& f, const Common& c, const json& man, std::ostream& out) {
    const auto regime = regime_from_string(f.regime);
    if (!regime) throw UsageError("--regime must be null or positive");
    const DeltaKind scale = f.scale == "relative" ? DeltaKind::relative : DeltaKind::raw;
    if (f.n_configs < 50) throw UsageError("--n-configs must be at least 50");
    if (f.m_samples < 50) throw UsageError("--m-samples must be at least 50");
    if (f.t_ratio_samples < 30) throw UsageError("--t-ratio-samples must be at least 30");
    const auto stats = parse_statistics(f.statistics);

    std::vector<Investigation> investigations;
    if (f.measure == "simultaneous") {
        investigations.push_back({scale, std::nullopt, *regime});
    } else if (f.measure == "all") {
        Investigation probe{scale, std::nullopt, *regime};
        for (auto m : probe.family()) investigations.push_back(single_investigation(m, *regime, scale));
    } else {
        const auto m = measure_from_string(f.measure);
        if (!m) throw UsageError("--measure: unknown measure '" + f.measure + "'");
        investigations.push_back(single_investigation(*m, *regime, scale));
    }

    HarnessOptions options;
    options.k = c.k;
    options.t_ratio_samples = f.t_ratio_samples;
    options.parallelism = c.parallelism;

    std::vector<ErrorReport> reports;
    for (std::size_t i = 0; i < investigations.size(); ++i) {
        const auto& inv = investigations[i];
        NullRegion region = default_region(inv.scale);
        if (f.half_width) {
            if (!(*f.half_width > 0.0)) throw UsageError("--region-half-width must be positive");
            region = NullRegion::symmetric(*f.half_width, region.scale);
        }
        const auto part = run_investigation(inv, stats, f.n_configs, f.m_samples, region,
                                            RngSeed{c.seed, static_cast<std::uint64_t>(i)}, options);
        reports.insert(reports.end(), part.begin(), part.end());
    }
    std::vector<std::optional<double>> scaled(reports.size());
    if (f.scaled) scaled = scaled_error_view(reports);

    std::string doc;
    if (c.format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) arr.push_back(report_json(reports[i], scaled[i]));
        doc = json{{"manifest", man}, {"reports", arr}}.dump(2) + "\n";
    } else {
        std::ostringstream s;
        s << csv_manifest_line(man)
          << "statistic,measure,regime,scale,simultaneous,error_rate,n_configs,m_samples,incorrect,"
             "decisions,binomial_p,seed_master,seed_stream,scaled_error\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            s << to_string(r.statistic_id) << ',' << to_string(r.measure) << ',' << to_string(r.regime)
              << ',' << to_string(r.scale) << ',' << (r.simultaneous ? "true" : "false") << ','
              << fmt(r.error_rate) << ',' << r.n_configs << ',' << r.m_samples_per_config << ','
              << r.incorrect << ',' << r.decisions << ',' << fmt(r.binomial_p_vs_half) << ','
              << r.seed.master_seed << ',' << r.seed.stream_id << ','
              << (scaled[i] ? fmt(*scaled[i]) : "") << '\n';
        }
        doc = s.str();
    }
    write_output(c.output, doc, out);
    return kExitOk;
}

// ---- calibrate

std::vector<CalibrationPoint> parse_config_grid(const std::string& text) {
    if (text == "default") return default_calibration_grid();
    std::vector<CalibrationPoint> grid;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw UsageError("--config-grid entries are effect:n, got '" + tok + "'");
        try {
            const double effect = std::stod(tok.substr(0, colon));
            const int n = std::stoi(tok.substr(colon + 1));
            if (n < 2) throw UsageError("--config-grid: n must be at least 2");
            grid.push_back({effect, n});
        } catch (const std::logic_error&) {
            throw UsageError("--config-grid: cannot parse '" + tok + "'");
        }
    }
    if (grid.empty()) throw UsageError("--config-grid is empty");
    return grid;
}

int cmd_calibrate(const std::string& alpha_grid, const std::string& config_grid,
                  const std::string& kind, const Common& c, const json& man, std::ostream& out) {
    const auto alphas = parse_list(alpha_grid, "--alpha-grid");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw UsageError("--alpha-grid values must lie in (0, 1)");
    }
    const auto grid = parse_config_grid(config_grid);
    std::vector<DeltaKind> kinds;
    if (kind != "relative") kinds.push_back(DeltaKind::raw);
    if (kind != "raw") kinds.push_back(DeltaKind::relative);

    json rows = json::array();
    std::ostringstream csv;
    csv << csv_manifest_line(man) << "alpha,kind,target,mean_credibility,configs\n";
    std::uint64_t stream = 0;
    for (double a : alphas) {
        for (auto kd : kinds) {
            const double rate = mean_credibility(a, kd, grid, c.k, RngSeed{c.seed, stream++}, c.parallelism);
            rows.push_back({{"alpha", a},
                            {"kind", to_string(kd)},
                            {"target", 1.0 - a},
                            {"mean_credibility", rate},
                            {"configs", grid.size()}});
            csv << fmt(a) << ',' << to_string(kd) << ',' << fmt(1.0 - a) << ',' << fmt(rate) << ','
                << grid.size() << '\n';
        }
    }
    const std::string doc =
        c.format == "json" ? json{{"manifest", man}, {"rows", rows}}.dump(2) + "\n" : csv.str();
    write_output(c.output, doc, out);
    return kExitOk;
}

// ---- covary

int cmd_covary(const std::string& statistic, const std::string& measure, const std::string& scale_name,
               int m_samples, int bootstrap, const Common& c, const json& man, std::ostream& out) {
    const auto stat = statistic_from_string(statistic);
    if (!stat) throw UsageError("--statistic: unknown statistic '" + statistic + "'");
    const auto m = measure_from_string(measure);
    if (!m) throw UsageError("--measure: unknown measure '" + measure + "'");
    if (m_samples < 2) throw UsageError("--m-samples must be at least 2");
    const DeltaKind scale = scale_name == "relative" ? DeltaKind::relative : DeltaKind::raw;
    const auto series = default_series(*m, scale);
    HarnessOptions options;
    options.k = c.k;
    options.parallelism = c.parallelism;
    CovariationOptions cov;
    cov.bootstrap_resamples = bootstrap;
    const auto inv = single_investigation(*m, Regime::null_results, scale);
    const auto r = covariation_study(*stat, *m, series, m_samples, default_region(inv.scale),
                                     RngSeed{c.seed, 0}, options, cov);
    std::string doc;
    if (c.format == "json") {
        doc = json{{"manifest", man},
                   {"result",
                    {{"statistic", statistic},
                     {"measure", to_string(*m)},
                     {"rho", r.rho},
                     {"ci_lower", r.ci_lower},
                     {"ci_upper", r.ci_upper},
                     {"means", r.means}}}}
                  .dump(2) +
              "\n";
    } else {
        doc = csv_manifest_line(man) + "statistic,measure,rho,ci_lower,ci_upper\n" + statistic + "," +
              std::string(to_string(*m)) + "," + fmt(r.rho) + "," + fmt(r.ci_lower) + "," +
              fmt(r.ci_upper) + "\n";
    }
    write_output(c.output, doc, out);
    return kExitOk;
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Most difference in means: compute, study tables, simulate, calibrate", "mdm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.option_defaults()->always_capture_default();

    Common common;

    GroupFlags gx, gy;
    double alpha = 0.05;
    bool relative = false;
    auto* compute = app.add_subcommand("compute", "delta_M or r-delta_M from two summaries");
    compute->add_option("--xbar", gx.mean, "Control sample mean");
    compute->add_option("--sx", gx.sd, "Control sample sd");
    compute->add_option("--m", gx.n, "Control group size");
    compute->add_option("--ybar", gy.mean, "Experiment sample mean");
    compute->add_option("--sy", gy.sd, "Experiment sample sd");
    compute->add_option("--n", gy.n, "Experiment group size");
    compute->add_option("--x-file", gx.file, "Control observations (reduced to a summary)");
    compute->add_option("--y-file", gy.file, "Experiment observations (reduced to a summary)");
    compute->add_option("--alpha", alpha, "alpha_DM, credibility 1 - alpha")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    compute->add_flag("--relative", relative, "r-delta_M relative to the control mean");
    add_common(compute, common, false);

    std::string input;
    double threshold = 0.0;
    auto* study = app.add_subcommand("study", "Analyze a study table");
    study->add_option("--input,-i", input, "Study CSV")->required();
    study->add_option("--threshold", threshold, "Relative null-region half width, e.g. 0.30")->required();
    add_common(study, common, true);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Comparison-error harness");
    simulate->add_option("--measure", sim.measure, "Ground-truth measure, all, or simultaneous")->required();
    simulate->add_option("--regime", sim.regime, "null or positive")->check(CLI::IsMember({"null", "positive"}));
    simulate->add_option("--scale", sim.scale, "raw or relative family for df_d/alpha_dm")
        ->check(CLI::IsMember({"raw", "relative"}));
    simulate->add_option("--statistics", sim.statistics, "all or comma-separated statistic ids");
    simulate->add_option("--n-configs", sim.n_configs, "Config pairs");
    simulate->add_option("--m-samples", sim.m_samples, "Dataset pairs per config pair");
    simulate->add_option("--t-ratio-samples", sim.t_ratio_samples, "Datasets per expected t-ratio");
    simulate->add_option("--region-half-width", sim.half_width, "Null region half width (raw units or fraction)");
    simulate->add_flag("--scaled", sim.scaled, "Add the scaled error view");
    add_common(simulate, common, true);

    std::string alpha_grid = "0.05,0.1,0.2";
    std::string config_grid = "default";
    std::string kind = "both";
    auto* calibrate = app.add_subcommand("calibrate", "Mean credibility rate over a config grid");
    calibrate->add_option("--alpha-grid", alpha_grid, "Comma-separated alphas");
    calibrate->add_option("--config-grid", config_grid, "default, or effect:n pairs e.g. 0:6,1:12");
    calibrate->add_option("--kind", kind, "raw, relative or both")->check(CLI::IsMember({"raw", "relative", "both"}));
    add_common(calibrate, common, true);

    std::string statistic, measure, scale = "raw";
    int m_samples = 1000;
    int bootstrap = 1000;
    auto* covary = app.add_subcommand("covary", "Spearman rho of a statistic along a measure series");
    covary->add_option("--statistic", statistic, "Statistic id")->required();
    covary->add_option("--measure", measure, "Measure moved by the series")->required();
    covary->add_option("--scale", scale, "raw or relative family")->check(CLI::IsMember({"raw", "relative"}));
    covary->add_option("--m-samples", m_samples, "Datasets per series point");
    covary->add_option("--bootstrap", bootstrap, "Bootstrap resamples")->check(CLI::Range(10, 1000000));
    add_common(covary, common, true);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (compute->parsed()) {
            return cmd_compute(gx, gy, alpha, relative, common, manifest("compute", args, common), out);
        }
        if (study->parsed()) return cmd_study(input, threshold, common, manifest("study", args, common), out);
        if (simulate->parsed()) return cmd_simulate(sim, common, manifest("simulate", args, common), out);
        if (calibrate->parsed()) {
            return cmd_calibrate(alpha_grid, config_grid, kind, common, manifest("calibrate", args, common), out);
        }
        if (covary->parsed()) {
            return cmd_covary(statistic, measure, scale, m_samples, bootstrap, common,
                              manifest("covary", args, common), out);
        }
    } catch (const UsageError& e) {
        report_error(err, "Usage", e.what(), kExitUsage);
        return kExitUsage;
    } catch (const StatError& e) {
        int code = kExitUsage;
        if (e.kind() == ErrorKind::Io) {
            code = kExitIo;
        } else if (is_statistical(e.kind())) {
            code = kExitStatistical;
        }
        report_error(err, to_string(e.kind()), e.detail(), code);
        return code;
    } catch (const fs::filesystem_error& e) {
        report_error(err, "Io", e.what(), kExitIo);
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace mdm::cli
