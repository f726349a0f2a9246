#include "mdm/risk_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "mdm/error.hpp"
#include "mdm/parallel.hpp"
#include "mdm/stats_util.hpp"

namespace mdm {

namespace {

// Stream labels.
constexpr std::uint64_t kGenerateStream = 0x67656e;
constexpr std::uint64_t kTRatioStream = 0x747261;
constexpr std::uint64_t kPairStream = 0x706169;
constexpr std::uint64_t kScoreStream = 0x73636f;
constexpr std::uint64_t kTieStream = 0x746965;
constexpr std::uint64_t kBootstrapStream = 0x626f6f;

struct KnobDraw {
    double first = 0.0;
    double second = 0.0;
};

KnobDraw draw_knob(const Knob& knob, bool integer, Engine& engine) {
    if (!knob.varies()) return {knob.fixed, knob.fixed};
    std::bernoulli_distribution coin(0.5);
    const bool first_low = coin(engine);
    auto sample = [&](const Window& w) {
        if (integer) {
            std::uniform_int_distribution<int> dist(static_cast<int>(w.lo), static_cast<int>(w.hi));
            return static_cast<double>(dist(engine));
        }
        std::uniform_real_distribution<double> dist(w.lo, w.hi);
        return dist(engine);
    };
    const double a = sample(first_low ? *knob.low : *knob.high);
    const double b = sample(first_low ? *knob.high : *knob.low);
    return {a, b};
}

PopulationConfig make_config(DeltaKind scale, double control_mean, double location, double spread,
                             int group_size, double alpha) {
    const double mu_dm = scale == DeltaKind::raw ? location : location * control_mean;
    const double sigma_d = scale == DeltaKind::raw ? spread : spread * control_mean;
    const double var = sigma_d * sigma_d / 2.0;
    return {control_mean, control_mean + mu_dm, var, var, group_size, group_size, alpha};
}

void require_at_least(int value, int minimum, const char* what) {
    if (value < minimum) {
        throw StatError(ErrorKind::InvalidArgument, std::string(what) + " must be at least " +
                                                        std::to_string(minimum) + ", got " +
                                                        std::to_string(value));
    }
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
    return regime == Regime::null_results ? "null" : "positive";
}

std::optional<Regime> regime_from_string(std::string_view name) {
    if (name == "null" || name == "null_results") return Regime::null_results;
    if (name == "positive" || name == "positive_results") return Regime::positive_results;
    return std::nullopt;
}

std::vector<MeasureId> Investigation::family() const {
    if (scale == DeltaKind::raw) {
        return {MeasureId::abs_mu_dm, MeasureId::sigma_d, MeasureId::df_d, MeasureId::alpha_dm};
    }
    return {MeasureId::abs_r_mu_dm, MeasureId::r_sigma_d, MeasureId::df_d, MeasureId::alpha_dm};
}

std::vector<MeasureId> Investigation::scored_measures() const {
    if (independent) return {*independent};
    return family();
}

std::string Investigation::label() const {
    std::string out(to_string(scale));
    out += '/';
    out += independent ? std::string(to_string(*independent)) : std::string("simultaneous");
    out += '/';
    out += to_string(regime);
    return out;
}

Investigation single_investigation(MeasureId measure, Regime regime, DeltaKind scale) {
    if (measure == MeasureId::abs_mu_dm || measure == MeasureId::sigma_d) scale = DeltaKind::raw;
    if (is_relative_measure(measure)) scale = DeltaKind::relative;
    return {scale, measure, regime};
}

InvestigationDesign default_design(const Investigation& inv) {
    const bool null = inv.regime == Regime::null_results;
    const bool raw = inv.scale == DeltaKind::raw;
    InvestigationDesign d;

    if (inv.simultaneous()) {
        d.group_size = Knob::windows({5, 12}, {10, 20});
        d.alpha = Knob::windows({0.01, 0.05}, {0.03, 0.10});
        if (raw) {
            d.location = Knob::windows({0.5, 3.0}, {2.0, 4.5});
            d.spread = null ? Knob::windows({20, 32}, {28, 40}) : Knob::windows({0.10, 0.20}, {0.15, 0.30});
        } else {
            d.location = null ? Knob::windows({0.0025, 0.015}, {0.01, 0.0225})
                              : Knob::windows({0.05, 0.30}, {0.20, 0.45});
            d.spread = null ? Knob::windows({0.10, 0.16}, {0.14, 0.20})
                            : Knob::windows({0.010, 0.020}, {0.015, 0.030});
        }
        return d;
    }

    // Knob values that stay fixed while another one varies.
    const double loc = raw ? (null ? 1.0 : 2.0) : (null ? 0.01 : 0.1);
    const double spread = raw ? (null ? 10.0 : 1.5) : (null ? 0.1 : 0.075);
    d.location = Knob::constant(loc);
    d.spread = Knob::constant(spread);
    d.group_size = Knob::constant(50);
    d.alpha = Knob::constant(0.05);

    switch (*inv.independent) {
    case MeasureId::abs_mu_dm:
        d.location = Knob::windows({0.5, 3.0}, {2.0, 4.5});
        d.spread = Knob::constant(null ? 24.0 : 1.5);
        break;
    case MeasureId::abs_r_mu_dm:
        d.location = Knob::windows({0.005, 0.03}, {0.02, 0.045});
        d.spread = Knob::constant(null ? 0.3 : 0.015);
        break;
    case MeasureId::sigma_d:
        d.location = Knob::constant(null ? 1.0 : 10.0);
        d.spread = Knob::windows({8, 18}, {14, 24});
        break;
    case MeasureId::r_sigma_d:
        d.location = Knob::constant(null ? 0.01 : 0.1);
        d.spread = Knob::windows({0.08, 0.18}, {0.14, 0.24});
        break;
    case MeasureId::df_d:
        d.group_size = Knob::windows({6, 20}, {16, 40});
        break;
    case MeasureId::alpha_dm:
        d.group_size = Knob::constant(30);
        d.alpha = Knob::windows({0.01, 0.08}, {0.05, 0.20});
        break;
    }
    return d;
}

double critical_t(const PopulationConfig& config) {
    const boost::math::students_t_distribution<double> dist(config.m + config.n - 1);
    return std::abs(boost::math::quantile(dist, config.alpha_dm));
}

std::pair<SampleSummary, SampleSummary> draw_dataset(const PopulationConfig& config,
                                                     const RngSeed& seed) {
    auto engine = make_engine(seed);
    auto group = [&engine](double mu, double var, int size) {
        std::normal_distribution<double> mean_dist(mu, std::sqrt(var / size));
        std::chi_squared_distribution<double> chi(size - 1);
        const double mean = mean_dist(engine);
        const double s2 = var * chi(engine) / (size - 1);
        return SampleSummary{mean, std::sqrt(s2), size};
    };
    auto x = group(config.mu_x, config.var_x, config.m);
    auto y = group(config.mu_y, config.var_y, config.n);
    return {x, y};
}

double expected_t_ratio(const PopulationConfig& config, int m_samples, const RngSeed& seed) {
    require_at_least(m_samples, 30, "m_samples");
    config.validate();
    double total = 0.0;
    for (int j = 0; j < m_samples; ++j) {
        const auto [x, y] = draw_dataset(config, derive(seed, {static_cast<std::uint64_t>(j)}));
        total += welch_t(x, y);
    }
    return total / m_samples / critical_t(config);
}

Regime classify_t_ratio(double ratio) noexcept {
    return std::abs(ratio) <= 1.0 ? Regime::null_results : Regime::positive_results;
}

std::vector<ConfigPair> generate_config_pairs(const InvestigationDesign& design,
                                              const Investigation& inv, int n_pairs,
                                              const RngSeed& seed, const HarnessOptions& options) {
    require_at_least(n_pairs, 1, "n_pairs");
    const auto scored = inv.scored_measures();
    const MeasureId reference = inv.independent.value_or(inv.family().front());

    std::vector<ConfigPair> pairs(static_cast<std::size_t>(n_pairs));
    parallel_for(pairs.size(), options.parallelism, [&](std::size_t i) {
        for (int attempt = 0; attempt < options.retry_budget; ++attempt) {
            const auto idx = static_cast<std::uint64_t>(i);
            const auto tries = static_cast<std::uint64_t>(attempt);
            auto engine = make_engine(derive(seed, {kGenerateStream, idx, tries}));
            const auto loc = draw_knob(design.location, false, engine);
            const auto spread = draw_knob(design.spread, false, engine);
            const auto size = draw_knob(design.group_size, true, engine);
            const auto alpha = draw_knob(design.alpha, false, engine);

            ConfigPair pair;
            pair.exp1 = make_config(inv.scale, design.control_mean_1, loc.first, spread.first,
                                    static_cast<int>(size.first), alpha.first);
            pair.exp2 = make_config(inv.scale, design.control_mean_2, loc.second, spread.second,
                                    static_cast<int>(size.second), alpha.second);
            pair.independent_measure = reference;
            pair.regime = inv.regime;

            const bool tied = std::any_of(scored.begin(), scored.end(), [&](MeasureId m) {
                return ground_truth(pair.exp1, pair.exp2, m) == GroundTruth::tie;
            });
            if (tied) continue;

            const double r1 = expected_t_ratio(pair.exp1, options.t_ratio_samples,
                                               derive(seed, {kTRatioStream, idx, tries, 1}));
            if (classify_t_ratio(r1) != inv.regime) continue;
            const double r2 = expected_t_ratio(pair.exp2, options.t_ratio_samples,
                                               derive(seed, {kTRatioStream, idx, tries, 2}));
            if (classify_t_ratio(r2) != inv.regime) continue;

            pairs[i] = pair;
            return;
        }
        throw StatError(ErrorKind::RegimeUnattainable,
                        "could not place pair " + std::to_string(i) + " of " + inv.label() +
                            " within " + std::to_string(options.retry_budget) + " attempts");
    });
    return pairs;
}

std::vector<ConfigPair> generate_config_pairs(const Investigation& inv, int n_pairs,
                                              const RngSeed& seed, const HarnessOptions& options) {
    return generate_config_pairs(default_design(inv), inv, n_pairs, seed, options);
}

std::vector<ConfigPair> generate_config_pairs(MeasureId measure, Regime regime, int n_pairs,
                                              const RngSeed& seed, const HarnessOptions& options) {
    return generate_config_pairs(single_investigation(measure, regime), n_pairs, seed, options);
}

std::map<MeasureId, IndependenceCheck> verify_designation_independence(
    std::span<const ConfigPair> pairs, std::optional<MeasureId> reference) {
    if (pairs.size() < 30) {
        throw StatError(ErrorKind::InvalidArgument,
                        "designation independence needs at least 30 pairs");
    }
    std::map<MeasureId, IndependenceCheck> out;
    for (auto measure : kAllMeasures) {
        IndependenceCheck check;
        std::optional<GroundTruth> first_seen;
        bool constant = true;
        bool skip = false;
        for (const auto& pair : pairs) {
            const auto ref = reference.value_or(pair.independent_measure);
            if (ref == measure) {
                skip = true;
                break;
            }
            const auto gt = ground_truth(pair.exp1, pair.exp2, measure);
            if (!first_seen) first_seen = gt;
            constant = constant && gt == *first_seen;
            if (gt == GroundTruth::tie) continue;
            ++check.compared;
            if (gt == ground_truth(pair.exp1, pair.exp2, ref)) ++check.shared;
        }
        if (skip) continue;
        check.degenerate = constant;
        if (!constant) {
            check.p_value = binomial_test_half(static_cast<std::uint64_t>(check.shared),
                                               static_cast<std::uint64_t>(check.compared));
        }
        out.emplace(measure, check);
    }
    return out;
}

LossTally tally_pair(const ConfigPair& pair, std::span<const StatisticId> statistics,
                     std::span<const MeasureId> measures, const NullRegion& region, int m_samples,
                     const RngSeed& seed, const HarnessOptions& options) {
    require_at_least(m_samples, 1, "m_samples");
    LossTally tally;
    tally.statistics.assign(statistics.begin(), statistics.end());
    tally.measures.assign(measures.begin(), measures.end());
    tally.losses.assign(statistics.size() * measures.size(), 0);
    tally.decisions = static_cast<std::uint64_t>(m_samples);

    std::vector<GroundTruth> truths;
    for (auto m : measures) truths.push_back(ground_truth(pair.exp1, pair.exp2, m));

    for (int j = 0; j < m_samples; ++j) {
        const auto sj = derive(seed, {static_cast<std::uint64_t>(j)});
        const auto [x1, y1] = draw_dataset(pair.exp1, derive(sj, {1}));
        const auto [x2, y2] = draw_dataset(pair.exp2, derive(sj, {2}));
        const auto v1 =
            evaluate(statistics, x1, y1, pair.exp1.alpha_dm, region, options.k, derive(sj, {3}));
        const auto v2 =
            evaluate(statistics, x2, y2, pair.exp2.alpha_dm, region, options.k, derive(sj, {4}));

        for (std::size_t s = 0; s < statistics.size(); ++s) {
            std::optional<GroundTruth> prediction;
            if (v1[s].value && v2[s].value) {
                auto first = predicts_first_stronger(v1[s], v2[s]);
                if (!first) {
                    auto engine = make_engine(
                        derive(sj, {kTieStream, static_cast<std::uint64_t>(statistics[s])}));
                    first = std::bernoulli_distribution(0.5)(engine);
                }
                prediction = *first ? GroundTruth::exp1_higher_ns : GroundTruth::exp2_higher_ns;
            }
            for (std::size_t m = 0; m < measures.size(); ++m) {
                const int l = prediction ? loss(truths[m], *prediction) : 1;
                tally.losses[s * measures.size() + m] += static_cast<std::uint64_t>(l);
            }
        }
    }
    return tally;
}

double comparison_error(StatisticId statistic, const ConfigPair& pair, const NullRegion& region,
                        int m_samples, const RngSeed& seed, const HarnessOptions& options) {
    require_at_least(m_samples, 50, "m_samples");
    const StatisticId stats[] = {statistic};
    const MeasureId measures[] = {pair.independent_measure};
    const auto tally = tally_pair(pair, stats, measures, region, m_samples, seed, options);
    return static_cast<double>(tally.at(0, 0)) / static_cast<double>(tally.decisions);
}

std::vector<ErrorReport> score_pairs(const Investigation& inv, std::span<const ConfigPair> pairs,
                                     std::span<const StatisticId> statistics, int m_samples,
                                     const NullRegion& region, const RngSeed& seed,
                                     const HarnessOptions& options) {
    const auto measures = inv.scored_measures();
    std::vector<LossTally> tallies(pairs.size());
    parallel_for(pairs.size(), options.parallelism, [&](std::size_t i) {
        tallies[i] = tally_pair(pairs[i], statistics, measures, region, m_samples,
                                derive(seed, {kScoreStream, static_cast<std::uint64_t>(i)}),
                                options);
    });

    std::vector<ErrorReport> reports;
    for (std::size_t s = 0; s < statistics.size(); ++s) {
        for (std::size_t m = 0; m < measures.size(); ++m) {
            ErrorReport r;
            r.statistic_id = statistics[s];
            r.measure = measures[m];
            r.regime = inv.regime;
            r.scale = inv.scale;
            r.simultaneous = inv.simultaneous();
            r.n_configs = static_cast<int>(pairs.size());
            r.m_samples_per_config = m_samples;
            for (const auto& t : tallies) {
                r.incorrect += t.at(s, m);
                r.decisions += t.decisions;
            }
            r.error_rate = r.decisions == 0 ? 0.0
                                            : static_cast<double>(r.incorrect) /
                                                  static_cast<double>(r.decisions);
            r.binomial_p_vs_half = binomial_test_half(r.incorrect, r.decisions);
            r.seed = seed;
            reports.push_back(r);
        }
    }
    return reports;
}

std::vector<ErrorReport> run_investigation(const Investigation& inv,
                                           std::span<const StatisticId> statistics, int n_configs,
                                           int m_samples, const NullRegion& region,
                                           const RngSeed& seed, const HarnessOptions& options) {
    const auto pairs = generate_config_pairs(inv, n_configs, derive(seed, {kPairStream}), options);
    return score_pairs(inv, pairs, statistics, m_samples, region, seed, options);
}

ErrorReport integrated_error(StatisticId statistic, MeasureId measure, Regime regime,
                             int n_configs, int m_samples, const NullRegion& region,
                             const RngSeed& seed, const HarnessOptions& options,
                             DeltaKind scale) {
    require_at_least(n_configs, 50, "n_configs");
    const StatisticId stats[] = {statistic};
    return run_investigation(single_investigation(measure, regime, scale), stats, n_configs,
                             m_samples, region, seed, options)
        .front();
}

std::vector<std::optional<double>> scaled_error_view(std::span<const ErrorReport> reports) {
    auto same_column = [](const ErrorReport& a, const ErrorReport& b) {
        return a.measure == b.measure && a.regime == b.regime && a.scale == b.scale &&
               a.simultaneous == b.simultaneous;
    };
    std::vector<std::optional<double>> out;
    out.reserve(reports.size());
    for (const auto& r : reports) {
        double best = 1.0;
        for (const auto& other : reports) {
            if (same_column(r, other)) best = std::min(best, other.error_rate);
        }
        if (best < 0.5) {
            out.emplace_back((r.error_rate - 0.5) / (0.5 - best));
        } else {
            out.emplace_back(std::nullopt);
        }
    }
    return out;
}

NullRegion default_region(DeltaKind scale) {
    return scale == DeltaKind::raw ? NullRegion::symmetric(1.0, RegionScale::raw)
                                   : NullRegion::symmetric(0.1, RegionScale::relative_to_control_mean);
}

CovariationResult covariation_study(StatisticId statistic, MeasureId measure,
                                    std::span<const PopulationConfig> series, int m_samples,
                                    const NullRegion& region, const RngSeed& seed,
                                    const HarnessOptions& options,
                                    const CovariationOptions& covariation) {
    (void)measure;  // the series itself encodes which measure moves
    if (series.size() < 5) {
        throw StatError(ErrorKind::InvalidArgument, "covariation series needs at least 5 points");
    }
    require_at_least(m_samples, 2, "m_samples");

    const StatisticId ids[] = {statistic};
    std::vector<std::vector<double>> values(series.size());
    parallel_for(series.size(), options.parallelism, [&](std::size_t c) {
        auto& v = values[c];
        v.reserve(static_cast<std::size_t>(m_samples));
        for (int j = 0; j < m_samples; ++j) {
            const auto sj = derive(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(j)});
            const auto [x, y] = draw_dataset(series[c], derive(sj, {1}));
            const auto cv = evaluate(ids, x, y, series[c].alpha_dm, region, options.k, derive(sj, {2}));
            if (cv.front().value && std::isfinite(*cv.front().value)) v.push_back(*cv.front().value);
        }
        if (v.empty()) {
            throw StatError(ErrorKind::ValueError, std::string(to_string(statistic)) +
                                                       " could not be evaluated at series point " +
                                                       std::to_string(c));
        }
    });

    CovariationResult result;
    std::vector<double> index(series.size());
    std::iota(index.begin(), index.end(), 0.0);
    for (const auto& v : values) {
        result.means.push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    }
    result.rho = spearman_rho(index, result.means);

    auto engine = make_engine(derive(seed, {kBootstrapStream}));
    std::vector<double> rhos;
    rhos.reserve(static_cast<std::size_t>(covariation.bootstrap_resamples));
    std::vector<double> boot_means(series.size());
    for (int b = 0; b < covariation.bootstrap_resamples; ++b) {
        for (std::size_t c = 0; c < values.size(); ++c) {
            std::uniform_int_distribution<std::size_t> pick(0, values[c].size() - 1);
            double sum = 0.0;
            for (std::size_t j = 0; j < values[c].size(); ++j) sum += values[c][pick(engine)];
            boot_means[c] = sum / static_cast<double>(values[c].size());
        }
        rhos.push_back(spearman_rho(index, boot_means));
    }
    std::sort(rhos.begin(), rhos.end());
    const double tail = 0.05 / std::max(1, covariation.bonferroni_tests) / 2.0;
    result.ci_lower = sorted_quantile(rhos, tail);
    result.ci_upper = sorted_quantile(rhos, 1.0 - tail);
    return result;
}

std::vector<PopulationConfig> default_series(MeasureId measure, DeltaKind scale) {
    if (is_relative_measure(measure)) scale = DeltaKind::relative;
    if (measure == MeasureId::abs_mu_dm || measure == MeasureId::sigma_d) scale = DeltaKind::raw;

    const double control = 100.0;
    // Baseline in raw units: mu_DM = 1, sigma_D = sqrt(2), 15 per group, alpha 0.05.
    // Relative series use the same shape with fractions of the control mean.
    const double unit = scale == DeltaKind::raw ? 1.0 : 0.1 * control;
    double location = 1.0 * unit;
    double sigma_d = std::sqrt(2.0) * unit;
    int size = 15;
    double alpha = 0.05;

    std::vector<PopulationConfig> out;
    auto push = [&] {
        const double var = sigma_d * sigma_d / 2.0;
        out.push_back({control, control + location, var, var, size, size, alpha});
    };
    for (int i = 0; i < 8; ++i) {
        switch (measure) {
        case MeasureId::abs_mu_dm:
        case MeasureId::abs_r_mu_dm:
            location = (3.5 - 0.5 * i) * unit;
            break;
        case MeasureId::sigma_d:
        case MeasureId::r_sigma_d:
            sigma_d = (4.0 - 0.5 * i) * unit;
            break;
        case MeasureId::df_d: {
            constexpr int sizes[] = {6, 8, 10, 14, 18, 24, 32, 40};
            size = sizes[i];
            break;
        }
        case MeasureId::alpha_dm: {
            constexpr double alphas[] = {0.01, 0.02, 0.05, 0.08, 0.10, 0.15, 0.20, 0.25};
            alpha = alphas[i];
            break;
        }
        }
        push();
    }
    return out;
}

}  // namespace mdm
