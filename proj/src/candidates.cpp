#include "mdm/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "mdm/error.hpp"

namespace mdm {

namespace {

constexpr std::uint64_t kRndStream = 0x726e64;  // "rnd"

boost::math::students_t_distribution<double> welch_reference(const SampleSummary& x,
                                                             const SampleSummary& y) {
    return boost::math::students_t_distribution<double>(welch_df(x, y));
}

void require_nonzero_control(const SampleSummary& x) {
    if (x.mean == 0.0) throw StatError(ErrorKind::ControlMeanZero, "control mean is zero");
}

bool needs_posterior(StatisticId id) {
    return id == StatisticId::bf || id == StatisticId::delta_m || id == StatisticId::r_delta_m;
}

}  // namespace

void NullRegion::validate() const {
    if (!(lower < 0.0 && 0.0 < upper)) {
        throw StatError(ErrorKind::InvalidArgument,
                        "null region must satisfy lower < 0 < upper, got [" +
                            std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
}

std::pair<double, double> NullRegion::resolve(const SampleSummary& x) const {
    validate();
    if (scale == RegionScale::raw) return {lower, upper};
    if (!(x.mean > 0.0)) {
        throw StatError(ErrorKind::ControlMeanNotPositive,
                        "relative null region needs a positive control mean");
    }
    return {lower * x.mean, upper * x.mean};
}

std::string_view to_string(StatisticId id) noexcept {
    switch (id) {
    case StatisticId::xbar_dm: return "xbar_dm";
    case StatisticId::r_xbar_dm: return "r_xbar_dm";
    case StatisticId::s_dm: return "s_dm";
    case StatisticId::rs_dm: return "rs_dm";
    case StatisticId::bf: return "bf";
    case StatisticId::p_n: return "p_n";
    case StatisticId::p_e: return "p_e";
    case StatisticId::p_delta: return "p_delta";
    case StatisticId::cd: return "cd";
    case StatisticId::delta_m: return "delta_m";
    case StatisticId::r_delta_m: return "r_delta_m";
    case StatisticId::rnd: return "rnd";
    }
    return "unknown";
}

std::optional<StatisticId> statistic_from_string(std::string_view name) {
    for (auto id : kAllStatistics) {
        if (to_string(id) == name) return id;
    }
    return std::nullopt;
}

std::string_view to_string(Direction direction) noexcept {
    return direction == Direction::smaller_is_stronger_null ? "smaller_is_stronger_null"
                                                            : "larger_is_stronger_null";
}

Direction direction_of(StatisticId id) noexcept {
    switch (id) {
    case StatisticId::p_n:
    case StatisticId::p_delta:
        return Direction::larger_is_stronger_null;
    default:
        return Direction::smaller_is_stronger_null;
    }
}

bool compares_magnitude(StatisticId id) noexcept {
    switch (id) {
    case StatisticId::xbar_dm:
    case StatisticId::r_xbar_dm:
    case StatisticId::rs_dm:
    case StatisticId::cd:
        return true;
    default:
        return false;
    }
}

std::optional<double> CandidateValue::score() const {
    if (!value) return std::nullopt;
    return compares_magnitude(statistic_id) ? std::abs(*value) : *value;
}

std::optional<bool> predicts_first_stronger(const CandidateValue& first,
                                            const CandidateValue& second) {
    const auto a = first.score();
    const auto b = second.score();
    if (!a || !b || std::isnan(*a) || std::isnan(*b) || *a == *b) return std::nullopt;
    return first.direction == Direction::smaller_is_stronger_null ? *a < *b : *a > *b;
}

double xbar_dm(const SampleSummary& x, const SampleSummary& y) { return y.mean - x.mean; }

double r_xbar_dm(const SampleSummary& x, const SampleSummary& y) {
    require_nonzero_control(x);
    return xbar_dm(x, y) / x.mean;
}

double s_dm(const SampleSummary& x, const SampleSummary& y) {
    return std::sqrt(x.sd * x.sd / x.n + y.sd * y.sd / y.n);
}

double rs_dm(const SampleSummary& x, const SampleSummary& y) {
    require_nonzero_control(x);
    return s_dm(x, y) / x.mean;
}

double welch_df(const SampleSummary& x, const SampleSummary& y) {
    const double a = x.sd * x.sd / x.n;
    const double b = y.sd * y.sd / y.n;
    return (a + b) * (a + b) / (a * a / (x.n - 1) + b * b / (y.n - 1));
}

double welch_t(const SampleSummary& x, const SampleSummary& y) {
    return xbar_dm(x, y) / s_dm(x, y);
}

double welch_p(const SampleSummary& x, const SampleSummary& y) {
    const auto dist = welch_reference(x, y);
    const double t = std::abs(welch_t(x, y));
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

double tost_p(const SampleSummary& x, const SampleSummary& y, const NullRegion& region) {
    const auto [lo, hi] = region.resolve(x);
    const auto dist = welch_reference(x, y);
    const double diff = xbar_dm(x, y);
    const double se = s_dm(x, y);
    // H0: mu_DM <= lo, rejected for large t.
    const double p_lower = boost::math::cdf(boost::math::complement(dist, (diff - lo) / se));
    // H0: mu_DM >= hi, rejected for small t.
    const double p_upper = boost::math::cdf(dist, (diff - hi) / se);
    return std::max(p_lower, p_upper);
}

std::pair<double, double> welch_confidence_interval(const SampleSummary& x,
                                                    const SampleSummary& y, double alpha) {
    const double q = boost::math::quantile(welch_reference(x, y), 1.0 - alpha / 2.0);
    const double diff = xbar_dm(x, y);
    const double half = q * s_dm(x, y);
    return {diff - half, diff + half};
}

double sgpv_from_interval(double lower, double upper, double null_lower, double null_upper) {
    const double null_len = null_upper - null_lower;
    const double len = upper - lower;
    if (len <= 0.0) return (lower >= null_lower && lower <= null_upper) ? 1.0 : 0.0;
    const double overlap = std::max(0.0, std::min(upper, null_upper) - std::max(lower, null_lower));
    return overlap / len * std::max(len / (2.0 * null_len), 1.0);
}

double sgpv(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
            const NullRegion& region) {
    const auto [lo, hi] = region.resolve(x);
    const auto [ci_lo, ci_hi] = welch_confidence_interval(x, y, alpha_dm);
    return sgpv_from_interval(ci_lo, ci_hi, lo, hi);
}

double bf_proxy_from_draws(std::span<const double> differences, double lower, double upper) {
    const auto inside = std::count_if(differences.begin(), differences.end(),
                                      [&](double d) { return d >= lower && d <= upper; });
    const auto outside = static_cast<std::ptrdiff_t>(differences.size()) - inside;
    if (inside == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(outside) / static_cast<double>(inside);
}

double bf_proxy(const SampleSummary& x, const SampleSummary& y, const NullRegion& region, int k,
                const RngSeed& seed) {
    const auto [lo, hi] = region.resolve(x);
    return bf_proxy_from_draws(difference_draws(draw_posterior_means(x, y, k, seed)), lo, hi);
}

double cohens_d(const SampleSummary& x, const SampleSummary& y) {
    const double pooled = std::sqrt(((x.n - 1) * x.sd * x.sd + (y.n - 1) * y.sd * y.sd) /
                                    (x.n + y.n - 2));
    return xbar_dm(x, y) / pooled;
}

double rnd(const RngSeed& seed) {
    auto engine = make_engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = 0.0;
    while (u == 0.0) u = unit(engine);
    return u;
}

std::vector<CandidateValue> evaluate(std::span<const StatisticId> ids, const SampleSummary& x,
                                     const SampleSummary& y, double alpha_dm,
                                     const NullRegion& region, int k, const RngSeed& seed) {
    x.validate();
    y.validate();

    std::optional<PosteriorDrawSet> draws;
    std::string draw_error;
    if (std::any_of(ids.begin(), ids.end(), needs_posterior)) {
        try {
            draws = draw_posterior_means(x, y, k, seed);
        } catch (const StatError& e) {
            draw_error = e.what();
        }
    }

    auto compute = [&](StatisticId id) -> double {
        if (needs_posterior(id) && !draws) throw StatError(ErrorKind::InvalidArgument, draw_error);
        switch (id) {
        case StatisticId::xbar_dm: return xbar_dm(x, y);
        case StatisticId::r_xbar_dm: return r_xbar_dm(x, y);
        case StatisticId::s_dm: return s_dm(x, y);
        case StatisticId::rs_dm: return rs_dm(x, y);
        case StatisticId::bf: {
            const auto [lo, hi] = region.resolve(x);
            return bf_proxy_from_draws(difference_draws(*draws), lo, hi);
        }
        case StatisticId::p_n: return welch_p(x, y);
        case StatisticId::p_e: return tost_p(x, y, region);
        case StatisticId::p_delta: return sgpv(x, y, alpha_dm, region);
        case StatisticId::cd: return cohens_d(x, y);
        case StatisticId::delta_m: return delta_m_from_draws(*draws, alpha_dm).value;
        case StatisticId::r_delta_m:
            if (!(x.mean > 0.0)) {
                throw StatError(ErrorKind::ControlMeanNotPositive,
                                "relative statistics need a positive control mean");
            }
            return r_delta_m_from_draws(*draws, alpha_dm).value;
        case StatisticId::rnd: return rnd(derive(seed, {kRndStream}));
        }
        return std::numeric_limits<double>::quiet_NaN();
    };

    std::vector<CandidateValue> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        CandidateValue cv;
        cv.statistic_id = id;
        cv.direction = direction_of(id);
        try {
            cv.value = compute(id);
        } catch (const StatError& e) {
            cv.reason = e.what();
        }
        out.push_back(std::move(cv));
    }
    return out;
}

std::vector<CandidateValue> evaluate_all(const SampleSummary& x, const SampleSummary& y,
                                         double alpha_dm, const NullRegion& region, int k,
                                         const RngSeed& seed) {
    return evaluate(kAllStatistics, x, y, alpha_dm, region, k, seed);
}

}  // namespace mdm
