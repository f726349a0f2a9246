#include "mdm/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>

#include "mdm/error.hpp"

namespace mdm {

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw StatError(ErrorKind::InvalidArgument, "spearman_rho needs two equal-length series");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(ra.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double binomial_test_half(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return 1.0;
    if (successes > trials) {
        throw StatError(ErrorKind::InvalidArgument, "successes exceed trials");
    }
    const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), 0.5);
    const double k = static_cast<double>(successes);
    const double lower = boost::math::cdf(dist, k);
    const double upper = k == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1.0));
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw StatError(ErrorKind::EmptyDraws, "no values");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace mdm
