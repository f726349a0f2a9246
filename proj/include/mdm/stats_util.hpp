#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mdm {

/// Ranks starting at 1, ties get their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation (Pearson correlation of average ranks).
/// Returns 0 when either input has no rank variance.
double spearman_rho(std::span<const double> a, std::span<const double> b);

/// Exact two-tailed binomial test of H0: pi = 0.5.
double binomial_test_half(std::uint64_t successes, std::uint64_t trials);

/// Type-7 quantile of already sorted data.
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace mdm
