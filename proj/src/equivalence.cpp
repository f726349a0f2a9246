#include "mdm/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mdm/error.hpp"

namespace mdm {

std::string_view to_string(Designation designation) noexcept {
    return designation == Designation::practically_equivalent ? "practically_equivalent"
                                                              : "not_practically_equivalent";
}

EquivalenceDecision test_negligible(const DeltaMResult& result, const Threshold& threshold) {
    if (!(threshold.value > 0.0)) {
        throw StatError(ErrorKind::InvalidArgument, "threshold must be positive");
    }
    if (result.kind != threshold.kind) {
        throw StatError(ErrorKind::ScaleMismatch,
                        std::string(to_string(threshold.kind)) + " threshold applied to a " +
                            std::string(to_string(result.kind)) + " result");
    }
    // delta_M == delta keeps H0.
    const auto designation = result.value < threshold.value ? Designation::practically_equivalent
                                                            : Designation::not_practically_equivalent;
    return {threshold, result, designation};
}

std::vector<std::string> consensus(const DecisionMatrix& decisions_by_analyst) {
    if (decisions_by_analyst.empty()) return {};

    std::set<std::string> ids;
    for (const auto& [id, decision] : decisions_by_analyst.begin()->second) ids.insert(id);
    for (const auto& [analyst, decisions] : decisions_by_analyst) {
        std::set<std::string> mine;
        for (const auto& [id, decision] : decisions) mine.insert(id);
        if (mine != ids) {
            throw StatError(ErrorKind::IncompleteDecisionMatrix,
                            "analyst '" + analyst + "' did not decide the same set of results");
        }
    }

    std::vector<std::string> agreed;
    for (const auto& id : ids) {
        const bool unanimous = std::all_of(
            decisions_by_analyst.begin(), decisions_by_analyst.end(), [&](const auto& entry) {
                return entry.second.at(id).designation == Designation::practically_equivalent;
            });
        if (unanimous) agreed.push_back(id);
    }
    return agreed;
}

double macb(const SampleSummary& x, const SampleSummary& y, double alpha_dm, int k,
            const RngSeed& seed) {
    const auto diff = difference_draws(draw_posterior_means(x, y, k, seed));
    const auto [lo, hi] = equal_tailed_interval(diff, alpha_dm);
    return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace mdm
