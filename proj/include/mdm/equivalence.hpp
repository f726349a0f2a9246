#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mdm/delta_m.hpp"
#include "mdm/posterior.hpp"

namespace mdm {

enum class Designation { practically_equivalent, not_practically_equivalent };

std::string_view to_string(Designation designation) noexcept;

/// Negligibility threshold delta, in the units of the statistic it is tested
/// against (measurement units for delta_M, a fraction for r-delta_M).
struct Threshold {
    double value = 0.0;
    DeltaKind kind = DeltaKind::raw;
};

struct EquivalenceDecision {
    Threshold threshold;
    DeltaMResult delta_m;
    Designation designation = Designation::not_practically_equivalent;
};

/// Rejects H0: |mu_DM| >= delta (practical equivalence) iff delta_M < delta.
/// Uses the stored result only; changing the threshold never resamples.
EquivalenceDecision test_negligible(const DeltaMResult& result, const Threshold& threshold);

/// analyst -> (result id -> decision)
using DecisionMatrix = std::map<std::string, std::map<std::string, EquivalenceDecision>>;

/// Result ids every analyst designated practically equivalent, sorted.
/// Throws IncompleteDecisionMatrix unless all analysts decided the same results.
std::vector<std::string> consensus(const DecisionMatrix& decisions_by_analyst);

/// Maximum absolute bound of the equal-tailed 1 - alpha_dm posterior interval
/// of mu_DM. A display approximation of delta_M; never used for testing.
double macb(const SampleSummary& x, const SampleSummary& y, double alpha_dm,
            int k = kDefaultDrawCount, const RngSeed& seed = {});

}  // namespace mdm
