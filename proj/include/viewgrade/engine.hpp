#pragma once

#include <map>
#include <span>
#include <utility>

#include "viewgrade/core.hpp"
#include "viewgrade/estimator.hpp"

namespace viewgrade {

struct EngineConfig {
    int iterations = 20;
    double variance_floor = 1e-6;

    void check() const;
};

struct ConsensusResult {
    std::map<std::pair<Id, Id>, Estimate<double>> view_grades;  // (submission, view)
    std::map<Id, double> overall;
    std::map<std::pair<Id, Id>, double> grader_variances;  // (grader, view)
};

/// Weighted sum of one submission's view grades. Throws if a view is missing.
double combine_overall(const std::map<Id, double>& view_values, std::span<const ViewSpec> views);

/// Multi-view variance-weighted consensus. Each view runs the leave-one-out
/// message passing independently, then views are combined by weight.
ConsensusResult vancouver_views(const Dataset& d, const EngineConfig& cfg = {});

/// Per-(submission, view) arithmetic mean of the observed grades.
ConsensusResult average_baseline(const Dataset& d, double variance_floor = EngineConfig{}.variance_floor);

}  // namespace viewgrade
