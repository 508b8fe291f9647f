#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewgrade/core.hpp"

namespace viewgrade {

enum class BiasPattern { positive, negative, none, insufficient_data };

std::string_view to_string(BiasPattern p);

/// Spread convention for the band width. Population divides by n.
enum class SpreadKind { population, sample };

struct BiasStats {
    int sample_count = 0;
    double mean_diff = 0.0;
    double std_diff = 0.0;
    BiasPattern pattern = BiasPattern::insufficient_data;
};

struct BiasReport {
    Id grader;
    Id view;
    BiasStats stats;
    std::vector<double> diffs;  // observed - true, in submission order
};

/// Shift applied to a biased grader's grades. `symmetric_conservative` uses
/// the smallest diff for positive patterns and the largest for negative ones.
enum class DebiasStrategy { min_diff, max_diff, median_diff, mean_diff, symmetric_conservative };

std::string_view to_string(DebiasStrategy s);
DebiasStrategy parse_debias_strategy(std::string_view name);

struct BiasConfig {
    int n_min = 4;
    SpreadKind spread = SpreadKind::population;
};

/// observed - true for each of the grader's truth-covered submissions on `view`.
std::vector<double> compute_diffs(const Dataset& d, const Id& grader, const Id& view);

/// Mean and spread of the diffs and the two-sigma band decision.
BiasStats detect_pattern(std::span<const double> diffs, int n_min = BiasConfig{}.n_min,
                         SpreadKind spread = SpreadKind::population);

/// Reports for every (grader, view) pair, graders in id order then views in dataset order.
std::vector<BiasReport> analyze_bias(const Dataset& d, const BiasConfig& cfg = {});

/// The constant subtracted from the grader's grades, or nullopt when the pattern is not biased.
std::optional<double> correction_for(const BiasReport& report, DebiasStrategy strategy);

/// Copy of `d` with every positively/negatively biased (grader, view) shifted by its correction.
Dataset debias_grades(const Dataset& d, std::span<const BiasReport> reports, DebiasStrategy strategy);

}  // namespace viewgrade
