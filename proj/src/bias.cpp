#include "viewgrade/bias.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace viewgrade {

std::string_view to_string(BiasPattern p)
{
    switch (p) {
    case BiasPattern::positive: return "positive";
    case BiasPattern::negative: return "negative";
    case BiasPattern::none: return "none";
    case BiasPattern::insufficient_data: return "insufficient_data";
    }
    return "unknown";
}

std::string_view to_string(DebiasStrategy s)
{
    switch (s) {
    case DebiasStrategy::min_diff: return "min_diff";
    case DebiasStrategy::max_diff: return "max_diff";
    case DebiasStrategy::median_diff: return "median_diff";
    case DebiasStrategy::mean_diff: return "mean_diff";
    case DebiasStrategy::symmetric_conservative: return "symmetric_conservative";
    }
    return "unknown";
}

DebiasStrategy parse_debias_strategy(std::string_view name)
{
    for (auto s : {DebiasStrategy::min_diff, DebiasStrategy::max_diff, DebiasStrategy::median_diff,
                   DebiasStrategy::mean_diff, DebiasStrategy::symmetric_conservative}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw ConfigError("unknown debias strategy '" + std::string(name) + "'");
}

std::vector<double> compute_diffs(const Dataset& d, const Id& grader, const Id& view)
{
    if (!d.truth) {
        throw Error("truth required for bias analysis");
    }
    // Keyed by submission so the output follows submission id order.
    std::map<Id, double> by_submission;
    for (const auto& r : d.grades) {
        if (r.grader != grader || r.view != view) {
            continue;
        }
        const auto t = d.truth->find({r.submission, view});
        if (t != d.truth->end()) {
            by_submission[r.submission] = r.grade - t->second;
        }
    }
    std::vector<double> diffs;
    diffs.reserve(by_submission.size());
    for (const auto& [s, diff] : by_submission) {
        diffs.push_back(diff);
    }
    return diffs;
}

BiasStats detect_pattern(std::span<const double> diffs, int n_min, SpreadKind spread)
{
    BiasStats stats;
    stats.sample_count = static_cast<int>(diffs.size());
    if (!diffs.empty()) {
        double sum = 0.0;
        for (const double x : diffs) {
            sum += x;
        }
        stats.mean_diff = sum / static_cast<double>(diffs.size());
        double ss = 0.0;
        for (const double x : diffs) {
            ss += (x - stats.mean_diff) * (x - stats.mean_diff);
        }
        const auto denom = static_cast<double>(diffs.size()) - (spread == SpreadKind::sample ? 1.0 : 0.0);
        stats.std_diff = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
    }

    if (stats.sample_count < n_min) {
        stats.pattern = BiasPattern::insufficient_data;
    } else if (stats.mean_diff - 2.0 * stats.std_diff > 0.0) {
        stats.pattern = BiasPattern::positive;
    } else if (stats.mean_diff + 2.0 * stats.std_diff < 0.0) {
        stats.pattern = BiasPattern::negative;
    } else {
        stats.pattern = BiasPattern::none;
    }
    return stats;
}

std::vector<BiasReport> analyze_bias(const Dataset& d, const BiasConfig& cfg)
{
    std::vector<BiasReport> reports;
    for (const auto& grader : d.graph.graders) {
        for (const auto& view : d.views) {
            BiasReport r;
            r.grader = grader;
            r.view = view.id;
            r.diffs = compute_diffs(d, grader, view.id);
            r.stats = detect_pattern(r.diffs, cfg.n_min, cfg.spread);
            reports.push_back(std::move(r));
        }
    }
    return reports;
}

namespace {

double median(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    if (n % 2 == 1) {
        return xs[n / 2];
    }
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean(const std::vector<double>& xs)
{
    double sum = 0.0;
    for (const double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

}  // namespace

std::optional<double> correction_for(const BiasReport& report, DebiasStrategy strategy)
{
    const auto pattern = report.stats.pattern;
    if (pattern != BiasPattern::positive && pattern != BiasPattern::negative) {
        return std::nullopt;
    }
    if (report.diffs.empty()) {
        return std::nullopt;
    }
    const auto& diffs = report.diffs;
    switch (strategy) {
    case DebiasStrategy::min_diff: return *std::min_element(diffs.begin(), diffs.end());
    case DebiasStrategy::max_diff: return *std::max_element(diffs.begin(), diffs.end());
    case DebiasStrategy::median_diff: return median(diffs);
    case DebiasStrategy::mean_diff: return mean(diffs);
    case DebiasStrategy::symmetric_conservative:
        return pattern == BiasPattern::positive ? *std::min_element(diffs.begin(), diffs.end())
                                                : *std::max_element(diffs.begin(), diffs.end());
    }
    return std::nullopt;
}

Dataset debias_grades(const Dataset& d, std::span<const BiasReport> reports, DebiasStrategy strategy)
{
    std::map<std::pair<Id, Id>, double> shifts;
    for (const auto& r : reports) {
        if (const auto c = correction_for(r, strategy)) {
            shifts[{r.grader, r.view}] = *c;
        }
    }

    Dataset out = d;
    for (auto& rec : out.grades) {
        const auto it = shifts.find({rec.grader, rec.view});
        if (it == shifts.end()) {
            continue;
        }
        const double c = it->second;
        const auto t = d.truth ? d.truth->find({rec.submission, rec.view}) : TruthTable::const_iterator{};
        if (d.truth && t != d.truth->end()) {
            // Rebuilt from truth plus the shifted diff: the same value as grade - c,
            // but a diff equal to c maps back to the truth exactly.
            rec.grade = t->second + ((rec.grade - t->second) - c);
        } else {
            rec.grade -= c;
        }
    }
    return out;
}

}  // namespace viewgrade
