#include "viewgrade/metrics.hpp"

namespace viewgrade {

Pooling default_pooling(const std::string& scope)
{
    return scope == "overall" ? Pooling::pool_pairs : Pooling::average_runs;
}

MetricsReport pooled_metrics(std::span<const Sample> runs, const std::string& scope, const std::string& model,
                             Pooling pooling)
{
    if (runs.empty()) {
        throw Error("pooled_metrics: no runs");
    }
    for (const auto& r : runs) {
        if (r.truth.empty() || r.truth.size() != r.est.size()) {
            throw Error("pooled_metrics: every run needs equal, nonempty truth and estimate lists");
        }
    }

    MetricsReport report;
    report.model = model;
    report.scope = scope;
    report.n_runs = static_cast<int>(runs.size());

    if (pooling == Pooling::pool_pairs) {
        Sample pooled;
        for (const auto& r : runs) {
            pooled.truth.insert(pooled.truth.end(), r.truth.begin(), r.truth.end());
            pooled.est.insert(pooled.est.end(), r.est.begin(), r.est.end());
        }
        const auto y = as_array(pooled.truth);
        const auto yh = as_array(pooled.est);
        report.rho = pearson(y, yh);
        report.sigma = error_sigma(y, yh);
        report.rmse = rmse(y, yh);
        report.n = static_cast<int>(pooled.truth.size());
        return report;
    }

    for (const auto& r : runs) {
        const auto y = as_array(r.truth);
        const auto yh = as_array(r.est);
        report.rho += pearson(y, yh);
        report.sigma += error_sigma(y, yh);
        report.rmse += rmse(y, yh);
    }
    const auto k = static_cast<double>(runs.size());
    report.rho /= k;
    report.sigma /= k;
    report.rmse /= k;
    report.n = static_cast<int>(runs.front().truth.size());
    return report;
}

}  // namespace viewgrade
