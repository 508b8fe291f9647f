#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "viewgrade/core.hpp"

namespace viewgrade {

namespace detail {

template <typename DerivedA, typename DerivedB>
void require_same_length(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b,
                         Eigen::Index min_size, const char* what)
{
    if (a.size() != b.size()) {
        throw Error(std::string(what) + ": length mismatch");
    }
    if (a.size() < min_size) {
        throw Error(std::string(what) + ": need at least " + std::to_string(min_size) + " samples");
    }
}

}  // namespace detail

/// Pearson correlation with population moments. Throws on constant input.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::DenseBase<DerivedA>& truth, const Eigen::DenseBase<DerivedB>& est)
{
    using Scalar = typename DerivedA::Scalar;
    detail::require_same_length(truth, est, 2, "pearson");
    const auto& y = truth.derived().array();
    const auto& yh = est.derived().array();
    const Scalar n = static_cast<Scalar>(y.size());
    const auto dy = (y - y.mean()).eval();
    const auto dyh = (yh - yh.mean()).eval();
    const Scalar sy = std::sqrt(dy.square().sum() / n);
    const Scalar syh = std::sqrt(dyh.square().sum() / n);
    if (!(sy > 0) || !(syh > 0)) {
        throw Error("undefined correlation");
    }
    const Scalar cov = (dy * dyh).sum() / n;
    return cov / (sy * syh);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rmse(const Eigen::DenseBase<DerivedA>& truth, const Eigen::DenseBase<DerivedB>& est)
{
    detail::require_same_length(truth, est, 1, "rmse");
    const auto r = (est.derived().array() - truth.derived().array()).eval();
    return std::sqrt(r.square().mean());
}

/// Population standard deviation of the residuals est - truth.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar error_sigma(const Eigen::DenseBase<DerivedA>& truth, const Eigen::DenseBase<DerivedB>& est)
{
    detail::require_same_length(truth, est, 2, "error_sigma");
    const auto r = (est.derived().array() - truth.derived().array()).eval();
    return std::sqrt((r - r.mean()).square().mean());
}

inline Eigen::Map<const Eigen::ArrayXd> as_array(std::span<const double> xs)
{
    return {xs.data(), static_cast<Eigen::Index>(xs.size())};
}

/// Truth and consensus for one run and one scope, aligned by submission.
struct Sample {
    std::vector<double> truth;
    std::vector<double> est;
};

enum class Pooling { average_runs, pool_pairs };

struct MetricsReport {
    std::string model;
    std::string scope;
    double rho = 0.0;
    double sigma = 0.0;
    double rmse = 0.0;
    int n = 0;       // samples behind each metric computation
    int n_runs = 0;
};

/// Combines per-run samples: average_runs computes each metric per run and
/// averages; pool_pairs concatenates all runs and computes once.
MetricsReport pooled_metrics(std::span<const Sample> runs, const std::string& scope, const std::string& model,
                             Pooling pooling);

/// Pooling used for a scope: pairs for "overall", per-run averages for views.
Pooling default_pooling(const std::string& scope);

}  // namespace viewgrade
