#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include "viewgrade/core.hpp"

namespace viewgrade {

/// A propagated estimate: who sent it, the value, and how well it is known.
template <typename Scalar>
struct Message {
    std::ptrdiff_t source = 0;
    Scalar value = 0;
    Scalar variance = 1;
};

template <typename Scalar>
struct Estimate {
    Scalar value = 0;
    Scalar variance = 0;
};

/// Precision-weighted mean of `values` and the variance of that mean:
///   value    = sum(x / v) / sum(1 / v)
///   variance = 1 / sum(1 / v)
/// Summation runs in element order, so callers fix the order to get bitwise
/// reproducible results.
template <typename DerivedX, typename DerivedV>
Estimate<typename DerivedX::Scalar> weighted_estimate(const Eigen::ArrayBase<DerivedX>& values,
                                                      const Eigen::ArrayBase<DerivedV>& variances)
{
    using Scalar = typename DerivedX::Scalar;
    if (values.size() == 0) {
        throw Error("no messages");
    }
    if (values.size() != variances.size()) {
        throw Error("weighted_estimate: values and variances differ in length");
    }
    Scalar precision = 0;
    Scalar weighted = 0;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        const Scalar w = Scalar(1) / variances(k);
        precision += w;
        weighted += values(k) * w;
    }
    return {weighted / precision, Scalar(1) / precision};
}

template <typename Scalar>
Estimate<Scalar> weighted_estimate(std::span<const Message<Scalar>> messages)
{
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    const auto n = static_cast<Eigen::Index>(messages.size());
    Array x(n);
    Array v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x(k) = messages[static_cast<std::size_t>(k)].value;
        v(k) = messages[static_cast<std::size_t>(k)].variance;
    }
    return weighted_estimate(x, v);
}

}  // namespace viewgrade
