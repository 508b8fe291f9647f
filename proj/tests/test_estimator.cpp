#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "viewgrade/estimator.hpp"

using namespace viewgrade;

namespace {

using Msg = Message<double>;

Estimate<double> estimate(std::vector<Msg> ms) { return weighted_estimate<double>(std::span<const Msg>(ms)); }

}  // namespace

TEST_CASE("weighted_estimate examples")
{
    auto one = estimate({{0, 5.0, 2.0}});
    CHECK(one.value == 5.0);
    CHECK(one.variance == 2.0);

    auto even = estimate({{0, 4.0, 1.0}, {1, 6.0, 1.0}});
    CHECK(even.value == 5.0);
    CHECK(even.variance == 0.5);

    // (2/1 + 8/4) / (1/1 + 1/4) = 3.2, 1 / 1.25 = 0.8
    auto skew = estimate({{0, 2.0, 1.0}, {1, 8.0, 4.0}});
    CHECK(skew.value == doctest::Approx(3.2).epsilon(1e-15));
    CHECK(skew.variance == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("weighted_estimate rejects empty input")
{
    CHECK_THROWS_WITH_AS(estimate({}), "no messages", Error);
}

TEST_CASE("weighted_estimate accepts Eigen arrays and other scalars")
{
    Eigen::ArrayXf x(3);
    Eigen::ArrayXf v(3);
    x << 1.0f, 2.0f, 3.0f;
    v << 1.0f, 1.0f, 1.0f;
    const auto e = weighted_estimate(x, v);
    CHECK(e.value == doctest::Approx(2.0f));
    CHECK(e.variance == doctest::Approx(1.0f / 3.0f));
}

TEST_CASE("decreasing one variance pulls the estimate toward that message")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> val(-5, 5);
    std::uniform_real_distribution<double> var(0.1, 3);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Msg> ms(4);
        for (auto& m : ms) {
            m = {0, val(rng), var(rng)};
        }
        const auto before = estimate(ms);
        auto tighter = ms;
        tighter[0].variance *= 0.5;
        const auto after = estimate(tighter);
        const double target = ms[0].value;
        CHECK(std::abs(after.value - target) <= std::abs(before.value - target) + 1e-12);
        CHECK(after.variance < before.variance);
    }
}
