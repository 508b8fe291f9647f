#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "viewgrade/bias.hpp"

using namespace viewgrade;
using viewgrade::testing::GradeTable;
using viewgrade::testing::make_dataset;

namespace {

// Grader "x" grades s0..s{n-1} with the given observed values; a second grader
// "y" grades the same items exactly at truth.
Dataset single_grader(const std::vector<double>& observed, const std::vector<double>& truth)
{
    GradeTable t;
    TruthTable tt;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const auto s = "s" + std::to_string(i);
        t[{s, "x"}] = observed[i];
        t[{s, "y"}] = truth[i];
        tt[{s, "v1"}] = truth[i];
    }
    auto d = make_dataset({{"v1", t}});
    d.truth = tt;
    return d;
}

BiasReport report_for(const std::vector<double>& diffs, int n_min = 4)
{
    BiasReport r;
    r.grader = "x";
    r.view = "v1";
    r.diffs = diffs;
    r.stats = detect_pattern(diffs, n_min);
    return r;
}

}  // namespace

TEST_CASE("compute_diffs is observed minus truth in submission order")
{
    CHECK(compute_diffs(single_grader({5, 6}, {4, 5}), "x", "v1") == std::vector<double>{1.0, 1.0});
    CHECK(compute_diffs(single_grader({4, 5}, {4, 5}), "x", "v1") == std::vector<double>{0.0, 0.0});
    CHECK(compute_diffs(single_grader({3.0, 7.5}, {4.0, 7.0}), "x", "v1") == std::vector<double>{-1.0, 0.5});
}

TEST_CASE("compute_diffs skips submissions without truth and requires a truth table")
{
    auto d = single_grader({5, 6, 7}, {4, 5, 6});
    d.truth->erase({"s1", "v1"});
    CHECK(compute_diffs(d, "x", "v1") == std::vector<double>{1.0, 1.0});
    d.truth.reset();
    CHECK_THROWS_WITH_AS(compute_diffs(d, "x", "v1"), "truth required for bias analysis", Error);
}

TEST_CASE("detect_pattern examples")
{
    const auto pos = detect_pattern(std::vector<double>{1.0, 1.2, 0.8, 1.1, 0.9, 1.0}, 4);
    CHECK(pos.mean_diff == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pos.std_diff == doctest::Approx(std::sqrt(0.10 / 6.0)).epsilon(1e-12));
    CHECK(pos.std_diff == doctest::Approx(0.1291).epsilon(1e-3));
    CHECK(pos.mean_diff - 2 * pos.std_diff == doctest::Approx(0.742).epsilon(1e-3));
    CHECK(pos.pattern == BiasPattern::positive);

    const auto flat = detect_pattern(std::vector<double>{-1, 1, -1, 1}, 4);
    CHECK(flat.mean_diff == 0.0);
    CHECK(flat.std_diff == 1.0);
    CHECK(flat.pattern == BiasPattern::none);

    const auto neg = detect_pattern(std::vector<double>{-1.0, -1.2, -0.8, -1.1, -0.9, -1.0}, 4);
    CHECK(neg.pattern == BiasPattern::negative);

    const auto few = detect_pattern(std::vector<double>{0.5, 0.7}, 4);
    CHECK(few.pattern == BiasPattern::insufficient_data);
    CHECK(few.sample_count == 2);
}

TEST_CASE("sample spread widens the band")
{
    const std::vector<double> d{1, 2, 3, 4};
    const auto pop = detect_pattern(d, 4, SpreadKind::population);
    const auto smp = detect_pattern(d, 4, SpreadKind::sample);
    CHECK(pop.std_diff == doctest::Approx(std::sqrt(1.25)));
    CHECK(smp.std_diff == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("detect_pattern is shift-consistent and never both positive and negative")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    std::uniform_real_distribution<double> shift(-5, 5);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> d(6);
        for (auto& x : d) {
            x = n(rng);
        }
        const double c = shift(rng);
        auto shifted = d;
        for (auto& x : shifted) {
            x += c;
        }
        const auto a = detect_pattern(d);
        const auto b = detect_pattern(shifted);
        CHECK(b.mean_diff == doctest::Approx(a.mean_diff + c).epsilon(1e-12));
        CHECK(b.std_diff == doctest::Approx(a.std_diff).epsilon(1e-9));
        const bool pos = b.mean_diff - 2 * b.std_diff > 0;
        const bool neg = b.mean_diff + 2 * b.std_diff < 0;
        CHECK_FALSE((pos && neg));
        CHECK((b.pattern == BiasPattern::positive) == pos);
        CHECK((b.pattern == BiasPattern::negative) == neg);
    }
}

TEST_CASE("corrections per strategy")
{
    const auto pos = report_for({1.0, 1.2, 0.8, 1.1, 0.9, 1.0});
    CHECK(*correction_for(pos, DebiasStrategy::min_diff) == 0.8);
    CHECK(*correction_for(pos, DebiasStrategy::max_diff) == 1.2);
    CHECK(*correction_for(pos, DebiasStrategy::median_diff) == doctest::Approx(1.0));
    CHECK(*correction_for(pos, DebiasStrategy::mean_diff) == doctest::Approx(1.0));
    CHECK(*correction_for(pos, DebiasStrategy::symmetric_conservative) == 0.8);

    const auto neg = report_for({-1.0, -1.2, -0.8, -1.1, -0.9, -1.0});
    CHECK(*correction_for(neg, DebiasStrategy::max_diff) == -0.8);
    CHECK(*correction_for(neg, DebiasStrategy::min_diff) == -1.2);
    CHECK(*correction_for(neg, DebiasStrategy::symmetric_conservative) == -0.8);

    CHECK_FALSE(correction_for(report_for({-1, 1, -1, 1}), DebiasStrategy::min_diff));
    CHECK_FALSE(correction_for(report_for({5.0, 5.0}), DebiasStrategy::min_diff));
}

TEST_CASE("median of an even count averages the central diffs")
{
    const auto r = report_for({3.0, 1.0, 2.0, 10.0});
    // sorted 1, 2, 3, 10 -> (2 + 3) / 2; pattern is decided by the band, force it
    auto forced = r;
    forced.stats.pattern = BiasPattern::positive;
    CHECK(*correction_for(forced, DebiasStrategy::median_diff) == 2.5);
}

TEST_CASE("debias_grades shifts only biased graders")
{
    const std::vector<double> truth{4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
    const std::vector<double> diffs{1.0, 1.2, 0.8, 1.1, 0.9, 1.0};
    std::vector<double> observed(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        observed[i] = truth[i] + diffs[i];
    }
    const auto d = single_grader(observed, truth);
    const auto reports = analyze_bias(d);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].grader == "x");
    CHECK(reports[0].stats.pattern == BiasPattern::positive);
    CHECK(reports[1].stats.pattern == BiasPattern::none);

    SUBCASE("min_diff drops every grade by 0.8")
    {
        const auto out = debias_grades(d, reports, DebiasStrategy::min_diff);
        for (std::size_t k = 0; k < d.grades.size(); ++k) {
            const auto& before = d.grades[k];
            const auto& after = out.grades[k];
            const double expected = before.grader == "x" ? before.grade - compute_diffs(d, "x", "v1")[2] : before.grade;
            CHECK(after.grade == doctest::Approx(expected).epsilon(1e-14));
            if (before.grader == "y") {
                CHECK(after.grade == before.grade);
            }
        }
        CHECK(out.truth == d.truth);
    }
    SUBCASE("mean_diff drops every grade by 1.0")
    {
        const auto out = debias_grades(d, reports, DebiasStrategy::mean_diff);
        for (std::size_t k = 0; k < d.grades.size(); ++k) {
            if (d.grades[k].grader == "x") {
                CHECK(out.grades[k].grade == doctest::Approx(d.grades[k].grade - 1.0).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("negative pattern with max_diff raises grades")
{
    const std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> observed{0.0, 0.8, 2.2, 3.0};  // diffs -1, -1.2, -0.8, -1
    const auto d = single_grader(observed, truth);
    const auto reports = analyze_bias(d);
    REQUIRE(reports[0].stats.pattern == BiasPattern::negative);
    const auto out = debias_grades(d, reports, DebiasStrategy::max_diff);
    for (std::size_t k = 0; k < d.grades.size(); ++k) {
        if (d.grades[k].grader == "x") {
            CHECK(out.grades[k].grade == doctest::Approx(d.grades[k].grade + 0.8).epsilon(1e-14));
        }
    }
}

TEST_CASE("debias applies to submissions without truth")
{
    const std::vector<double> truth{0, 0, 0, 0, 0};
    const std::vector<double> observed{2.0, 2.1, 1.9, 2.0, 2.0};
    auto d = single_grader(observed, truth);
    d.truth->erase({"s4", "v1"});
    const auto out = debias_grades(d, analyze_bias(d), DebiasStrategy::mean_diff);
    for (std::size_t k = 0; k < d.grades.size(); ++k) {
        if (d.grades[k].grader == "x" && d.grades[k].submission == "s4") {
            CHECK(out.grades[k].grade == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("strategy names round-trip")
{
    for (auto s : {DebiasStrategy::min_diff, DebiasStrategy::max_diff, DebiasStrategy::median_diff,
                   DebiasStrategy::mean_diff, DebiasStrategy::symmetric_conservative}) {
        CHECK(parse_debias_strategy(to_string(s)) == s);
    }
    CHECK_THROWS_AS(parse_debias_strategy("nope"), ConfigError);
}
