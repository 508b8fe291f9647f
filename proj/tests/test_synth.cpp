#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "viewgrade/bias.hpp"
#include "viewgrade/synth.hpp"

using namespace viewgrade;

namespace {

std::map<Id, int> grader_degrees(const ReviewGraph& g)
{
    std::map<Id, int> deg;
    for (const auto& [s, j] : g.edges) {
        ++deg[j];
    }
    return deg;
}

std::map<Id, int> submission_degrees(const ReviewGraph& g)
{
    std::map<Id, int> deg;
    for (const auto& [s, j] : g.edges) {
        ++deg[s];
    }
    return deg;
}

}  // namespace

TEST_CASE("assign_reviews balances the default cohort")
{
    const auto g = assign_reviews(50, 50, 6, 42);
    CHECK(g.edges.size() == 300);
    CHECK(g.graders.size() == 50);
    CHECK(g.submissions.size() == 50);
    for (const auto& [j, d] : grader_degrees(g)) {
        CHECK(d == 6);
    }
    for (const auto& [s, d] : submission_degrees(g)) {
        CHECK(d == 6);
    }
}

TEST_CASE("assign_reviews small and infeasible cases")
{
    const auto g = assign_reviews(4, 4, 2, 1);
    CHECK(g.edges.size() == 8);
    for (const auto& [s, d] : submission_degrees(g)) {
        CHECK(d == 2);
    }
    CHECK_THROWS_WITH_AS(assign_reviews(10, 3, 2, 1), doctest::Contains("cannot satisfy degree >= 2"), ConfigError);
    CHECK_THROWS_AS(assign_reviews(3, 5, 4, 1), ConfigError);
}

TEST_CASE("assign_reviews keeps degrees within one across shapes and seeds")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (const auto& [n_sub, n_gr, r] : {std::tuple{50, 50, 6}, {37, 23, 5}, {12, 30, 3}, {9, 9, 9}}) {
            const auto g = assign_reviews(n_sub, n_gr, r, seed);
            // edges is a set, so duplicates would shrink it
            CHECK(g.edges.size() == static_cast<std::size_t>(n_gr * r));
            int lo = 1 << 30;
            int hi = 0;
            for (const auto& [s, d] : submission_degrees(g)) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            CHECK(submission_degrees(g).size() == static_cast<std::size_t>(n_sub));
            CHECK(hi - lo <= 1);
            CHECK(lo >= 2);
        }
    }
}

TEST_CASE("assign_reviews is a function of the seed")
{
    CHECK(assign_reviews(50, 50, 6, 5).edges == assign_reviews(50, 50, 6, 5).edges);
    CHECK(assign_reviews(50, 50, 6, 5).edges != assign_reviews(50, 50, 6, 6).edges);
}

TEST_CASE("generate produces the default cohort")
{
    SynthConfig cfg;
    cfg.seed = 42;
    const auto c = generate(cfg);
    CHECK(c.dataset.graph.edges.size() == 300);
    CHECK(c.dataset.grades.size() == 600);
    CHECK(c.dataset.views.size() == 2);
    CHECK(c.dataset.views[0].id == "view1");
    CHECK(c.dataset.graph.graders.contains("g00"));
    CHECK(c.dataset.graph.submissions.contains("s49"));
    REQUIRE(c.dataset.truth);
    CHECK(c.dataset.truth->size() == 100);
    CHECK(validate_dataset(c.dataset).valid());

    int biased1 = 0;
    int biased2 = 0;
    for (const auto& [key, gt] : c.profile) {
        if (gt.injected_offset != 0.0) {
            (key.second == "view1" ? biased1 : biased2) += 1;
            CHECK(std::abs(gt.injected_offset) >= 1.0);
            CHECK(std::abs(gt.injected_offset) <= 2.0);
        }
        CHECK(gt.true_variance > 0.0);
    }
    CHECK(biased1 == 9);
    CHECK(biased2 == 12);
}

TEST_CASE("generate is deterministic per seed")
{
    SynthConfig cfg;
    cfg.seed = 7;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    REQUIRE(a.dataset.grades.size() == b.dataset.grades.size());
    for (std::size_t k = 0; k < a.dataset.grades.size(); ++k) {
        CHECK(a.dataset.grades[k].grade == b.dataset.grades[k].grade);
    }
    cfg.seed = 8;
    const auto c = generate(cfg);
    CHECK(c.dataset.grades.front().grade != a.dataset.grades.front().grade);
}

TEST_CASE("zero truth spread yields constant truths")
{
    SynthConfig cfg;
    cfg.truth_sd = 0.0;
    cfg.truth_mean = 5.0;
    const auto c = generate(cfg);
    for (const auto& [key, t] : *c.dataset.truth) {
        CHECK(t == 5.0);
    }
}

TEST_CASE("config errors")
{
    SynthConfig cfg;
    cfg.n_graders = 10;
    cfg.n_submissions = 50;
    cfg.reviews_per_grader = 6;
    CHECK_THROWS_AS(generate(cfg), ConfigError);

    SynthConfig w;
    w.view_weights = {1.0};
    CHECK_THROWS_AS(generate(w), ConfigError);

    SynthConfig b;
    b.bias_counts = {60, 0};
    CHECK_THROWS_AS(generate(b), ConfigError);
}

TEST_CASE("grader variances follow the Gamma moments")
{
    // 1000 draws in total: 20 seeds x 50 graders on one view.
    SynthConfig cfg;
    cfg.n_views = 1;
    cfg.view_weights = {1.0};
    cfg.bias_counts = {0};
    std::vector<double> draws;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        for (const auto& [key, gt] : generate(cfg).profile) {
            draws.push_back(gt.true_variance);
        }
    }
    REQUIRE(draws.size() == 1000);
    double mean = 0;
    for (double x : draws) {
        mean += x;
    }
    mean /= 1000;
    double m2 = 0;
    for (double x : draws) {
        m2 += (x - mean) * (x - mean);
    }
    const double var = m2 / 999;
    const double k = cfg.gamma_shape;
    const double th = cfg.gamma_scale;
    const double se_mean = std::sqrt(k * th * th / 1000);
    CHECK(std::abs(mean - k * th) < 3 * se_mean);
    // Var of the sample variance for Gamma: (mu4 - sigma^4 (n-3)/(n-1)) / n with mu4 = 3k(k+2) th^4.
    const double sigma2 = k * th * th;
    const double mu4 = 3 * k * (k + 2) * std::pow(th, 4);
    const double se_var = std::sqrt((mu4 - sigma2 * sigma2 * (997.0 / 999.0)) / 1000);
    CHECK(std::abs(var - sigma2) < 3 * se_var);
}

TEST_CASE("unbiased graders stay inside the two-sigma band")
{
    // With zero injected offsets the diffs are pure noise; the band rejects rarely.
    SynthConfig cfg;
    cfg.bias_counts = {0, 0};
    int inside = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const auto c = generate(cfg);
        for (const auto& r : analyze_bias(c.dataset)) {
            ++total;
            inside += r.stats.pattern == BiasPattern::none;
        }
    }
    CHECK(total == 1000);
    CHECK(static_cast<double>(inside) / total >= 0.99);
}

TEST_CASE("injected offset shifts the grader's mean diff by the offset")
{
    SynthConfig cfg;
    cfg.seed = 3;
    const auto biased = generate(cfg);
    cfg.bias_counts = {0, 0};
    const auto clean = generate(cfg);
    for (const auto& [key, gt] : biased.profile) {
        const auto a = compute_diffs(biased.dataset, key.first, key.second);
        const auto b = compute_diffs(clean.dataset, key.first, key.second);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] - b[i] == doctest::Approx(gt.injected_offset).epsilon(1e-12));
        }
    }
}

TEST_CASE("detection recall of injected graders matches an independent simulation")
{
    // Oracle: draw the same per-grader model directly (offset magnitude, Gamma
    // variance, six Gaussian diffs) and apply the band rule by hand.
    std::mt19937_64 rng(2024);
    std::gamma_distribution<double> gam(2.0, 0.4);
    std::uniform_real_distribution<double> mag(1.0, 2.0);
    std::normal_distribution<double> unit(0, 1);
    const int oracle_trials = 40000;
    int oracle_hits = 0;
    for (int t = 0; t < oracle_trials; ++t) {
        const double sd = std::sqrt(gam(rng));
        const double off = mag(rng);
        double d[6];
        double mean = 0;
        for (double& x : d) {
            x = off + sd * unit(rng);
            mean += x;
        }
        mean /= 6;
        double ss = 0;
        for (double x : d) {
            ss += (x - mean) * (x - mean);
        }
        oracle_hits += mean - 2 * std::sqrt(ss / 6) > 0;
    }
    const double oracle = static_cast<double>(oracle_hits) / oracle_trials;

    SynthConfig cfg;
    int hits = 0;
    int injected = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        cfg.seed = seed;
        const auto c = generate(cfg);
        for (const auto& r : analyze_bias(c.dataset)) {
            const double off = c.profile.at({r.grader, r.view}).injected_offset;
            if (off == 0.0) {
                continue;
            }
            ++injected;
            const auto want = off > 0 ? BiasPattern::positive : BiasPattern::negative;
            hits += r.stats.pattern == want;
        }
    }
    REQUIRE(injected == 60 * 21);
    const double recall = static_cast<double>(hits) / injected;
    MESSAGE("recall " << recall << " oracle " << oracle);
    const double se = std::sqrt(oracle * (1 - oracle) / injected);
    CHECK(std::abs(recall - oracle) < 4 * se + 0.01);
}
