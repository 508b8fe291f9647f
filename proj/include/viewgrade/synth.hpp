#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "viewgrade/core.hpp"

namespace viewgrade {

/// Parameters of the synthetic grading cohort. Defaults reproduce the
/// reference study: 50 graders, 50 submissions, 6 reviews each, 2 views.
struct SynthConfig {
    int n_graders = 50;
    int n_submissions = 50;
    int reviews_per_grader = 6;
    int n_views = 2;
    std::vector<double> view_weights{1.0, 1.0};
    double truth_mean = 0.0;
    double truth_sd = 1.0;
    double gamma_shape = 2.0;
    double gamma_scale = 0.4;
    std::vector<int> bias_counts{9, 12};
    double bias_offset_low = 1.0;
    double bias_offset_high = 2.0;
    std::uint64_t seed = 0;

    void check() const;
};

struct GraderTruth {
    double true_variance = 0.0;
    double injected_offset = 0.0;
};

/// Hidden generator state, keyed by (grader, view).
using GroundTruthProfile = std::map<std::pair<Id, Id>, GraderTruth>;

struct SyntheticCohort {
    Dataset dataset;
    GroundTruthProfile profile;
};

/// Independent engine for one named concern (truths, noise, ...) of a master seed.
std::mt19937_64 derive_stream(std::uint64_t seed, std::string_view label);

/// Balanced assignment: every grader reviews exactly `reviews_per_grader`
/// distinct submissions and submission degrees differ by at most one.
ReviewGraph assign_reviews(int n_submissions, int n_graders, int reviews_per_grader, std::uint64_t seed);

SyntheticCohort generate(const SynthConfig& cfg);

std::string submission_id(int index, int count);
std::string grader_id(int index, int count);
std::string view_id(int index);

}  // namespace viewgrade
