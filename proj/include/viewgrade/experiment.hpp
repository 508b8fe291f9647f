#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "viewgrade/bias.hpp"
#include "viewgrade/core.hpp"
#include "viewgrade/engine.hpp"
#include "viewgrade/metrics.hpp"
#include "viewgrade/synth.hpp"

namespace viewgrade {

/// AVG: plain mean. DM1: multi-view consensus. DM2: de-bias against truth, then DM1.
enum class Model { AVG, DM1, DM2 };

std::string_view to_string(Model m);
Model parse_model(std::string_view name);

struct ExperimentConfig {
    SynthConfig synth;
    EngineConfig engine;
    std::vector<Model> models{Model::AVG, Model::DM1, Model::DM2};
    DebiasStrategy debias_strategy = DebiasStrategy::symmetric_conservative;
    BiasConfig bias;
    int n_runs = 100;
    std::uint64_t base_seed = 1;
    Pooling overall_pooling = Pooling::pool_pairs;
    Pooling view_pooling = Pooling::average_runs;
    bool emit_plot_data = true;
    int workers = 1;

    void check() const;
    std::uint64_t run_seed(int run) const { return base_seed + static_cast<std::uint64_t>(run); }
};

ConsensusResult run_model(const Dataset& d, Model model, const EngineConfig& engine,
                          DebiasStrategy strategy = DebiasStrategy::symmetric_conservative, const BiasConfig& bias = {});

/// One (scope, sample) pair per view with truth plus "overall" when every view has truth.
std::vector<std::pair<std::string, Sample>> evaluation_samples(const Dataset& d, const ConsensusResult& c);

struct ModelRun {
    Model model;
    ConsensusResult consensus;
    std::vector<std::pair<std::string, Sample>> samples;
};

struct RunRecord {
    int run = 0;
    std::uint64_t seed = 0;
    std::vector<ModelRun> models;
    std::vector<BiasReport> bias_reports;
};

struct ExperimentResult {
    std::vector<MetricsReport> table;  // models in config order, then views, then overall
    std::vector<RunRecord> runs;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SweepPoint {
    std::vector<int> bias_counts;  // one per view
    std::vector<MetricsReport> dm1;  // one per view
    std::vector<MetricsReport> dm2;
};

struct SweepResult {
    std::vector<Id> views;
    std::vector<SweepPoint> points;
};

/// Reruns the experiment with DM1 and DM2 for each setting; settings[i][v] is
/// the biased-grader count of view v in setting i.
SweepResult run_bias_sweep(const ExperimentConfig& cfg, const std::vector<std::vector<int>>& settings);

/// Same, with view-1 and view-2 counts given as paired lists.
SweepResult run_bias_sweep(const ExperimentConfig& cfg, const std::vector<int>& counts_view1,
                           const std::vector<int>& counts_view2);

enum class Metric { rho, sigma, rmse };

/// Relative gain of DM2 over DM1 in percent; positive means DM2 is better.
double improvement_pct(Metric metric, double dm1, double dm2);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown for the lowest failing index, annotated with that index.
void for_each_run(int n, int workers, const std::function<void(int)>& fn);

}  // namespace viewgrade
