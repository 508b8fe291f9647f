#include "viewgrade/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace viewgrade {

std::string_view to_string(Model m)
{
    switch (m) {
    case Model::AVG: return "AVG";
    case Model::DM1: return "DM1";
    case Model::DM2: return "DM2";
    }
    return "unknown";
}

Model parse_model(std::string_view name)
{
    for (auto m : {Model::AVG, Model::DM1, Model::DM2}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown model '" + std::string(name) + "' (expected AVG, DM1 or DM2)");
}

void ExperimentConfig::check() const
{
    synth.check();
    engine.check();
    if (models.empty()) {
        throw ConfigError("models must not be empty");
    }
    if (n_runs < 1) {
        throw ConfigError("n_runs must be >= 1");
    }
    if (workers < 1) {
        throw ConfigError("workers must be >= 1");
    }
    if (bias.n_min < 1) {
        throw ConfigError("n_min must be >= 1");
    }
}

ConsensusResult run_model(const Dataset& d, Model model, const EngineConfig& engine, DebiasStrategy strategy,
                          const BiasConfig& bias)
{
    switch (model) {
    case Model::AVG: return average_baseline(d, engine.variance_floor);
    case Model::DM1: return vancouver_views(d, engine);
    case Model::DM2: {
        if (!d.truth) {
            throw ValidationError("DM2 requires expert truth for calibration");
        }
        require_valid(d);
        const auto reports = analyze_bias(d, bias);
        return vancouver_views(debias_grades(d, reports, strategy), engine);
    }
    }
    throw Error("unknown model");
}

std::vector<std::pair<std::string, Sample>> evaluation_samples(const Dataset& d, const ConsensusResult& c)
{
    std::vector<std::pair<std::string, Sample>> out;
    if (!d.truth) {
        throw Error("evaluation requires a truth table");
    }
    const auto& truth = *d.truth;
    Sample overall;
    bool overall_complete = true;
    for (const auto& view : d.views) {
        Sample s;
        for (const auto& sub : d.graph.submissions) {
            const auto t = truth.find({sub, view.id});
            const auto e = c.view_grades.find({sub, view.id});
            if (e == c.view_grades.end()) {
                throw Error("consensus lacks (" + sub + ", " + view.id + ")");
            }
            if (t == truth.end()) {
                overall_complete = false;
                continue;
            }
            s.truth.push_back(t->second);
            s.est.push_back(e->second.value);
        }
        out.emplace_back(view.id, std::move(s));
    }
    if (overall_complete) {
        for (const auto& sub : d.graph.submissions) {
            std::map<Id, double> tv;
            for (const auto& view : d.views) {
                tv[view.id] = truth.at({sub, view.id});
            }
            overall.truth.push_back(combine_overall(tv, d.views));
            overall.est.push_back(c.overall.at(sub));
        }
        out.emplace_back("overall", std::move(overall));
    }
    return out;
}

void for_each_run(int n, int workers, const std::function<void(int)>& fn)
{
    std::atomic<int> next{0};
    std::mutex mu;
    int failed_index = n;
    std::exception_ptr failure;

    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };

    const int threads = std::max(1, std::min(workers, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    if (failure) {
        const auto prefix = "run " + std::to_string(failed_index) + ": ";
        try {
            std::rethrow_exception(failure);
        } catch (const ValidationError& e) {
            throw ValidationError(prefix + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(prefix + e.what());
        } catch (const std::exception& e) {
            throw Error(prefix + e.what());
        }
    }
}

namespace {

RunRecord execute_run(const ExperimentConfig& cfg, int run)
{
    RunRecord rec;
    rec.run = run;
    rec.seed = cfg.run_seed(run);

    SynthConfig synth = cfg.synth;
    synth.seed = rec.seed;
    const auto cohort = generate(synth);
    const auto& d = cohort.dataset;

    rec.bias_reports = analyze_bias(d, cfg.bias);
    for (const auto model : cfg.models) {
        ModelRun mr{model, run_model(d, model, cfg.engine, cfg.debias_strategy, cfg.bias), {}};
        mr.samples = evaluation_samples(d, mr.consensus);
        rec.models.push_back(std::move(mr));
    }
    return rec;
}

MetricsReport summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& runs, std::size_t model_index,
                        std::size_t scope_index)
{
    std::vector<Sample> samples;
    samples.reserve(runs.size());
    std::string scope;
    for (const auto& r : runs) {
        const auto& [name, sample] = r.models[model_index].samples[scope_index];
        scope = name;
        samples.push_back(sample);
    }
    const auto pooling = scope == "overall" ? cfg.overall_pooling : cfg.view_pooling;
    return pooled_metrics(samples, scope, std::string(to_string(cfg.models[model_index])), pooling);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.check();

    ExperimentResult result;
    result.runs.resize(static_cast<std::size_t>(cfg.n_runs));
    for_each_run(cfg.n_runs, cfg.workers,
                 [&](int r) { result.runs[static_cast<std::size_t>(r)] = execute_run(cfg, r); });

    const auto n_scopes = result.runs.front().models.front().samples.size();
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        for (std::size_t s = 0; s < n_scopes; ++s) {
            result.table.push_back(summarize(cfg, result.runs, m, s));
        }
    }
    return result;
}

SweepResult run_bias_sweep(const ExperimentConfig& cfg, const std::vector<std::vector<int>>& settings)
{
    SweepResult out;
    for (int v = 0; v < cfg.synth.n_views; ++v) {
        out.views.push_back(view_id(v));
    }
    for (const auto& counts : settings) {
        if (static_cast<int>(counts.size()) != cfg.synth.n_views) {
            throw ConfigError("each sweep setting needs one count per view");
        }
        ExperimentConfig point_cfg = cfg;
        point_cfg.synth.bias_counts = counts;
        point_cfg.models = {Model::DM1, Model::DM2};
        const auto res = run_experiment(point_cfg);

        SweepPoint point;
        point.bias_counts = counts;
        for (const auto& row : res.table) {
            if (row.scope == "overall") {
                continue;
            }
            (row.model == "DM1" ? point.dm1 : point.dm2).push_back(row);
        }
        out.points.push_back(std::move(point));
    }
    return out;
}

SweepResult run_bias_sweep(const ExperimentConfig& cfg, const std::vector<int>& counts_view1,
                           const std::vector<int>& counts_view2)
{
    if (counts_view1.size() != counts_view2.size()) {
        throw ConfigError("count lists must have equal length");
    }
    if (cfg.synth.n_views != 2) {
        throw ConfigError("paired count lists need a two-view configuration");
    }
    std::vector<std::vector<int>> settings;
    for (std::size_t i = 0; i < counts_view1.size(); ++i) {
        settings.push_back({counts_view1[i], counts_view2[i]});
    }
    return run_bias_sweep(cfg, settings);
}

double improvement_pct(Metric metric, double dm1, double dm2)
{
    if (metric == Metric::rho) {
        return 100.0 * (dm2 - dm1) / dm1;
    }
    return 100.0 * (dm1 - dm2) / dm1;
}

}  // namespace viewgrade
