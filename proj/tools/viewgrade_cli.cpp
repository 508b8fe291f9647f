// viewgrade: command-line harness for multi-view crowd grading.
//
//   generate     synthetic cohort -> dataset.json, profile.json
//   aggregate    dataset + model -> consensus.json
//   bias-report  dataset -> bias_report.tsv
//   debias       dataset -> de-biased dataset.json
//   evaluate     consensus + truth -> metrics.tsv
//   experiment   full AVG/DM1/DM2 Monte-Carlo study
//   bias-sweep   DM1 vs DM2 over increasing biased-grader counts
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "viewgrade/io.hpp"

namespace fs = std::filesystem;
using namespace viewgrade;

namespace {

constexpr int exit_validation = 1;
constexpr int exit_config = 2;

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOptions& opts)
{
    cmd->add_option("--seed", opts.seed, "Random seed (base seed for multi-run commands)");
    cmd->add_option("--config", opts.config, "Config file (JSON); unspecified fields keep defaults")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
}

ExperimentConfig load_config(const CommonOptions& opts)
{
    return opts.config.empty() ? ExperimentConfig{} : io::read_config(opts.config);
}

fs::path prepare_out(const CommonOptions& opts)
{
    const fs::path dir(opts.out);
    fs::create_directories(dir);
    return dir;
}

Dataset load_valid_dataset(const std::string& path)
{
    auto d = io::read_dataset(path);
    const auto report = validate_dataset(d);
    for (const auto& w : report.warnings()) {
        std::cerr << "warning: " << w << '\n';
    }
    if (!report.valid()) {
        for (const auto& e : report.errors()) {
            std::cerr << "violation: " << e << '\n';
        }
        throw ValidationError("dataset '" + path + "' failed validation");
    }
    return d;
}

void refuse_overwrite(const std::string& input, const fs::path& output)
{
    std::error_code ec;
    if (fs::exists(output) && fs::equivalent(input, output, ec)) {
        throw ConfigError("refusing to overwrite input dataset '" + input + "'");
    }
}

void print_head(const ExperimentResult& result, int head)
{
    if (head <= 0) {
        return;
    }
    std::cout << "run\tmodel\tscope\trho\tsigma\trmse\n";
    for (const auto& run : result.runs) {
        if (run.run >= head) {
            break;
        }
        for (const auto& mr : run.models) {
            for (const auto& [scope, sample] : mr.samples) {
                const auto m = pooled_metrics(std::span(&sample, 1), scope, std::string(to_string(mr.model)),
                                              Pooling::average_runs);
                std::cout << run.run << '\t' << m.model << '\t' << scope << '\t' << io::format_fixed(m.rho, 4) << '\t'
                          << io::format_fixed(m.sigma, 4) << '\t' << io::format_fixed(m.rmse, 4) << '\n';
            }
        }
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-view crowd grading: consensus, bias detection and synthetic studies"};
    app.require_subcommand(1);

    // generate
    CommonOptions gen_opts;
    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset and its ground-truth profile");
    add_common(gen, gen_opts);

    // aggregate
    CommonOptions agg_opts;
    std::string agg_dataset;
    std::string agg_model = "DM1";
    std::optional<int> agg_iterations;
    std::optional<std::string> agg_strategy;
    auto* agg = app.add_subcommand("aggregate", "Compute consensus grades with AVG, DM1 or DM2");
    add_common(agg, agg_opts);
    agg->add_option("--dataset", agg_dataset, "Dataset file")->required();
    agg->add_option("--model", agg_model, "AVG, DM1 or DM2")->capture_default_str();
    agg->add_option("--iterations", agg_iterations, "Propagation iterations K");
    agg->add_option("--strategy", agg_strategy, "De-bias strategy for DM2");

    // bias-report
    CommonOptions br_opts;
    std::string br_dataset;
    std::optional<int> br_n_min;
    std::optional<std::string> br_strategy;
    auto* br = app.add_subcommand("bias-report", "Detect per-(grader, view) bias patterns");
    add_common(br, br_opts);
    br->add_option("--dataset", br_dataset, "Dataset file with truth")->required();
    br->add_option("--n-min", br_n_min, "Minimum diffs needed for a decision");
    br->add_option("--strategy", br_strategy, "Strategy used for the correction column");

    // debias
    CommonOptions db_opts;
    std::string db_dataset;
    std::optional<int> db_n_min;
    std::optional<std::string> db_strategy;
    auto* db = app.add_subcommand("debias", "Write a de-biased copy of a dataset");
    add_common(db, db_opts);
    db->add_option("--dataset", db_dataset, "Dataset file with truth")->required();
    db->add_option("--n-min", db_n_min, "Minimum diffs needed for a decision");
    db->add_option("--strategy", db_strategy, "min_diff, max_diff, median_diff, mean_diff, symmetric_conservative");

    // evaluate
    CommonOptions ev_opts;
    std::string ev_consensus;
    std::string ev_truth;
    std::string ev_model = "given";
    auto* ev = app.add_subcommand("evaluate", "Compare consensus grades with truth");
    add_common(ev, ev_opts);
    ev->add_option("--consensus", ev_consensus, "Consensus file")->required()->check(CLI::ExistingFile);
    ev->add_option("--truth", ev_truth, "Dataset file carrying the truth table")->required()->check(CLI::ExistingFile);
    ev->add_option("--model", ev_model, "Label for the model column")->capture_default_str();

    // experiment / bias-sweep share run options
    CommonOptions ex_opts;
    std::optional<int> ex_runs;
    std::optional<int> ex_workers;
    std::optional<double> ex_k;
    int ex_head = 0;
    auto* ex = app.add_subcommand("experiment", "Monte-Carlo comparison of AVG, DM1 and DM2");
    add_common(ex, ex_opts);
    ex->add_option("--runs", ex_runs, "Number of runs");
    ex->add_option("--workers", ex_workers, "Parallel workers");
    ex->add_option("--k", ex_k, "Gamma shape of grader variances");
    ex->add_option("--head", ex_head, "Print per-run metrics of the first N runs");

    CommonOptions sw_opts;
    std::optional<int> sw_runs;
    std::optional<int> sw_workers;
    std::optional<double> sw_k;
    std::vector<int> sw_counts1{9, 24};
    std::vector<int> sw_counts2{12, 28};
    auto* sw = app.add_subcommand("bias-sweep", "DM1 vs DM2 as the number of biased graders grows");
    add_common(sw, sw_opts);
    sw->add_option("--runs", sw_runs, "Number of runs per setting");
    sw->add_option("--workers", sw_workers, "Parallel workers");
    sw->add_option("--k", sw_k, "Gamma shape of grader variances");
    sw->add_option("--counts-view1", sw_counts1, "Biased-grader counts for view 1")->delimiter(',')->capture_default_str();
    sw->add_option("--counts-view2", sw_counts2, "Biased-grader counts for view 2")->delimiter(',')->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (gen->parsed()) {
            auto cfg = load_config(gen_opts);
            if (gen_opts.seed) {
                cfg.synth.seed = *gen_opts.seed;
            }
            const auto cohort = generate(cfg.synth);
            const auto dir = prepare_out(gen_opts);
            io::write_json(dir / "dataset.json", io::to_json(cohort.dataset));
            auto profile = io::to_json(cohort.profile);
            profile["seed"] = cfg.synth.seed;
            profile["config"] = io::to_json(cfg);
            io::write_json(dir / "profile.json", profile);
            std::cout << "wrote " << (dir / "dataset.json").string() << " and " << (dir / "profile.json").string()
                      << '\n';
        } else if (agg->parsed()) {
            auto cfg = load_config(agg_opts);
            if (agg_iterations) {
                cfg.engine.iterations = *agg_iterations;
            }
            if (agg_strategy) {
                cfg.debias_strategy = parse_debias_strategy(*agg_strategy);
            }
            cfg.engine.check();
            const auto model = parse_model(agg_model);
            const auto d = load_valid_dataset(agg_dataset);
            const auto result = run_model(d, model, cfg.engine, cfg.debias_strategy, cfg.bias);
            const auto dir = prepare_out(agg_opts);
            io::write_json(dir / "consensus.json", io::to_json(result));
            std::cout << "wrote " << (dir / "consensus.json").string() << '\n';
        } else if (br->parsed()) {
            auto cfg = load_config(br_opts);
            if (br_n_min) {
                cfg.bias.n_min = *br_n_min;
            }
            if (br_strategy) {
                cfg.debias_strategy = parse_debias_strategy(*br_strategy);
            }
            const auto d = load_valid_dataset(br_dataset);
            if (!d.truth) {
                throw ValidationError("truth required for bias analysis");
            }
            const auto reports = analyze_bias(d, cfg.bias);
            const auto dir = prepare_out(br_opts);
            std::ofstream out(dir / "bias_report.tsv");
            io::write_bias_table(out, reports, cfg.debias_strategy);
            std::cout << "wrote " << (dir / "bias_report.tsv").string() << '\n';
        } else if (db->parsed()) {
            auto cfg = load_config(db_opts);
            if (db_n_min) {
                cfg.bias.n_min = *db_n_min;
            }
            if (db_strategy) {
                cfg.debias_strategy = parse_debias_strategy(*db_strategy);
            }
            const auto d = load_valid_dataset(db_dataset);
            if (!d.truth) {
                throw ValidationError("truth required for bias analysis");
            }
            const auto dir = prepare_out(db_opts);
            refuse_overwrite(db_dataset, dir / "dataset.json");
            const auto reports = analyze_bias(d, cfg.bias);
            io::write_json(dir / "dataset.json", io::to_json(debias_grades(d, reports, cfg.debias_strategy)));
            std::cout << "wrote " << (dir / "dataset.json").string() << '\n';
        } else if (ev->parsed()) {
            const auto consensus = io::consensus_from_json(io::read_json(ev_consensus, false));
            const auto d = io::read_dataset(ev_truth);
            std::vector<MetricsReport> rows;
            for (const auto& [scope, sample] : evaluation_samples(d, consensus)) {
                rows.push_back(pooled_metrics(std::span(&sample, 1), scope, ev_model, Pooling::average_runs));
            }
            const auto dir = prepare_out(ev_opts);
            std::ofstream out(dir / "metrics.tsv");
            out << "model\tscope\trho\tsigma\trmse\tn\n";
            for (const auto& r : rows) {
                out << r.model << '\t' << r.scope << '\t' << io::format_number(r.rho) << '\t'
                    << io::format_number(r.sigma) << '\t' << io::format_number(r.rmse) << '\t' << r.n << '\n';
            }
            std::cout << "wrote " << (dir / "metrics.tsv").string() << '\n';
        } else if (ex->parsed()) {
            auto cfg = load_config(ex_opts);
            if (ex_opts.seed) {
                cfg.base_seed = *ex_opts.seed;
            }
            if (ex_runs) {
                cfg.n_runs = *ex_runs;
            }
            if (ex_workers) {
                cfg.workers = *ex_workers;
            }
            if (ex_k) {
                cfg.synth.gamma_shape = *ex_k;
            }
            const auto result = run_experiment(cfg);
            const auto dir = prepare_out(ex_opts);
            io::write_experiment(dir, cfg, result);
            io::write_metrics_table(std::cout, result.table, cfg.synth.gamma_shape);
            print_head(result, ex_head);
        } else if (sw->parsed()) {
            auto cfg = load_config(sw_opts);
            if (sw_opts.seed) {
                cfg.base_seed = *sw_opts.seed;
            }
            if (sw_runs) {
                cfg.n_runs = *sw_runs;
            }
            if (sw_workers) {
                cfg.workers = *sw_workers;
            }
            if (sw_k) {
                cfg.synth.gamma_shape = *sw_k;
            }
            const auto sweep = run_bias_sweep(cfg, sw_counts1, sw_counts2);
            const auto dir = prepare_out(sw_opts);
            io::write_sweep(dir, cfg, sweep);
            io::write_sweep_table(std::cout, sweep);
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return exit_validation;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return 0;
}
