#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "viewgrade/bias.hpp"
#include "viewgrade/core.hpp"
#include "viewgrade/engine.hpp"
#include "viewgrade/experiment.hpp"
#include "viewgrade/synth.hpp"

namespace viewgrade::io {

using Json = nlohmann::ordered_json;

// Canonical documents. Parse errors in data documents raise ValidationError,
// in config documents ConfigError.
Json to_json(const Dataset& d);
Dataset dataset_from_json(const Json& j);

Json to_json(const ConsensusResult& c);
ConsensusResult consensus_from_json(const Json& j);

Json to_json(const GroundTruthProfile& p);

/// Every recognised config key; unknown keys are rejected.
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {});

Json read_json(const std::filesystem::path& path, bool is_config);
void write_json(const std::filesystem::path& path, const Json& j);

Dataset read_dataset(const std::filesystem::path& path);
ExperimentConfig read_config(const std::filesystem::path& path);

/// Shortest decimal that round-trips the double.
std::string format_number(double x);
std::string format_fixed(double x, int decimals);

/// Table-1 layout: model, scope, k, rho, sigma, rmse, n_runs.
void write_metrics_table(std::ostream& os, const std::vector<MetricsReport>& rows, double gamma_shape);

/// grader, view, n, mean_diff, std_diff, pattern, correction_applied.
void write_bias_table(std::ostream& os, const std::vector<BiasReport>& reports, DebiasStrategy strategy);

/// Table-2 layout: metric rows for DM1, DM2 and Impr.(%), one column per view and setting.
void write_sweep_table(std::ostream& os, const SweepResult& sweep);

/// Header comment lines embedding the full config and seed derivation.
void write_provenance(std::ostream& os, const ExperimentConfig& cfg, const std::string& artifact);

/// Writes metrics.tsv, runs.tsv, bias_reports.tsv and (optionally) plot_data.tsv.
void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ExperimentResult& result);

void write_sweep(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepResult& sweep);

}  // namespace viewgrade::io
