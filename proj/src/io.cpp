#include "viewgrade/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

namespace viewgrade::io {

namespace {

template <typename Err>
const Json& require(const Json& obj, const char* key, const char* where)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw Err(std::string(where) + ": missing key '" + key + "'");
    }
    return obj.at(key);
}

template <typename Err, typename T>
T get_as(const Json& obj, const char* key, const char* where)
{
    const Json& v = require<Err>(obj, key, where);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Err(std::string(where) + ": key '" + key + "' has the wrong type");
    }
}

template <typename Err>
const Json& require_array(const Json& obj, const char* key, const char* where)
{
    const Json& v = require<Err>(obj, key, where);
    if (!v.is_array()) {
        throw Err(std::string(where) + ": '" + key + "' must be a list");
    }
    return v;
}

std::string pooling_name(Pooling p) { return p == Pooling::pool_pairs ? "pool_pairs" : "average_runs"; }

Pooling parse_pooling(const std::string& s)
{
    if (s == "pool_pairs") {
        return Pooling::pool_pairs;
    }
    if (s == "average_runs") {
        return Pooling::average_runs;
    }
    throw ConfigError("unknown pooling '" + s + "' (expected pool_pairs or average_runs)");
}

std::string spread_name(SpreadKind s) { return s == SpreadKind::population ? "population" : "sample"; }

SpreadKind parse_spread(const std::string& s)
{
    if (s == "population") {
        return SpreadKind::population;
    }
    if (s == "sample") {
        return SpreadKind::sample;
    }
    throw ConfigError("unknown spread '" + s + "' (expected population or sample)");
}

}  // namespace

std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double x, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

Json to_json(const Dataset& d)
{
    Json j;
    j["views"] = Json::array();
    for (const auto& v : d.views) {
        j["views"].push_back(
            {{"id", v.id}, {"label", v.label}, {"scale_min", v.scale_min}, {"scale_max", v.scale_max},
             {"weight", v.weight}});
    }
    j["edges"] = Json::array();
    for (const auto& [s, g] : d.graph.edges) {
        j["edges"].push_back({{"submission", s}, {"grader", g}});
    }
    j["grades"] = Json::array();
    for (const auto& r : d.grades) {
        j["grades"].push_back({{"submission", r.submission}, {"grader", r.grader}, {"view", r.view}, {"value", r.grade}});
    }
    if (d.truth) {
        j["truth"] = Json::array();
        for (const auto& [key, value] : *d.truth) {
            j["truth"].push_back({{"submission", key.first}, {"view", key.second}, {"value", value}});
        }
    }
    return j;
}

Dataset dataset_from_json(const Json& j)
{
    using E = ValidationError;
    constexpr const char* where = "dataset";
    Dataset d;
    for (const auto& v : require_array<E>(j, "views", where)) {
        ViewSpec spec;
        spec.id = get_as<E, std::string>(v, "id", "view");
        spec.label = v.contains("label") ? get_as<E, std::string>(v, "label", "view") : spec.id;
        spec.scale_min = get_as<E, double>(v, "scale_min", "view");
        spec.scale_max = get_as<E, double>(v, "scale_max", "view");
        spec.weight = get_as<E, double>(v, "weight", "view");
        d.views.push_back(std::move(spec));
    }
    std::vector<Edge> edges;
    for (const auto& e : require_array<E>(j, "edges", where)) {
        edges.emplace_back(get_as<E, std::string>(e, "submission", "edge"), get_as<E, std::string>(e, "grader", "edge"));
    }
    d.graph = ReviewGraph::from_edges(edges);
    for (const auto& g : require_array<E>(j, "grades", where)) {
        d.grades.push_back({get_as<E, std::string>(g, "grader", "grade"), get_as<E, std::string>(g, "submission", "grade"),
                            get_as<E, std::string>(g, "view", "grade"), get_as<E, double>(g, "value", "grade")});
    }
    if (j.contains("truth") && !j.at("truth").is_null()) {
        TruthTable truth;
        for (const auto& t : require_array<E>(j, "truth", where)) {
            truth[{get_as<E, std::string>(t, "submission", "truth"), get_as<E, std::string>(t, "view", "truth")}] =
                get_as<E, double>(t, "value", "truth");
        }
        d.truth = std::move(truth);
    }
    return d;
}

Json to_json(const ConsensusResult& c)
{
    Json j;
    j["view_grades"] = Json::array();
    for (const auto& [key, est] : c.view_grades) {
        j["view_grades"].push_back(
            {{"submission", key.first}, {"view", key.second}, {"value", est.value}, {"variance", est.variance}});
    }
    j["overall"] = Json::array();
    for (const auto& [s, value] : c.overall) {
        j["overall"].push_back({{"submission", s}, {"value", value}});
    }
    j["grader_variances"] = Json::array();
    for (const auto& [key, v] : c.grader_variances) {
        j["grader_variances"].push_back({{"grader", key.first}, {"view", key.second}, {"variance", v}});
    }
    return j;
}

ConsensusResult consensus_from_json(const Json& j)
{
    using E = ValidationError;
    constexpr const char* where = "consensus";
    ConsensusResult c;
    for (const auto& r : require_array<E>(j, "view_grades", where)) {
        c.view_grades[{get_as<E, std::string>(r, "submission", where), get_as<E, std::string>(r, "view", where)}] = {
            get_as<E, double>(r, "value", where), get_as<E, double>(r, "variance", where)};
    }
    for (const auto& r : require_array<E>(j, "overall", where)) {
        c.overall[get_as<E, std::string>(r, "submission", where)] = get_as<E, double>(r, "value", where);
    }
    if (j.contains("grader_variances")) {
        for (const auto& r : require_array<E>(j, "grader_variances", where)) {
            c.grader_variances[{get_as<E, std::string>(r, "grader", where), get_as<E, std::string>(r, "view", where)}] =
                get_as<E, double>(r, "variance", where);
        }
    }
    return c;
}

Json to_json(const GroundTruthProfile& p)
{
    Json j;
    j["profile"] = Json::array();
    for (const auto& [key, gt] : p) {
        j["profile"].push_back({{"grader", key.first},
                                {"view", key.second},
                                {"true_variance", gt.true_variance},
                                {"injected_offset", gt.injected_offset}});
    }
    return j;
}

Json to_json(const ExperimentConfig& cfg)
{
    Json j;
    const auto& s = cfg.synth;
    j["n_graders"] = s.n_graders;
    j["n_submissions"] = s.n_submissions;
    j["reviews_per_grader"] = s.reviews_per_grader;
    j["n_views"] = s.n_views;
    j["view_weights"] = s.view_weights;
    j["truth_mean"] = s.truth_mean;
    j["truth_sd"] = s.truth_sd;
    j["gamma_shape"] = s.gamma_shape;
    j["gamma_scale"] = s.gamma_scale;
    j["bias_counts"] = s.bias_counts;
    j["bias_offset_low"] = s.bias_offset_low;
    j["bias_offset_high"] = s.bias_offset_high;
    j["seed"] = s.seed;
    j["iterations"] = cfg.engine.iterations;
    j["variance_floor"] = cfg.engine.variance_floor;
    j["models"] = Json::array();
    for (const auto m : cfg.models) {
        j["models"].push_back(std::string(to_string(m)));
    }
    j["debias_strategy"] = std::string(to_string(cfg.debias_strategy));
    j["n_min"] = cfg.bias.n_min;
    j["spread"] = spread_name(cfg.bias.spread);
    j["n_runs"] = cfg.n_runs;
    j["base_seed"] = cfg.base_seed;
    j["overall_pooling"] = pooling_name(cfg.overall_pooling);
    j["view_pooling"] = pooling_name(cfg.view_pooling);
    j["emit_plot_data"] = cfg.emit_plot_data;
    return j;
}

ExperimentConfig config_from_json(const Json& j, ExperimentConfig cfg)
{
    using E = ConfigError;
    constexpr const char* where = "config";
    if (!j.is_object()) {
        throw E("config: top level must be an object");
    }
    static const std::set<std::string> known{
        "n_graders", "n_submissions", "reviews_per_grader", "n_views", "view_weights", "truth_mean", "truth_sd",
        "gamma_shape", "gamma_scale", "bias_counts", "bias_offset_low", "bias_offset_high", "seed", "iterations",
        "variance_floor", "models", "debias_strategy", "n_min", "spread", "n_runs", "base_seed", "overall_pooling",
        "view_pooling", "emit_plot_data", "workers"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw E("config: unknown key '" + key + "'");
        }
    }

    auto& s = cfg.synth;
    auto set = [&]<typename T>(const char* key, T& field) {
        if (j.contains(key)) {
            field = get_as<E, T>(j, key, where);
        }
    };
    set("n_graders", s.n_graders);
    set("n_submissions", s.n_submissions);
    set("reviews_per_grader", s.reviews_per_grader);
    set("n_views", s.n_views);
    set("truth_mean", s.truth_mean);
    set("truth_sd", s.truth_sd);
    set("gamma_shape", s.gamma_shape);
    set("gamma_scale", s.gamma_scale);
    set("bias_offset_low", s.bias_offset_low);
    set("bias_offset_high", s.bias_offset_high);
    set("seed", s.seed);
    if (j.contains("view_weights")) {
        s.view_weights = get_as<E, std::vector<double>>(j, "view_weights", where);
    } else {
        s.view_weights.resize(static_cast<std::size_t>(std::max(s.n_views, 0)), 1.0);
    }
    if (j.contains("bias_counts")) {
        s.bias_counts = get_as<E, std::vector<int>>(j, "bias_counts", where);
    } else {
        s.bias_counts.resize(static_cast<std::size_t>(std::max(s.n_views, 0)), 0);
    }
    set("iterations", cfg.engine.iterations);
    set("variance_floor", cfg.engine.variance_floor);
    if (j.contains("models")) {
        cfg.models.clear();
        for (const auto& m : get_as<E, std::vector<std::string>>(j, "models", where)) {
            cfg.models.push_back(parse_model(m));
        }
    }
    if (j.contains("debias_strategy")) {
        cfg.debias_strategy = parse_debias_strategy(get_as<E, std::string>(j, "debias_strategy", where));
    }
    set("n_min", cfg.bias.n_min);
    if (j.contains("spread")) {
        cfg.bias.spread = parse_spread(get_as<E, std::string>(j, "spread", where));
    }
    set("n_runs", cfg.n_runs);
    set("base_seed", cfg.base_seed);
    if (j.contains("overall_pooling")) {
        cfg.overall_pooling = parse_pooling(get_as<E, std::string>(j, "overall_pooling", where));
    }
    if (j.contains("view_pooling")) {
        cfg.view_pooling = parse_pooling(get_as<E, std::string>(j, "view_pooling", where));
    }
    set("emit_plot_data", cfg.emit_plot_data);
    set("workers", cfg.workers);
    return cfg;
}

Json read_json(const std::filesystem::path& path, bool is_config)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        const std::string msg = "cannot parse '" + path.string() + "': " + e.what();
        if (is_config) {
            throw ConfigError(msg);
        }
        throw ValidationError(msg);
    }
}

void write_json(const std::filesystem::path& path, const Json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json(path, false)); }

ExperimentConfig read_config(const std::filesystem::path& path) { return config_from_json(read_json(path, true)); }

void write_metrics_table(std::ostream& os, const std::vector<MetricsReport>& rows, double gamma_shape)
{
    os << "model\tscope\tk\trho\tsigma\trmse\tn_runs\n";
    for (const auto& r : rows) {
        os << r.model << '\t' << r.scope << '\t' << format_number(gamma_shape) << '\t' << format_fixed(r.rho, 6) << '\t'
           << format_fixed(r.sigma, 6) << '\t' << format_fixed(r.rmse, 6) << '\t' << r.n_runs << '\n';
    }
}

namespace {

constexpr const char* bias_header = "grader\tview\tn\tmean_diff\tstd_diff\tpattern\tcorrection_applied\n";

void write_bias_rows(std::ostream& os, const std::vector<BiasReport>& reports, DebiasStrategy strategy,
                     const std::string& prefix)
{
    for (const auto& r : reports) {
        const auto c = correction_for(r, strategy);
        os << prefix << r.grader << '\t' << r.view << '\t' << r.stats.sample_count << '\t'
           << format_number(r.stats.mean_diff) << '\t' << format_number(r.stats.std_diff) << '\t'
           << to_string(r.stats.pattern) << '\t' << format_number(c.value_or(0.0)) << '\n';
    }
}

}  // namespace

void write_bias_table(std::ostream& os, const std::vector<BiasReport>& reports, DebiasStrategy strategy)
{
    os << bias_header;
    write_bias_rows(os, reports, strategy, "");
}

void write_sweep_table(std::ostream& os, const SweepResult& sweep)
{
    os << "metric\trow";
    for (std::size_t v = 0; v < sweep.views.size(); ++v) {
        for (const auto& p : sweep.points) {
            os << '\t' << sweep.views[v] << ':' << p.bias_counts[v];
        }
    }
    os << '\n';

    struct Row {
        const char* name;
        Metric metric;
        double MetricsReport::*field;
    };
    for (const auto& [name, metric, field] :
         {Row{"rho", Metric::rho, &MetricsReport::rho}, Row{"sigma", Metric::sigma, &MetricsReport::sigma},
          Row{"rmse", Metric::rmse, &MetricsReport::rmse}}) {
        for (const char* label : {"DM1", "DM2", "Impr.(%)"}) {
            os << name << '\t' << label;
            for (std::size_t v = 0; v < sweep.views.size(); ++v) {
                for (const auto& p : sweep.points) {
                    const double dm1 = p.dm1[v].*field;
                    const double dm2 = p.dm2[v].*field;
                    os << '\t';
                    if (label[0] == 'I') {
                        os << format_fixed(improvement_pct(metric, dm1, dm2), 2) << '%';
                    } else {
                        os << format_fixed(label[2] == '1' ? dm1 : dm2, 6);
                    }
                }
            }
            os << '\n';
        }
    }
}

void write_provenance(std::ostream& os, const ExperimentConfig& cfg, const std::string& artifact)
{
    os << "# viewgrade " << artifact << '\n';
    os << "# config: " << to_json(cfg).dump() << '\n';
    os << "# seeds: run r uses base_seed + r, base_seed=" << cfg.base_seed << ", runs=" << cfg.n_runs << '\n';
}

namespace {

std::ofstream open_table(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    return out;
}

}  // namespace

void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ExperimentResult& result)
{
    std::filesystem::create_directories(dir);
    {
        auto out = open_table(dir / "metrics.tsv");
        write_provenance(out, cfg, "metrics");
        write_metrics_table(out, result.table, cfg.synth.gamma_shape);
    }
    {
        auto out = open_table(dir / "runs.tsv");
        write_provenance(out, cfg, "per-run consensus");
        out << "run\tseed\tmodel\tscope\tindex\ttruth\testimate\n";
        for (const auto& run : result.runs) {
            for (const auto& mr : run.models) {
                for (const auto& [scope, sample] : mr.samples) {
                    for (std::size_t i = 0; i < sample.truth.size(); ++i) {
                        out << run.run << '\t' << run.seed << '\t' << to_string(mr.model) << '\t' << scope << '\t' << i
                            << '\t' << format_number(sample.truth[i]) << '\t' << format_number(sample.est[i]) << '\n';
                    }
                }
            }
        }
    }
    {
        auto out = open_table(dir / "bias_reports.tsv");
        write_provenance(out, cfg, "bias reports");
        out << "run\t" << bias_header;
        for (const auto& run : result.runs) {
            write_bias_rows(out, run.bias_reports, cfg.debias_strategy, std::to_string(run.run) + '\t');
        }
    }
    if (cfg.emit_plot_data) {
        auto out = open_table(dir / "plot_data.tsv");
        write_provenance(out, cfg, "plot data");
        out << "run\tmodel\tscope\tmetric\tvalue\n";
        for (const auto& run : result.runs) {
            for (const auto& mr : run.models) {
                for (const auto& [scope, sample] : mr.samples) {
                    const auto rep = pooled_metrics(std::span(&sample, 1), scope, std::string(to_string(mr.model)),
                                                    Pooling::average_runs);
                    const auto row = [&](const char* metric, double value) {
                        out << run.run << '\t' << to_string(mr.model) << '\t' << scope << '\t' << metric << '\t'
                            << format_number(value) << '\n';
                    };
                    row("rho", rep.rho);
                    row("sigma", rep.sigma);
                    row("rmse", rep.rmse);
                }
            }
        }
    }
}

void write_sweep(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepResult& sweep)
{
    std::filesystem::create_directories(dir);
    auto out = open_table(dir / "bias_sweep.tsv");
    write_provenance(out, cfg, "bias sweep");
    write_sweep_table(out, sweep);
}

}  // namespace viewgrade::io
