#include "viewgrade/engine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace viewgrade {

void EngineConfig::check() const
{
    if (iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }
    if (!(variance_floor > 0.0) || !std::isfinite(variance_floor)) {
        throw ConfigError("variance_floor must be a positive finite number");
    }
}

double combine_overall(const std::map<Id, double>& view_values, std::span<const ViewSpec> views)
{
    double total = 0.0;
    for (const auto& v : views) {
        const auto it = view_values.find(v.id);
        if (it == view_values.end()) {
            throw Error("combine_overall: missing value for view '" + v.id + "'");
        }
        total += it->second * v.weight;
    }
    return total;
}

namespace {

// Dense, index-based view of the review graph. Node indices follow id order and
// edges follow (submission, grader) order, which fixes every reduction order.
struct IndexedGraph {
    std::vector<Id> submissions;
    std::vector<Id> graders;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::vector<std::size_t>> item_edges;    // sorted by grader
    std::vector<std::vector<std::size_t>> grader_edges;  // sorted by submission

    explicit IndexedGraph(const ReviewGraph& g)
        : submissions(g.submissions.begin(), g.submissions.end()),
          graders(g.graders.begin(), g.graders.end()),
          item_edges(submissions.size()),
          grader_edges(graders.size())
    {
        auto position = [](const std::vector<Id>& ids, const Id& id) {
            return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        };
        edges.reserve(g.edges.size());
        for (const auto& [s, j] : g.edges) {
            const auto e = edges.size();
            const auto si = position(submissions, s);
            const auto gi = position(graders, j);
            edges.emplace_back(si, gi);
            item_edges[si].push_back(e);
            grader_edges[gi].push_back(e);
        }
    }
};

Eigen::ArrayXd view_grades(const IndexedGraph& ig, const GradeIndex& grades, const Id& view)
{
    Eigen::ArrayXd g(static_cast<Eigen::Index>(ig.edges.size()));
    for (std::size_t e = 0; e < ig.edges.size(); ++e) {
        const auto& [si, gi] = ig.edges[e];
        g(static_cast<Eigen::Index>(e)) = grades.at({ig.submissions[si], ig.graders[gi], view});
    }
    return g;
}

// Estimate over `edges` skipping `skip`, with values/variances taken per edge.
template <typename ValueFn>
Estimate<double> leave_one_out(const std::vector<std::size_t>& edges, std::size_t skip, ValueFn value,
                               const Eigen::ArrayXd& variance, Eigen::ArrayXd& xbuf, Eigen::ArrayXd& vbuf)
{
    const auto n = static_cast<Eigen::Index>(edges.size()) - (skip == edges.size() ? 0 : 1);
    xbuf.resize(n);
    vbuf.resize(n);
    Eigen::Index k = 0;
    for (std::size_t p = 0; p < edges.size(); ++p) {
        if (p == skip) {
            continue;
        }
        const auto e = static_cast<Eigen::Index>(edges[p]);
        xbuf(k) = value(e);
        vbuf(k) = variance(e);
        ++k;
    }
    return weighted_estimate(xbuf, vbuf);
}

struct ViewOutcome {
    std::vector<Estimate<double>> items;
    std::vector<double> grader_variance;
};

ViewOutcome propagate_view(const IndexedGraph& ig, const Eigen::ArrayXd& g, const EngineConfig& cfg)
{
    const auto n_edges = g.size();
    // Variance attached to the grader -> item message on each edge.
    Eigen::ArrayXd item_msg_var = Eigen::ArrayXd::Ones(n_edges);
    // Leave-one-out consensus (value, variance) sent item -> grader on each edge.
    Eigen::ArrayXd loo_value(n_edges);
    Eigen::ArrayXd loo_var(n_edges);
    Eigen::ArrayXd xbuf;
    Eigen::ArrayXd vbuf;

    const auto grade = [&](Eigen::Index e) { return g(e); };
    const auto residual = [&](Eigen::Index e) {
        const double r = loo_value(e) - g(e);
        return r * r;
    };

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        for (const auto& edges : ig.item_edges) {
            for (std::size_t p = 0; p < edges.size(); ++p) {
                const auto est = leave_one_out(edges, p, grade, item_msg_var, xbuf, vbuf);
                const auto e = static_cast<Eigen::Index>(edges[p]);
                loo_value(e) = est.value;
                loo_var(e) = std::max(est.variance, cfg.variance_floor);
            }
        }
        for (const auto& edges : ig.grader_edges) {
            for (std::size_t p = 0; p < edges.size(); ++p) {
                const auto est = leave_one_out(edges, p, residual, loo_var, xbuf, vbuf);
                item_msg_var(static_cast<Eigen::Index>(edges[p])) = std::max(est.value, cfg.variance_floor);
            }
        }
    }

    ViewOutcome out;
    out.items.reserve(ig.item_edges.size());
    for (const auto& edges : ig.item_edges) {
        out.items.push_back(leave_one_out(edges, edges.size(), grade, item_msg_var, xbuf, vbuf));
    }
    out.grader_variance.reserve(ig.grader_edges.size());
    for (const auto& edges : ig.grader_edges) {
        const auto est = leave_one_out(edges, edges.size(), residual, loo_var, xbuf, vbuf);
        out.grader_variance.push_back(std::max(est.value, cfg.variance_floor));
    }
    return out;
}

void fill_overall(const Dataset& d, ConsensusResult& result)
{
    for (const auto& s : d.graph.submissions) {
        std::map<Id, double> values;
        for (const auto& v : d.views) {
            values[v.id] = result.view_grades.at({s, v.id}).value;
        }
        result.overall[s] = combine_overall(values, d.views);
    }
}

}  // namespace

ConsensusResult vancouver_views(const Dataset& d, const EngineConfig& cfg)
{
    cfg.check();
    require_valid(d);

    const IndexedGraph ig(d.graph);
    const auto grades = index_grades(d);
    ConsensusResult result;
    for (const auto& view : d.views) {
        const auto outcome = propagate_view(ig, view_grades(ig, grades, view.id), cfg);
        for (std::size_t i = 0; i < ig.submissions.size(); ++i) {
            result.view_grades[{ig.submissions[i], view.id}] = outcome.items[i];
        }
        for (std::size_t j = 0; j < ig.graders.size(); ++j) {
            result.grader_variances[{ig.graders[j], view.id}] = outcome.grader_variance[j];
        }
    }
    fill_overall(d, result);
    return result;
}

ConsensusResult average_baseline(const Dataset& d, double variance_floor)
{
    require_valid(d);

    const IndexedGraph ig(d.graph);
    const auto grades = index_grades(d);
    ConsensusResult result;
    for (const auto& view : d.views) {
        const auto g = view_grades(ig, grades, view.id);
        for (std::size_t i = 0; i < ig.submissions.size(); ++i) {
            const auto& edges = ig.item_edges[i];
            const auto n = static_cast<double>(edges.size());
            double sum = 0.0;
            for (const auto e : edges) {
                sum += g(static_cast<Eigen::Index>(e));
            }
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto e : edges) {
                const double r = g(static_cast<Eigen::Index>(e)) - mean;
                ss += r * r;
            }
            const double variance = std::max(ss / (n - 1.0) / n, variance_floor);
            result.view_grades[{ig.submissions[i], view.id}] = {mean, variance};
        }
    }
    fill_overall(d, result);
    return result;
}

}  // namespace viewgrade
