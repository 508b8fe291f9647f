#include "viewgrade/core.hpp"

#include <cmath>
#include <sstream>

namespace viewgrade {

ReviewGraph ReviewGraph::from_edges(const std::vector<Edge>& edges)
{
    ReviewGraph g;
    for (const auto& e : edges) {
        g.submissions.insert(e.first);
        g.graders.insert(e.second);
        g.edges.insert(e);
    }
    return g;
}

const ViewSpec* Dataset::find_view(const Id& view) const
{
    for (const auto& v : views) {
        if (v.id == view) {
            return &v;
        }
    }
    return nullptr;
}

bool ValidationReport::valid() const
{
    for (const auto& v : violations) {
        if (v.severity == Violation::Severity::error) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> ValidationReport::errors() const
{
    std::vector<std::string> out;
    for (const auto& v : violations) {
        if (v.severity == Violation::Severity::error) {
            out.push_back(v.message);
        }
    }
    return out;
}

std::vector<std::string> ValidationReport::warnings() const
{
    std::vector<std::string> out;
    for (const auto& v : violations) {
        if (v.severity == Violation::Severity::warning) {
            out.push_back(v.message);
        }
    }
    return out;
}

namespace {

template <typename... Parts>
std::string concat(const Parts&... parts)
{
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

}  // namespace

ValidationReport validate_dataset(const Dataset& d)
{
    ValidationReport report;
    auto error = [&](std::string msg) {
        report.violations.push_back({Violation::Severity::error, std::move(msg)});
    };
    auto warning = [&](std::string msg) {
        report.violations.push_back({Violation::Severity::warning, std::move(msg)});
    };

    if (d.views.empty()) {
        error("no views defined");
    }
    std::set<Id> view_ids;
    for (const auto& v : d.views) {
        if (!view_ids.insert(v.id).second) {
            error(concat("duplicate view '", v.id, "'"));
        }
        if (!(v.scale_min < v.scale_max)) {
            error(concat("invalid scale at view '", v.id, "': scale_min must be below scale_max"));
        }
        if (!(v.weight >= 0.0) || !std::isfinite(v.weight)) {
            error(concat("negative or non-finite weight at view '", v.id, "'"));
        }
    }

    const auto& g = d.graph;
    std::map<Id, int> sub_degree;
    std::map<Id, int> grader_degree;
    for (const auto& s : g.submissions) {
        sub_degree[s] = 0;
    }
    for (const auto& j : g.graders) {
        grader_degree[j] = 0;
    }
    for (const auto& [s, j] : g.edges) {
        bool ok = true;
        if (!g.submissions.contains(s)) {
            error(concat("edge (", s, ", ", j, ") references unknown submission '", s, "'"));
            ok = false;
        }
        if (!g.graders.contains(j)) {
            error(concat("edge (", s, ", ", j, ") references unknown grader '", j, "'"));
            ok = false;
        }
        if (ok) {
            ++sub_degree[s];
            ++grader_degree[j];
        }
    }
    for (const auto& [s, deg] : sub_degree) {
        if (deg < 2) {
            error(concat("degree < 2 at submission '", s, "' (degree ", deg, ")"));
        }
    }
    for (const auto& [j, deg] : grader_degree) {
        if (deg < 2) {
            error(concat("degree < 2 at grader '", j, "' (degree ", deg, ")"));
        }
    }

    std::set<std::tuple<Id, Id, Id>> seen;
    for (const auto& r : d.grades) {
        const auto key = std::make_tuple(r.submission, r.grader, r.view);
        if (!seen.insert(key).second) {
            error(concat("duplicate grade record (", r.submission, ", ", r.grader, ", ", r.view, ")"));
        }
        if (!std::isfinite(r.grade)) {
            error(concat("non-finite grade (", r.submission, ", ", r.grader, ", ", r.view, ")"));
        }
        if (!g.edges.contains({r.submission, r.grader})) {
            error(concat("grade record (", r.submission, ", ", r.grader, ", ", r.view,
                         ") has no matching edge"));
        }
        const ViewSpec* view = d.find_view(r.view);
        if (view == nullptr) {
            error(concat("grade record (", r.submission, ", ", r.grader, ") references unknown view '",
                         r.view, "'"));
        } else if (std::isfinite(r.grade) && (r.grade < view->scale_min || r.grade > view->scale_max)) {
            warning(concat("grade ", r.grade, " outside scale of view '", r.view, "' for (", r.submission,
                           ", ", r.grader, ")"));
        }
    }
    for (const auto& [s, j] : g.edges) {
        for (const auto& v : d.views) {
            if (!seen.contains(std::make_tuple(s, j, v.id))) {
                error(concat("missing grade record (", s, ", ", j, ", ", v.id, ")"));
            }
        }
    }

    if (d.truth) {
        for (const auto& [key, value] : *d.truth) {
            if (!g.submissions.contains(key.first)) {
                error(concat("truth references unknown submission '", key.first, "'"));
            }
            if (!view_ids.contains(key.second)) {
                error(concat("truth references unknown view '", key.second, "'"));
            }
            if (!std::isfinite(value)) {
                error(concat("non-finite truth (", key.first, ", ", key.second, ")"));
            }
        }
    }
    return report;
}

void require_valid(const Dataset& d)
{
    const auto report = validate_dataset(d);
    if (!report.valid()) {
        throw ValidationError("precondition violated: " + report.errors().front());
    }
}

std::set<Id> neighborhood(const ReviewGraph& g, const Id& node)
{
    std::set<Id> out;
    if (g.submissions.contains(node)) {
        for (const auto& [s, j] : g.edges) {
            if (s == node) {
                out.insert(j);
            }
        }
        return out;
    }
    if (g.graders.contains(node)) {
        for (const auto& [s, j] : g.edges) {
            if (j == node) {
                out.insert(s);
            }
        }
        return out;
    }
    throw Error("node not in graph: '" + node + "'");
}

GradeIndex index_grades(const Dataset& d)
{
    GradeIndex idx;
    for (const auto& r : d.grades) {
        idx[{r.submission, r.grader, r.view}] = r.grade;
    }
    return idx;
}

}  // namespace viewgrade
