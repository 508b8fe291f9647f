#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "viewgrade/core.hpp"

namespace viewgrade::testing {

/// grades[view][{submission, grader}] = value; every (submission, grader)
/// pair that appears becomes an edge.
using GradeTable = std::map<std::pair<std::string, std::string>, double>;

inline Dataset make_dataset(const std::vector<std::pair<std::string, GradeTable>>& per_view,
                            std::vector<double> weights = {})
{
    Dataset d;
    std::vector<Edge> edges;
    for (std::size_t v = 0; v < per_view.size(); ++v) {
        ViewSpec spec;
        spec.id = per_view[v].first;
        spec.label = spec.id;
        spec.scale_min = -100.0;
        spec.scale_max = 100.0;
        spec.weight = v < weights.size() ? weights[v] : 1.0;
        d.views.push_back(spec);
        for (const auto& [key, value] : per_view[v].second) {
            edges.push_back(key);
            d.grades.push_back({key.second, key.first, spec.id, value});
        }
    }
    d.graph = ReviewGraph::from_edges(edges);
    return d;
}

/// The 2 x 2 instance: graders a, b both grade s1 and s2.
inline Dataset two_by_two(double a1 = 4.0, double a2 = 6.0, double b1 = 6.0, double b2 = 8.0)
{
    return make_dataset({{"v1", {{{"s1", "a"}, a1}, {{"s2", "a"}, a2}, {{"s1", "b"}, b1}, {{"s2", "b"}, b2}}}});
}

}  // namespace viewgrade::testing
