#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace viewgrade {

using Id = std::string;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data breaks a documented precondition (exit code 1 in the CLI).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad configuration or parameters (exit code 2 in the CLI).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ViewSpec {
    Id id;
    std::string label;
    double scale_min = 0.0;
    double scale_max = 10.0;
    double weight = 1.0;
};

struct GradeRecord {
    Id grader;
    Id submission;
    Id view;
    double grade = 0.0;
};

using Edge = std::pair<Id, Id>;  // (submission, grader)

struct ReviewGraph {
    std::set<Id> submissions;
    std::set<Id> graders;
    std::set<Edge> edges;

    /// Builds the node sets from an edge list.
    static ReviewGraph from_edges(const std::vector<Edge>& edges);
};

/// Expert grades keyed by (submission, view). May cover only part of a dataset.
using TruthTable = std::map<std::pair<Id, Id>, double>;

struct Dataset {
    std::vector<ViewSpec> views;
    ReviewGraph graph;
    std::vector<GradeRecord> grades;
    std::optional<TruthTable> truth;

    const ViewSpec* find_view(const Id& view) const;
};

struct Violation {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool valid() const;
    std::vector<std::string> errors() const;
    std::vector<std::string> warnings() const;
};

/// Checks every dataset invariant. Out-of-scale grades are reported as warnings.
ValidationReport validate_dataset(const Dataset& d);

/// Throws ValidationError carrying the first error if the dataset is invalid.
void require_valid(const Dataset& d);

/// Opposite-side neighbours of a submission or grader node.
std::set<Id> neighborhood(const ReviewGraph& g, const Id& node);

/// Grade lookup keyed by (submission, grader, view).
using GradeIndex = std::map<std::tuple<Id, Id, Id>, double>;
GradeIndex index_grades(const Dataset& d);

}  // namespace viewgrade
