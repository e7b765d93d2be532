#pragma once

#include <walk/compute_link.hpp>
#include <walk/error.hpp>
#include <walk/exec_engine.hpp>
#include <walk/renderer.hpp>
#include <walk/spec_model.hpp>
#include <walk/table_store.hpp>

#include <optional>
#include <vector>

namespace walk {

// Thrown when a spec fails validate_against; carries every violation.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    [[nodiscard]] auto violations() const noexcept -> const std::vector<Violation>& { return violations_; }

private:
    std::vector<Violation> violations_;
};

void require_valid(const GraphicSpec& spec, const std::vector<FieldMeta>& fields);

struct QueryResult {
    MarkType mark = MarkType::Bar;
    Workflow workflow;                 // the chart workflow (unused columns of a pivot aside)
    std::optional<ViewTable> view;     // non-table marks
    std::optional<PivotPlan> pivot;    // table marks
    std::vector<ViewTable> rollups;    // table marks, plan order
};

// validate -> derive -> execute.
auto run_query(const GraphicSpec& spec, const Dataset& dataset, const std::vector<FieldMeta>& fields) -> QueryResult;

// {"fields","rows","workflow"} or {"rollups":[...],"workflow"}.
auto query_result_to_json(const QueryResult& result) -> OrderedJson;

struct RenderArtifact {
    bool pivot = false;
    OrderedJson document;  // Vega-Lite document or PivotModel JSON
};

auto render(const GraphicSpec& spec, const Dataset& dataset, const std::vector<FieldMeta>& fields) -> RenderArtifact;

}  // namespace walk
