#pragma once

#include <walk/compute_link.hpp>
#include <walk/exec_engine.hpp>
#include <walk/spec_model.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace walk {

inline constexpr std::string_view kVegaLiteSchemaUrl = "https://vega.github.io/schema/vega-lite/v5.json";

// Vega-Lite v5 document for a non-table spec. `view` must be the result of
// the spec's own workflow. Values arrive pre-aggregated, so encodings never
// carry an aggregate.
auto to_chart(const GraphicSpec& spec, const std::vector<FieldMeta>& fields, const FacetPlan& plan,
              const ViewTable& view) -> OrderedJson;

struct PivotNode {
    Scalar value;  // null at the root
    int depth = 0;
    std::vector<PivotNode> children;
    std::size_t leaf_span = 1;
};

struct PivotCell {
    std::vector<Scalar> col;  // col_path prefix
    std::vector<Scalar> row;  // row_path prefix
    std::vector<Scalar> values;  // one per measure
};

struct PivotModel {
    std::vector<std::string> col_path;
    std::vector<std::string> row_path;
    std::vector<MeasureSpec> measures;
    PivotNode col_tree;
    PivotNode row_tree;
    std::vector<PivotCell> cells;  // every prefix pair, roll-up order

    // Cell for a (col prefix, row prefix) pair, or nullptr.
    [[nodiscard]] auto find(const std::vector<Scalar>& col, const std::vector<Scalar>& row) const
        -> const PivotCell*;
};

auto to_pivot(const PivotPlan& plan, const std::vector<ViewTable>& rollups) -> PivotModel;
auto pivot_model_to_json(const PivotModel& model) -> OrderedJson;

struct ExportTab {
    std::string title;
    bool pivot = false;
    OrderedJson document;  // chart document or pivot model JSON
};

// Self-contained HTML page with one tab per entry. Only the pinned chart
// runtime scripts are fetched from the network.
auto export_html(const std::vector<ExportTab>& tabs) -> std::string;

}  // namespace walk
