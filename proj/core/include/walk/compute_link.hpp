#pragma once

#include <walk/spec_model.hpp>
#include <walk/table_store.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace walk {

struct FilterStep {
    std::vector<Filter> filters;  // conjunction, kept in canonical order

    auto operator==(const FilterStep&) const -> bool = default;
};

struct TransformStep {
    std::vector<ComputedField> computed;

    auto operator==(const TransformStep&) const -> bool = default;
};

struct MeasureSpec {
    std::string fid;
    Aggregation aggregation = Aggregation::Sum;
    std::string out_fid;

    auto operator==(const MeasureSpec&) const -> bool = default;
};

struct AggregateView {
    std::vector<std::string> group_by;
    std::vector<MeasureSpec> measures;

    auto operator==(const AggregateView&) const -> bool = default;
};

struct RawView {
    std::vector<std::string> fids;

    auto operator==(const RawView&) const -> bool = default;
};

struct ViewStep {
    std::variant<AggregateView, RawView> mode;

    auto operator==(const ViewStep&) const -> bool = default;
};

// Orders the view output; `fid` names an output column of the view step.
struct SortStep {
    std::string fid;
    SortDirection direction = SortDirection::Asc;

    auto operator==(const SortStep&) const -> bool = default;
};

/// filter → transform → view → sort. The optional slots make the fixed order
/// and the one-of-each-kind rule hold by construction; the view is required.
struct Workflow {
    std::optional<FilterStep> filter;
    std::optional<TransformStep> transform;
    ViewStep view;
    std::optional<SortStep> sort;

    // Column names of the final projection, in order.
    [[nodiscard]] auto output_fids() const -> std::vector<std::string>;

    auto operator==(const Workflow&) const -> bool = default;
};

auto workflow_to_json(const Workflow& workflow) -> OrderedJson;
// Accepts {"steps":[...]}; rejects duplicate, missing-view or out-of-order
// steps with SchemaViolation.
auto workflow_from_json(const OrderedJson& document) -> Workflow;

enum class MeasureAxis : std::uint8_t { X, Y, None };
auto to_string(MeasureAxis axis) -> std::string_view;

struct FacetPlan {
    std::optional<std::string> x_inner;
    std::optional<std::string> y_inner;
    std::vector<std::string> col_facets;  // outer x dimensions, outermost first
    std::vector<std::string> row_facets;  // outer y dimensions, outermost first
    MeasureAxis measure_axis = MeasureAxis::None;
    std::vector<std::string> measures;  // view output columns blended on measure_axis

    auto operator==(const FacetPlan&) const -> bool = default;
};

auto facet_plan_to_json(const FacetPlan& plan) -> OrderedJson;

struct PivotPlan {
    std::vector<std::string> col_path;
    std::vector<std::string> row_path;
    std::vector<MeasureSpec> measures;
    // One workflow per prefix pair (i, j), i over 0..|col_path| outermost,
    // j over 0..|row_path|; the (i, j) entry groups by col_path[0..i) then
    // row_path[0..j).
    std::vector<Workflow> rollups;

    [[nodiscard]] auto rollup_index(std::size_t col_depth, std::size_t row_depth) const -> std::size_t {
        return col_depth * (row_path.size() + 1) + row_depth;
    }
};

auto pivot_plan_to_json(const PivotPlan& plan) -> OrderedJson;

// Filter values on a temporal field may be ISO strings or epoch millis;
// both backends read them through these helpers. Throws TypeMismatch for
// anything else.
auto temporal_filter_value(const Scalar& value) -> Scalar;
// Inclusive millisecond bounds of a temporal range (lo rounded up, hi down).
auto temporal_range_bounds(const Range& range) -> std::pair<std::int64_t, std::int64_t>;

auto derive_workflow(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> Workflow;
auto derive_facets(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> FacetPlan;
auto derive_pivot(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> PivotPlan;

}  // namespace walk
