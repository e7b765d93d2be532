#pragma once

#include <walk/compute_link.hpp>
#include <walk/scalar.hpp>
#include <walk/table_store.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace walk {

// Bin geometry of a binned column: bin i covers [start + i*width, start + (i+1)*width).
struct BinInfo {
    double start = 0.0;
    double width = 0.0;
    int count = 0;

    auto operator==(const BinInfo&) const -> bool = default;
};

struct ViewColumn {
    std::string fid;
    StorageKind kind = StorageKind::Float64;
    std::optional<BinInfo> bin;

    auto operator==(const ViewColumn&) const -> bool = default;
};

/// Row-major view data produced by a workflow.
struct ViewTable {
    std::vector<ViewColumn> columns;
    std::vector<std::vector<Scalar>> rows;

    [[nodiscard]] auto column_index(std::string_view fid) const -> std::optional<std::size_t>;

    auto operator==(const ViewTable&) const -> bool = default;
};

// {"fields":[{"fid","kind"[,"bin"]}...],"rows":[[...]...]}; timestamps as
// ISO-8601 strings.
auto view_table_to_json(const ViewTable& table) -> OrderedJson;

struct ColumnStats {
    double min = 0.0;
    double max = 0.0;
};

// Min and max over the non-null values; nullopt when every value is null.
auto column_stats(const Column& column) -> std::optional<ColumnStats>;

// Geometry used for bin(k) given the source stats. Width is 0 for a
// constant column.
auto bin_geometry(const ColumnStats& stats, int bins) -> BinInfo;

// Computes a log or bin column from a float64 source. `stats` is only read
// for bin and must describe the same (post-filter) column.
auto apply_transform(const Column& column, const Transform& transform, const std::optional<ColumnStats>& stats)
    -> Column;

auto execute(const Workflow& workflow, const Dataset& dataset) -> ViewTable;

// One table per roll-up, in plan order. Roll-ups run concurrently.
auto execute_pivot(const PivotPlan& plan, const Dataset& dataset) -> std::vector<ViewTable>;

}  // namespace walk
