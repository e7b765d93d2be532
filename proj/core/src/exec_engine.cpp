#include <walk/error.hpp>
#include <walk/exec_engine.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace walk {

auto ViewTable::column_index(std::string_view fid) const -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].fid == fid) {
            return i;
        }
    }
    return std::nullopt;
}

auto view_table_to_json(const ViewTable& table) -> OrderedJson {
    OrderedJson fields = OrderedJson::array();
    for (const auto& c : table.columns) {
        OrderedJson f = OrderedJson::object();
        f["fid"] = c.fid;
        f["kind"] = to_string(c.kind);
        if (c.bin) {
            f["bin"] = {{"start", c.bin->start}, {"width", c.bin->width}, {"count", c.bin->count}};
        }
        fields.push_back(std::move(f));
    }
    OrderedJson rows = OrderedJson::array();
    for (const auto& row : table.rows) {
        OrderedJson r = OrderedJson::array();
        for (const auto& v : row) {
            if (const auto* ts = std::get_if<Timestamp>(&v)) {
                r.push_back(format_iso_datetime(*ts));
            } else {
                r.push_back(scalar_to_json(v));
            }
        }
        rows.push_back(std::move(r));
    }
    OrderedJson out = OrderedJson::object();
    out["fields"] = std::move(fields);
    out["rows"] = std::move(rows);
    return out;
}

auto column_stats(const Column& column) -> std::optional<ColumnStats> {
    if (column.kind() != StorageKind::Float64) {
        return std::nullopt;
    }
    auto values = column.doubles();
    std::optional<ColumnStats> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (column.is_null(i)) {
            continue;
        }
        if (!out) {
            out = ColumnStats{values[i], values[i]};
        } else {
            out->min = std::min(out->min, values[i]);
            out->max = std::max(out->max, values[i]);
        }
    }
    return out;
}

auto bin_geometry(const ColumnStats& stats, int bins) -> BinInfo {
    return BinInfo{stats.min, (stats.max - stats.min) / bins, bins};
}

auto apply_transform(const Column& column, const Transform& transform, const std::optional<ColumnStats>& stats)
    -> Column {
    if (column.kind() != StorageKind::Float64) {
        throw Error(ErrorCode::NonQuantitativeSource, "transform source is not numeric", column.name());
    }
    auto values = column.doubles();
    std::vector<double> out(values.size(), 0.0);
    std::vector<std::uint8_t> nulls(values.size(), 0);

    if (transform.op == Transform::Op::Bin) {
        if (transform.bins <= 0) {
            throw Error(ErrorCode::DerivationError, "bin count must be positive", column.name());
        }
        const int k = transform.bins;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (column.is_null(i) || !stats) {
                nulls[i] = 1;
                continue;
            }
            double lo = stats->min;
            double w = (stats->max - stats->min) / k;
            if (w == 0.0) {
                out[i] = lo;
                continue;
            }
            double idx = std::min(std::floor((values[i] - lo) / w), static_cast<double>(k - 1));
            out[i] = lo + idx * w;
        }
    } else {
        double base = transform.op == Transform::Op::Log2 ? 2.0 : 10.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (column.is_null(i) || !(values[i] > 0.0)) {
                nulls[i] = 1;
                continue;
            }
            out[i] = std::log(values[i]) / std::log(base);
        }
    }
    return Column(column.name(), std::move(out), std::move(nulls));
}

namespace {

struct KeyLess {
    auto operator()(const std::vector<Scalar>& a, const std::vector<Scalar>& b) const -> bool {
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto c = compare_scalars(a[i], b[i]);
            if (c != 0) {
                return c < 0;
            }
        }
        return false;
    }
};

// Working columns of one execution: dataset columns gathered to the
// surviving rows on first use, plus computed columns.
class Frame {
public:
    Frame(const Dataset& dataset, std::vector<std::uint32_t> rows) : dataset_(dataset), rows_(std::move(rows)) {}

    [[nodiscard]] auto row_count() const -> std::size_t { return rows_.size(); }

    auto get(const std::string& fid) -> const Column& {
        if (auto it = columns_.find(fid); it != columns_.end()) {
            return it->second;
        }
        const auto* source = dataset_.find(fid);
        if (source == nullptr) {
            throw Error(ErrorCode::UnknownField, "unknown field '" + fid + "'", fid);
        }
        return columns_.emplace(fid, source->gather(rows_)).first->second;
    }

    void add(const std::string& fid, Column column, std::optional<BinInfo> bin) {
        if (columns_.count(fid) != 0 || dataset_.find(fid) != nullptr) {
            throw Error(ErrorCode::DerivationError, "computed field '" + fid + "' already exists", fid);
        }
        columns_.emplace(fid, std::move(column));
        if (bin) {
            bins_.emplace(fid, *bin);
        }
    }

    [[nodiscard]] auto bin(const std::string& fid) const -> std::optional<BinInfo> {
        if (auto it = bins_.find(fid); it != bins_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

private:
    const Dataset& dataset_;
    std::vector<std::uint32_t> rows_;
    std::unordered_map<std::string, Column> columns_;
    std::unordered_map<std::string, BinInfo> bins_;
};

auto filter_rows(const std::vector<Filter>& filters, const Dataset& dataset) -> std::vector<std::uint32_t> {
    std::vector<std::uint32_t> rows(dataset.row_count());
    std::iota(rows.begin(), rows.end(), 0U);
    for (const auto& filter : filters) {
        const auto* column = dataset.find(filter.fid);
        if (column == nullptr) {
            throw Error(ErrorCode::UnknownField, "unknown filter field '" + filter.fid + "'", filter.fid);
        }
        std::function<bool(std::uint32_t)> keep;
        if (const auto* range = std::get_if<Range>(&filter.rule)) {
            if (column->kind() == StorageKind::Float64) {
                auto values = column->doubles();
                keep = [=](std::uint32_t r) {
                    return !column->is_null(r) && values[r] >= range->lo && values[r] <= range->hi;
                };
            } else if (column->kind() == StorageKind::Timestamp) {
                auto values = column->millis();
                auto [lo, hi] = temporal_range_bounds(*range);
                keep = [=](std::uint32_t r) { return !column->is_null(r) && values[r] >= lo && values[r] <= hi; };
            } else {
                throw Error(ErrorCode::TypeMismatch, "range filter on text field '" + filter.fid + "'", filter.fid);
            }
        } else {
            std::vector<Scalar> wanted;
            for (const auto& v : std::get<OneOf>(filter.rule).values) {
                if (column->kind() == StorageKind::Timestamp) {
                    wanted.push_back(temporal_filter_value(v));
                } else if (is_null(v) || (column->kind() == StorageKind::Float64 && std::holds_alternative<double>(v)) ||
                           (column->kind() == StorageKind::Utf8 && std::holds_alternative<std::string>(v))) {
                    wanted.push_back(v);
                } else {
                    throw Error(ErrorCode::TypeMismatch,
                                "value " + scalar_to_json(v).dump() + " does not match field '" + filter.fid + "'",
                                filter.fid);
                }
            }
            keep = [column, wanted = std::move(wanted)](std::uint32_t r) {
                auto cell = column->at(r);
                return std::any_of(wanted.begin(), wanted.end(),
                                   [&](const Scalar& w) { return compare_scalars(w, cell) == 0; });
            };
        }
        std::erase_if(rows, [&](std::uint32_t r) { return !keep(r); });
    }
    return rows;
}

auto aggregate(const Column& column, std::span<const std::uint32_t> members, Aggregation aggregation) -> Scalar {
    if (aggregation == Aggregation::Count) {
        return static_cast<double>(members.size());
    }
    if (aggregation == Aggregation::CountDistinct) {
        std::set<Scalar, decltype([](const Scalar& a, const Scalar& b) { return compare_scalars(a, b) < 0; })> seen;
        for (auto r : members) {
            if (!column.is_null(r)) {
                seen.insert(column.at(r));
            }
        }
        return static_cast<double>(seen.size());
    }
    if (column.kind() != StorageKind::Float64) {
        throw Error(ErrorCode::TypeMismatch,
                    std::string(to_string(aggregation)) + " needs a numeric field, '" + column.name() + "' is not",
                    column.name());
    }
    auto data = column.doubles();
    std::vector<double> values;
    values.reserve(members.size());
    for (auto r : members) {
        if (!column.is_null(r)) {
            values.push_back(data[r]);
        }
    }
    if (values.empty()) {
        return std::monostate{};
    }
    auto sum = [&] {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    };
    auto variance = [&]() -> std::optional<double> {
        if (values.size() < 2) {
            return std::nullopt;
        }
        double mean = sum() / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        return ss / static_cast<double>(values.size() - 1);
    };
    switch (aggregation) {
        case Aggregation::Sum:
            return sum();
        case Aggregation::Mean:
            return sum() / static_cast<double>(values.size());
        case Aggregation::Min:
            return *std::min_element(values.begin(), values.end());
        case Aggregation::Max:
            return *std::max_element(values.begin(), values.end());
        case Aggregation::Median: {
            std::sort(values.begin(), values.end());
            std::size_t n = values.size();
            if (n % 2 == 1) {
                return values[n / 2];
            }
            return values[n / 2 - 1] + (values[n / 2] - values[n / 2 - 1]) / 2.0;
        }
        case Aggregation::Variance:
            if (auto v = variance()) {
                return *v;
            }
            return std::monostate{};
        case Aggregation::Stddev:
            if (auto v = variance()) {
                return std::sqrt(*v);
            }
            return std::monostate{};
        default:
            throw Error(ErrorCode::DerivationError, "measure without aggregation", column.name());
    }
}

auto run_aggregate(const AggregateView& view, Frame& frame) -> ViewTable {
    ViewTable out;
    std::vector<const Column*> keys;
    for (const auto& fid : view.group_by) {
        keys.push_back(&frame.get(fid));
        out.columns.push_back(ViewColumn{fid, keys.back()->kind(), frame.bin(fid)});
    }
    std::vector<const Column*> sources;
    for (const auto& m : view.measures) {
        if (m.aggregation == Aggregation::None) {
            throw Error(ErrorCode::DerivationError, "measure '" + m.fid + "' has no aggregation", m.fid);
        }
        sources.push_back(&frame.get(m.fid));
        out.columns.push_back(ViewColumn{m.out_fid, StorageKind::Float64, std::nullopt});
    }

    std::map<std::vector<Scalar>, std::vector<std::uint32_t>, KeyLess> groups;
    if (keys.empty()) {
        groups[{}];  // grand total exists even over zero rows
    }
    for (std::uint32_t r = 0; r < frame.row_count(); ++r) {
        std::vector<Scalar> key;
        key.reserve(keys.size());
        for (const auto* k : keys) {
            key.push_back(k->at(r));
        }
        groups[std::move(key)].push_back(r);
    }

    out.rows.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        std::vector<Scalar> row = key;
        for (std::size_t m = 0; m < sources.size(); ++m) {
            row.push_back(aggregate(*sources[m], members, view.measures[m].aggregation));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

auto run_raw(const RawView& view, Frame& frame) -> ViewTable {
    ViewTable out;
    std::vector<const Column*> cols;
    for (const auto& fid : view.fids) {
        cols.push_back(&frame.get(fid));
        out.columns.push_back(ViewColumn{fid, cols.back()->kind(), frame.bin(fid)});
    }
    out.rows.resize(frame.row_count());
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
        out.rows[r].reserve(cols.size());
        for (const auto* c : cols) {
            out.rows[r].push_back(c->at(r));
        }
    }
    return out;
}

}  // namespace

auto execute(const Workflow& workflow, const Dataset& dataset) -> ViewTable {
    std::vector<std::uint32_t> rows;
    if (workflow.filter) {
        rows = filter_rows(workflow.filter->filters, dataset);
    } else {
        rows.resize(dataset.row_count());
        std::iota(rows.begin(), rows.end(), 0U);
    }
    Frame frame(dataset, std::move(rows));

    if (workflow.transform) {
        for (const auto& c : workflow.transform->computed) {
            const auto& source = frame.get(c.source_fid);
            auto stats = column_stats(source);
            std::optional<BinInfo> bin;
            if (c.transform.op == Transform::Op::Bin && stats) {
                bin = bin_geometry(*stats, c.transform.bins);
            }
            frame.add(c.out_fid, apply_transform(source, c.transform, stats).renamed(c.out_fid), bin);
        }
    }

    ViewTable out = std::holds_alternative<AggregateView>(workflow.view.mode)
                        ? run_aggregate(std::get<AggregateView>(workflow.view.mode), frame)
                        : run_raw(std::get<RawView>(workflow.view.mode), frame);

    if (workflow.sort) {
        auto index = out.column_index(workflow.sort->fid);
        if (!index) {
            throw Error(ErrorCode::UnknownField, "sort field '" + workflow.sort->fid + "' is not a view column",
                        workflow.sort->fid);
        }
        bool desc = workflow.sort->direction == SortDirection::Desc;
        std::stable_sort(out.rows.begin(), out.rows.end(), [&](const auto& a, const auto& b) {
            auto c = compare_scalars(a[*index], b[*index]);
            return desc ? c > 0 : c < 0;
        });
    }
    return out;
}

auto execute_pivot(const PivotPlan& plan, const Dataset& dataset) -> std::vector<ViewTable> {
    std::vector<std::future<ViewTable>> pending;
    pending.reserve(plan.rollups.size());
    for (const auto& wf : plan.rollups) {
        pending.push_back(std::async(std::launch::async, [&wf, &dataset] { return execute(wf, dataset); }));
    }
    std::vector<ViewTable> out;
    out.reserve(pending.size());
    for (auto& f : pending) {
        out.push_back(f.get());
    }
    return out;
}

}  // namespace walk
