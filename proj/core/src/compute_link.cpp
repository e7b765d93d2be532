#include <walk/compute_link.hpp>
#include <walk/error.hpp>

#include <algorithm>
#include <cmath>

namespace walk {

auto Workflow::output_fids() const -> std::vector<std::string> {
    if (const auto* agg = std::get_if<AggregateView>(&view.mode)) {
        std::vector<std::string> out = agg->group_by;
        for (const auto& m : agg->measures) {
            out.push_back(m.out_fid);
        }
        return out;
    }
    return std::get<RawView>(view.mode).fids;
}

auto to_string(MeasureAxis axis) -> std::string_view {
    switch (axis) {
        case MeasureAxis::X:
            return "x";
        case MeasureAxis::Y:
            return "y";
        case MeasureAxis::None:
            return "none";
    }
    return "none";
}

namespace {

void push_unique(std::vector<std::string>& list, const std::string& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) {
        list.push_back(value);
    }
}

auto canonical_filters(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> std::vector<Filter> {
    std::vector<Filter> filters = spec.filters;
    for (auto& filter : filters) {
        const auto* meta = find_field(fields, filter.fid);
        if (meta == nullptr) {
            throw Error(ErrorCode::DerivationError, "unknown filter field '" + filter.fid + "'", "filters");
        }
        filter.temporal = meta->semantic_type == SemanticType::Temporal;
    }
    // The filter list is a conjunction; a fixed order makes derivation
    // independent of the order the user added filters in.
    std::stable_sort(filters.begin(), filters.end(), [](const Filter& a, const Filter& b) {
        if (a.fid != b.fid) {
            return a.fid < b.fid;
        }
        return filter_to_json(a).dump() < filter_to_json(b).dump();
    });
    return filters;
}

auto require_field(const std::vector<FieldMeta>& all, const std::string& fid) -> const FieldMeta& {
    const auto* meta = find_field(all, fid);
    if (meta == nullptr) {
        throw Error(ErrorCode::DerivationError, "unknown field '" + fid + "'");
    }
    return *meta;
}

auto measure_of(const FieldRef& ref) -> MeasureSpec {
    return MeasureSpec{ref.fid, ref.aggregation, measure_out_fid(ref, true)};
}

void push_measure(std::vector<MeasureSpec>& list, MeasureSpec measure) {
    auto same = [&](const MeasureSpec& m) { return m.out_fid == measure.out_fid; };
    if (std::none_of(list.begin(), list.end(), same)) {
        list.push_back(std::move(measure));
    }
}

// Filter and transform steps shared by the chart workflow and every pivot
// roll-up.
auto base_workflow(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> Workflow {
    Workflow wf;
    if (!spec.filters.empty()) {
        wf.filter = FilterStep{canonical_filters(spec, fields)};
    }
    if (!spec.computed.empty()) {
        for (const auto& c : spec.computed) {
            require_field(fields, c.source_fid);
        }
        wf.transform = TransformStep{spec.computed};
    }
    return wf;
}

struct AxisSplit {
    std::vector<std::string> dims;
    std::vector<std::string> measures;
};

auto split_axis(const GraphicSpec& spec, Channel channel, const std::vector<FieldMeta>& all) -> AxisSplit {
    AxisSplit out;
    for (const auto& ref : spec.channel(channel)) {
        const auto& meta = require_field(all, ref.fid);
        if (is_measure_ref(ref, &meta, spec.aggregated)) {
            out.measures.push_back(measure_out_fid(ref, spec.aggregated));
        } else {
            if (!out.measures.empty()) {
                throw Error(ErrorCode::FacetError, "dimension '" + ref.fid + "' follows a measure",
                            "channels." + std::string(to_string(channel)));
            }
            out.dims.push_back(ref.fid);
        }
    }
    return out;
}

}  // namespace

auto temporal_filter_value(const Scalar& value) -> Scalar {
    if (is_null(value)) {
        return value;
    }
    if (const auto* text = std::get_if<std::string>(&value)) {
        if (auto ts = parse_iso_datetime(*text)) {
            return *ts;
        }
        throw Error(ErrorCode::TypeMismatch, "'" + *text + "' is not an ISO-8601 date");
    }
    if (const auto* number = std::get_if<double>(&value)) {
        if (std::floor(*number) != *number || std::fabs(*number) > 9.0e15) {
            throw Error(ErrorCode::TypeMismatch, "temporal filter value must be whole epoch milliseconds");
        }
        return Timestamp{static_cast<std::int64_t>(*number)};
    }
    return value;
}

auto temporal_range_bounds(const Range& range) -> std::pair<std::int64_t, std::int64_t> {
    auto clamp = [](double v) { return std::clamp(v, -9.0e15, 9.0e15); };
    return {static_cast<std::int64_t>(std::ceil(clamp(range.lo))),
            static_cast<std::int64_t>(std::floor(clamp(range.hi)))};
}

auto derive_workflow(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> Workflow {
    auto all = resolve_fields(spec, fields);
    Workflow wf = base_workflow(spec, fields);
    auto mark = default_mark(spec, fields);

    if (mark == MarkType::Table) {
        AggregateView view;
        for (auto channel : {Channel::X, Channel::Y}) {
            for (const auto& ref : spec.channel(channel)) {
                require_field(all, ref.fid);
                push_unique(view.group_by, ref.fid);
            }
        }
        for (const auto& ref : spec.table_values()) {
            require_field(all, ref.fid);
            push_measure(view.measures, measure_of(ref));
        }
        wf.view.mode = std::move(view);
    } else if (spec.aggregated) {
        AggregateView view;
        for (auto channel : kChannels) {
            for (const auto& ref : spec.channel(channel)) {
                const auto& meta = require_field(all, ref.fid);
                if (is_measure_ref(ref, &meta, true)) {
                    if (ref.aggregation == Aggregation::None) {
                        throw Error(ErrorCode::DerivationError, "measure '" + ref.fid + "' has no aggregation");
                    }
                    push_measure(view.measures, measure_of(ref));
                } else {
                    push_unique(view.group_by, ref.fid);
                }
            }
        }
        wf.view.mode = std::move(view);
    } else {
        RawView view;
        for (auto channel : kChannels) {
            for (const auto& ref : spec.channel(channel)) {
                require_field(all, ref.fid);
                push_unique(view.fids, ref.fid);
            }
        }
        wf.view.mode = std::move(view);
    }

    if (spec.sort) {
        std::optional<std::string> column;
        const auto& fid = spec.sort->fid;
        if (const auto* agg = std::get_if<AggregateView>(&wf.view.mode)) {
            if (std::find(agg->group_by.begin(), agg->group_by.end(), fid) != agg->group_by.end()) {
                column = fid;
            } else {
                for (const auto& m : agg->measures) {
                    if (m.fid == fid) {
                        column = m.out_fid;
                        break;
                    }
                }
            }
        } else {
            const auto& raw = std::get<RawView>(wf.view.mode);
            if (std::find(raw.fids.begin(), raw.fids.end(), fid) != raw.fids.end()) {
                column = fid;
            }
        }
        if (!column) {
            throw Error(ErrorCode::DerivationError, "sort field '" + fid + "' is not in the view", "sort.fid");
        }
        wf.sort = SortStep{*column, spec.sort->direction};
    }
    return wf;
}

auto derive_facets(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> FacetPlan {
    if (default_mark(spec, fields) == MarkType::Table) {
        throw Error(ErrorCode::FacetError, "table marks use a pivot plan, not facets", "mark");
    }
    auto all = resolve_fields(spec, fields);
    auto x = split_axis(spec, Channel::X, all);
    auto y = split_axis(spec, Channel::Y, all);

    FacetPlan plan;
    auto place_dims = [](AxisSplit& axis, std::optional<std::string>& inner, std::vector<std::string>& facets,
                         bool axis_has_measures) {
        facets = axis.dims;
        if (!axis_has_measures && !facets.empty()) {
            inner = facets.back();
            facets.pop_back();
        }
    };

    if (!x.measures.empty() && !y.measures.empty()) {
        // Measures on both axes: innermost of each forms a scatter.
        plan.x_inner = x.measures.back();
        plan.y_inner = y.measures.back();
        plan.col_facets = x.dims;
        plan.row_facets = y.dims;
        plan.measure_axis = MeasureAxis::None;
    } else if (!y.measures.empty()) {
        plan.measure_axis = MeasureAxis::Y;
        plan.measures = y.measures;
        place_dims(y, plan.y_inner, plan.row_facets, true);
        place_dims(x, plan.x_inner, plan.col_facets, false);
    } else if (!x.measures.empty()) {
        plan.measure_axis = MeasureAxis::X;
        plan.measures = x.measures;
        place_dims(x, plan.x_inner, plan.col_facets, true);
        place_dims(y, plan.y_inner, plan.row_facets, false);
    } else {
        place_dims(x, plan.x_inner, plan.col_facets, false);
        place_dims(y, plan.y_inner, plan.row_facets, false);
    }
    return plan;
}

auto derive_pivot(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> PivotPlan {
    if (default_mark(spec, fields) != MarkType::Table) {
        throw Error(ErrorCode::PivotError, "pivot plans need a table mark", "mark");
    }
    auto all = resolve_fields(spec, fields);
    PivotPlan plan;
    for (auto [channel, path] : {std::pair{Channel::X, &plan.col_path}, std::pair{Channel::Y, &plan.row_path}}) {
        for (const auto& ref : spec.channel(channel)) {
            const auto& meta = require_field(all, ref.fid);
            if (is_measure_ref(ref, &meta, spec.aggregated)) {
                throw Error(ErrorCode::PivotError, "measure '" + ref.fid + "' on a pivot axis",
                            "channels." + std::string(to_string(channel)));
            }
            path->push_back(ref.fid);
        }
    }
    for (const auto& ref : spec.table_values()) {
        require_field(all, ref.fid);
        push_measure(plan.measures, measure_of(ref));
    }

    Workflow base = base_workflow(spec, fields);
    for (std::size_t i = 0; i <= plan.col_path.size(); ++i) {
        for (std::size_t j = 0; j <= plan.row_path.size(); ++j) {
            AggregateView view;
            for (std::size_t k = 0; k < i; ++k) {
                push_unique(view.group_by, plan.col_path[k]);
            }
            for (std::size_t k = 0; k < j; ++k) {
                push_unique(view.group_by, plan.row_path[k]);
            }
            view.measures = plan.measures;
            Workflow wf = base;
            wf.view.mode = std::move(view);
            plan.rollups.push_back(std::move(wf));
        }
    }
    return plan;
}

// ---------------------------------------------------------------- JSON

namespace {

auto string_array(const std::vector<std::string>& values) -> OrderedJson {
    OrderedJson out = OrderedJson::array();
    for (const auto& v : values) {
        out.push_back(v);
    }
    return out;
}

auto measure_to_json(const MeasureSpec& m) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["fid"] = m.fid;
    out["aggregation"] = to_string(m.aggregation);
    out["out_fid"] = m.out_fid;
    return out;
}

[[noreturn]] void bad_step(const std::string& path, const std::string& reason) {
    throw Error(ErrorCode::SchemaViolation, reason, path);
}

auto read_strings(const OrderedJson& in, const std::string& path) -> std::vector<std::string> {
    if (!in.is_array()) {
        bad_step(path, "expected an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : in) {
        if (!v.is_string()) {
            bad_step(path, "expected an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

auto workflow_to_json(const Workflow& workflow) -> OrderedJson {
    OrderedJson steps = OrderedJson::array();
    if (workflow.filter) {
        OrderedJson step = OrderedJson::object();
        step["step"] = "filter";
        OrderedJson filters = OrderedJson::array();
        for (const auto& f : workflow.filter->filters) {
            filters.push_back(filter_to_json(f));
        }
        step["filters"] = std::move(filters);
        steps.push_back(std::move(step));
    }
    if (workflow.transform) {
        OrderedJson step = OrderedJson::object();
        step["step"] = "transform";
        OrderedJson computed = OrderedJson::array();
        for (const auto& c : workflow.transform->computed) {
            computed.push_back(computed_to_json(c));
        }
        step["computed"] = std::move(computed);
        steps.push_back(std::move(step));
    }
    {
        OrderedJson step = OrderedJson::object();
        step["step"] = "view";
        if (const auto* agg = std::get_if<AggregateView>(&workflow.view.mode)) {
            step["mode"] = "aggregate";
            step["group_by"] = string_array(agg->group_by);
            OrderedJson measures = OrderedJson::array();
            for (const auto& m : agg->measures) {
                measures.push_back(measure_to_json(m));
            }
            step["measures"] = std::move(measures);
        } else {
            step["mode"] = "raw";
            step["fids"] = string_array(std::get<RawView>(workflow.view.mode).fids);
        }
        steps.push_back(std::move(step));
    }
    if (workflow.sort) {
        OrderedJson step = OrderedJson::object();
        step["step"] = "sort";
        step["fid"] = workflow.sort->fid;
        step["direction"] = to_string(workflow.sort->direction);
        steps.push_back(std::move(step));
    }
    OrderedJson out = OrderedJson::object();
    out["steps"] = std::move(steps);
    return out;
}

auto workflow_from_json(const OrderedJson& document) -> Workflow {
    if (!document.is_object() || !document.contains("steps") || !document["steps"].is_array()) {
        bad_step("steps", "expected {\"steps\": [...]}");
    }
    Workflow wf;
    int last_rank = -1;
    bool has_view = false;
    const auto& steps = document["steps"];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& step = steps[i];
        auto path = "steps[" + std::to_string(i) + "]";
        if (!step.is_object() || !step.contains("step") || !step["step"].is_string()) {
            bad_step(path, "step needs a \"step\" tag");
        }
        auto tag = step["step"].get<std::string>();
        int rank = tag == "filter" ? 0 : tag == "transform" ? 1 : tag == "view" ? 2 : tag == "sort" ? 3 : -1;
        if (rank < 0) {
            bad_step(path + ".step", "unknown step '" + tag + "'");
        }
        if (rank <= last_rank) {
            bad_step(path, "steps must appear once each, in filter, transform, view, sort order");
        }
        last_rank = rank;
        for (const auto& [key, _] : step.items()) {
            static const std::vector<std::vector<std::string>> allowed{
                {"step", "filters"},
                {"step", "computed"},
                {"step", "mode", "group_by", "measures", "fids"},
                {"step", "fid", "direction"}};
            const auto& keys = allowed[static_cast<std::size_t>(rank)];
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                bad_step(path + "." + key, "unknown key");
            }
        }
        switch (rank) {
            case 0: {
                FilterStep fs;
                const auto& filters = step.value("filters", OrderedJson::array());
                if (!filters.is_array()) {
                    bad_step(path + ".filters", "expected an array");
                }
                for (std::size_t k = 0; k < filters.size(); ++k) {
                    fs.filters.push_back(
                        filter_from_json(filters[k], path + ".filters[" + std::to_string(k) + "]", true));
                }
                wf.filter = std::move(fs);
                break;
            }
            case 1: {
                TransformStep ts;
                const auto& computed = step.value("computed", OrderedJson::array());
                if (!computed.is_array()) {
                    bad_step(path + ".computed", "expected an array");
                }
                for (std::size_t k = 0; k < computed.size(); ++k) {
                    ts.computed.push_back(
                        computed_from_json(computed[k], path + ".computed[" + std::to_string(k) + "]"));
                }
                wf.transform = std::move(ts);
                break;
            }
            case 2: {
                has_view = true;
                auto mode = step.value("mode", std::string{});
                if (mode == "aggregate") {
                    AggregateView view;
                    view.group_by = read_strings(step.value("group_by", OrderedJson::array()), path + ".group_by");
                    const auto& measures = step.value("measures", OrderedJson::array());
                    if (!measures.is_array()) {
                        bad_step(path + ".measures", "expected an array");
                    }
                    for (std::size_t k = 0; k < measures.size(); ++k) {
                        const auto& m = measures[k];
                        auto mpath = path + ".measures[" + std::to_string(k) + "]";
                        if (!m.is_object() || !m.contains("fid") || !m["fid"].is_string() ||
                            !m.contains("aggregation") || !m["aggregation"].is_string()) {
                            bad_step(mpath, "measure needs fid and aggregation");
                        }
                        auto aggregation = parse_aggregation(m["aggregation"].get<std::string>());
                        if (!aggregation || *aggregation == Aggregation::None) {
                            bad_step(mpath + ".aggregation", "unknown aggregation");
                        }
                        MeasureSpec spec{m["fid"].get<std::string>(), *aggregation, {}};
                        spec.out_fid = m.contains("out_fid") && m["out_fid"].is_string()
                                           ? m["out_fid"].get<std::string>()
                                           : spec.fid + "_" + std::string(to_string(*aggregation));
                        view.measures.push_back(std::move(spec));
                    }
                    wf.view.mode = std::move(view);
                } else if (mode == "raw") {
                    wf.view.mode = RawView{read_strings(step.value("fids", OrderedJson::array()), path + ".fids")};
                } else {
                    bad_step(path + ".mode", "mode must be aggregate or raw");
                }
                break;
            }
            default: {
                if (!step.contains("fid") || !step["fid"].is_string()) {
                    bad_step(path + ".fid", "sort needs a fid");
                }
                auto direction = step.value("direction", std::string{"asc"});
                if (direction != "asc" && direction != "desc") {
                    bad_step(path + ".direction", "direction must be asc or desc");
                }
                wf.sort = SortStep{step["fid"].get<std::string>(),
                                   direction == "asc" ? SortDirection::Asc : SortDirection::Desc};
                break;
            }
        }
    }
    if (!has_view) {
        bad_step("steps", "a workflow needs a view step");
    }
    auto outputs = wf.output_fids();
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (std::find(outputs.begin(), outputs.begin() + static_cast<std::ptrdiff_t>(i), outputs[i]) !=
            outputs.begin() + static_cast<std::ptrdiff_t>(i)) {
            bad_step("steps", "duplicate output column '" + outputs[i] + "'");
        }
    }
    return wf;
}

auto facet_plan_to_json(const FacetPlan& plan) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["x_inner"] = plan.x_inner ? OrderedJson(*plan.x_inner) : OrderedJson(nullptr);
    out["y_inner"] = plan.y_inner ? OrderedJson(*plan.y_inner) : OrderedJson(nullptr);
    out["col_facets"] = string_array(plan.col_facets);
    out["row_facets"] = string_array(plan.row_facets);
    out["measure_axis"] = to_string(plan.measure_axis);
    out["measures"] = string_array(plan.measures);
    return out;
}

auto pivot_plan_to_json(const PivotPlan& plan) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["col_path"] = string_array(plan.col_path);
    out["row_path"] = string_array(plan.row_path);
    OrderedJson measures = OrderedJson::array();
    for (const auto& m : plan.measures) {
        measures.push_back(measure_to_json(m));
    }
    out["measures"] = std::move(measures);
    OrderedJson rollups = OrderedJson::array();
    for (const auto& wf : plan.rollups) {
        rollups.push_back(workflow_to_json(wf));
    }
    out["rollups"] = std::move(rollups);
    return out;
}

}  // namespace walk
