#include <walk/error.hpp>
#include <walk/renderer.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace walk {

namespace {

// Vega-Lite reads '.', '[' and ']' in field names as nested access.
auto vl_field(const std::string& fid) -> std::string {
    std::string out;
    for (char c : fid) {
        if (c == '.' || c == '[' || c == ']' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

auto cell_json(const Scalar& value) -> OrderedJson {
    if (const auto* ts = std::get_if<Timestamp>(&value)) {
        return format_iso_datetime(*ts);
    }
    return scalar_to_json(value);
}

struct ScalarLess {
    auto operator()(const Scalar& a, const Scalar& b) const -> bool { return compare_scalars(a, b) < 0; }
};

class ChartBuilder {
public:
    ChartBuilder(const GraphicSpec& spec, const std::vector<FieldMeta>& fields, const FacetPlan& plan,
                 const ViewTable& view)
        : spec_(spec), plan_(plan), view_(view), resolved_(resolve_fields(spec, fields)),
          mark_(default_mark(spec, fields)) {
        auto workflow = derive_workflow(spec, fields);
        if (const auto* agg = std::get_if<AggregateView>(&workflow.view.mode)) {
            for (const auto& m : agg->measures) {
                measure_outs_.insert(m.out_fid);
            }
        }
        for (auto channel : {Channel::Color, Channel::Size, Channel::Shape, Channel::Opacity}) {
            const auto& refs = spec.channel(channel);
            if (refs.empty()) {
                continue;
            }
            const auto* meta = find_field(resolved_, refs.front().fid);
            bool measure = is_measure_ref(refs.front(), meta, spec.aggregated);
            aux_.emplace_back(channel, measure ? measure_out_fid(refs.front(), spec.aggregated) : refs.front().fid);
        }
    }

    auto build() -> OrderedJson {
        for (const auto& fid : used_fids()) {
            if (!view_.column_index(fid)) {
                throw Error(ErrorCode::RenderError, "field '" + fid + "' is missing from the view data", fid);
            }
        }
        OrderedJson doc = OrderedJson::object();
        doc["$schema"] = kVegaLiteSchemaUrl;
        doc["title"] = spec_.name;
        OrderedJson values = OrderedJson::array();
        for (const auto& row : view_.rows) {
            OrderedJson obj = OrderedJson::object();
            for (std::size_t c = 0; c < view_.columns.size(); ++c) {
                obj[view_.columns[c].fid] = cell_json(row[c]);
            }
            values.push_back(std::move(obj));
        }
        doc["data"] = {{"values", std::move(values)}};

        std::vector<std::size_t> all_rows(view_.rows.size());
        for (std::size_t i = 0; i < all_rows.size(); ++i) {
            all_rows[i] = i;
        }
        auto body = nest(outer_levels(), 0, all_rows);
        for (auto& [key, value] : body.items()) {
            doc[key] = value;
        }
        return doc;
    }

private:
    struct Level {
        std::string fid;
        bool rows;  // vconcat when true, hconcat otherwise
    };

    // Facet levels beyond the innermost row/column facet become explicit
    // concatenations, outer rows first.
    auto outer_levels() const -> std::vector<Level> {
        std::vector<Level> out;
        for (std::size_t i = 0; i + 1 < plan_.row_facets.size(); ++i) {
            out.push_back({plan_.row_facets[i], true});
        }
        for (std::size_t i = 0; i + 1 < plan_.col_facets.size(); ++i) {
            out.push_back({plan_.col_facets[i], false});
        }
        return out;
    }

    auto nest(const std::vector<Level>& levels, std::size_t depth, const std::vector<std::size_t>& rows)
        -> OrderedJson {
        if (depth == levels.size()) {
            return blend();
        }
        const auto& level = levels[depth];
        auto col = *view_.column_index(level.fid);
        std::map<Scalar, std::vector<std::size_t>, ScalarLess> groups;
        for (auto r : rows) {
            groups[view_.rows[r][col]].push_back(r);
        }
        OrderedJson children = OrderedJson::array();
        for (const auto& [value, members] : groups) {
            OrderedJson child = nest(levels, depth + 1, members);
            OrderedJson predicate = OrderedJson::object();
            predicate["field"] = vl_field(level.fid);
            if (is_null(value)) {
                predicate["valid"] = false;
            } else {
                predicate["equal"] = cell_json(value);
            }
            OrderedJson wrapped = OrderedJson::object();
            wrapped["title"] = level.fid + " = " + (is_null(value) ? std::string("null") : scalar_to_text(value));
            wrapped["transform"] = OrderedJson::array({{{"filter", std::move(predicate)}}});
            for (auto& [key, v] : child.items()) {
                wrapped[key] = v;
            }
            children.push_back(std::move(wrapped));
        }
        OrderedJson out = OrderedJson::object();
        out[level.rows ? "vconcat" : "hconcat"] = std::move(children);
        return out;
    }

    auto blend() -> OrderedJson {
        if (plan_.measures.size() <= 1) {
            return unit(0);
        }
        OrderedJson panels = OrderedJson::array();
        for (std::size_t i = 0; i < plan_.measures.size(); ++i) {
            panels.push_back(unit(i));
        }
        OrderedJson out = OrderedJson::object();
        out[plan_.measure_axis == MeasureAxis::X ? "hconcat" : "vconcat"] = std::move(panels);
        return out;
    }

    auto type_of(const std::string& fid) const -> std::string {
        if (measure_outs_.count(fid) != 0) {
            return "quantitative";
        }
        if (bin_of(fid)) {
            return "ordinal";
        }
        if (const auto* meta = find_field(resolved_, fid)) {
            return std::string(to_string(meta->semantic_type));
        }
        return "nominal";
    }

    auto bin_of(const std::string& fid) const -> std::optional<BinInfo> {
        if (auto idx = view_.column_index(fid)) {
            return view_.columns[*idx].bin;
        }
        return std::nullopt;
    }

    auto field_def(const std::string& fid) const -> OrderedJson {
        OrderedJson def = OrderedJson::object();
        def["field"] = vl_field(fid);
        def["type"] = type_of(fid);
        return def;
    }

    static auto bin_label(const BinInfo& bin) -> OrderedJson {
        return {{"labelExpr", "format(datum.value, '~g') + '–' + format(datum.value + " + format_number(bin.width) +
                                  ", '~g')"}};
    }

    auto is_measure_field(const std::string& fid) const -> bool { return type_of(fid) == "quantitative"; }

    auto stack_value() const -> std::optional<OrderedJson> {
        switch (spec_.stack) {
            case StackMode::Stack:
                return std::nullopt;  // the chart runtime's default stacking
            case StackMode::Normalize:
                return OrderedJson("normalize");
            case StackMode::None:
                return OrderedJson(nullptr);
        }
        return std::nullopt;
    }

    auto positional(const std::string& fid, bool measure_axis) const -> OrderedJson {
        auto def = field_def(fid);
        if (measure_axis) {
            if (auto stack = stack_value()) {
                def["stack"] = *stack;
            }
        } else if (spec_.sort && !is_measure_field(fid)) {
            def["sort"] = nullptr;
        }
        if (auto bin = bin_of(fid)) {
            def["axis"] = bin_label(*bin);
        }
        return def;
    }

    auto unit(std::size_t panel) -> OrderedJson {
        std::optional<std::string> x = plan_.x_inner;
        std::optional<std::string> y = plan_.y_inner;
        if (plan_.measure_axis == MeasureAxis::X) {
            x = plan_.measures[panel];
        } else if (plan_.measure_axis == MeasureAxis::Y) {
            y = plan_.measures[panel];
        }
        bool x_measure = plan_.measure_axis == MeasureAxis::X;
        bool y_measure = plan_.measure_axis == MeasureAxis::Y;

        OrderedJson encoding = OrderedJson::object();
        bool has_color = std::any_of(aux_.begin(), aux_.end(), [](const auto& a) { return a.first == Channel::Color; });
        if (mark_ == MarkType::Arc) {
            std::optional<std::string> measure = x_measure ? x : (y_measure ? y : std::nullopt);
            std::optional<std::string> dim = x_measure ? y : (y_measure ? x : (x ? x : y));
            if (!measure && x && y && is_measure_field(*y)) {
                measure = y;
                dim = x;
            }
            if (measure) {
                encoding["theta"] = positional(*measure, true);
            }
            if (dim && !has_color) {
                encoding["color"] = color_def(*dim);
            }
        } else {
            if (x) {
                encoding["x"] = positional(*x, x_measure);
            }
            if (y) {
                encoding["y"] = positional(*y, y_measure);
            }
        }
        if (!plan_.col_facets.empty()) {
            encoding["column"] = field_def(plan_.col_facets.back());
        }
        if (!plan_.row_facets.empty()) {
            encoding["row"] = field_def(plan_.row_facets.back());
        }
        for (const auto& [channel, fid] : aux_) {
            auto name = std::string(to_string(channel));
            encoding[name] = channel == Channel::Color ? color_def(fid) : field_def(fid);
            if (channel == Channel::Shape) {
                // Shape scales are discrete only.
                auto type = encoding[name]["type"].get<std::string>();
                if (type != "nominal" && type != "ordinal") {
                    encoding[name]["type"] = "ordinal";
                }
            }
        }
        if (mark_ == MarkType::Text) {
            std::optional<std::string> text = !plan_.measures.empty() ? std::optional(plan_.measures[panel]) : x;
            if (!text) {
                text = y;
            }
            if (text) {
                encoding["text"] = field_def(*text);
            }
        }
        auto tips = used_fids();
        if (!tips.empty()) {
            OrderedJson tooltip = OrderedJson::array();
            for (const auto& fid : tips) {
                tooltip.push_back(field_def(fid));
            }
            encoding["tooltip"] = std::move(tooltip);
        }

        OrderedJson out = OrderedJson::object();
        out["mark"] = {{"type", to_string(mark_)}};
        out["encoding"] = std::move(encoding);
        if (spec_.config.layout) {
            out["width"] = spec_.config.layout->width;
            out["height"] = spec_.config.layout->height;
        }
        return out;
    }

    auto color_def(const std::string& fid) const -> OrderedJson {
        auto def = field_def(fid);
        if (spec_.config.palette != "default" && !spec_.config.palette.empty()) {
            def["scale"] = {{"scheme", spec_.config.palette}};
        }
        if (auto bin = bin_of(fid)) {
            def["legend"] = bin_label(*bin);
        }
        return def;
    }

    // Every view column the chart refers to: facets, inner fields, measures
    // and the remaining channels.
    auto used_fids() const -> std::vector<std::string> {
        std::vector<std::string> out;
        auto push = [&](const std::string& fid) {
            if (std::find(out.begin(), out.end(), fid) == out.end()) {
                out.push_back(fid);
            }
        };
        for (const auto& f : plan_.row_facets) {
            push(f);
        }
        for (const auto& f : plan_.col_facets) {
            push(f);
        }
        if (plan_.x_inner) {
            push(*plan_.x_inner);
        }
        if (plan_.y_inner) {
            push(*plan_.y_inner);
        }
        for (const auto& m : plan_.measures) {
            push(m);
        }
        for (const auto& a : aux_) {
            push(a.second);
        }
        return out;
    }

    const GraphicSpec& spec_;
    const FacetPlan& plan_;
    const ViewTable& view_;
    std::vector<FieldMeta> resolved_;
    MarkType mark_;
    std::set<std::string> measure_outs_;
    std::vector<std::pair<Channel, std::string>> aux_;
};

// Distinct key paths of a roll-up table, as a tree.
void insert_path(PivotNode& node, const std::vector<Scalar>& path, std::size_t depth) {
    if (depth == path.size()) {
        return;
    }
    auto it = std::lower_bound(node.children.begin(), node.children.end(), path[depth],
                               [](const PivotNode& n, const Scalar& v) { return compare_scalars(n.value, v) < 0; });
    if (it == node.children.end() || compare_scalars(it->value, path[depth]) != 0) {
        PivotNode child;
        child.value = path[depth];
        child.depth = static_cast<int>(depth) + 1;
        it = node.children.insert(it, std::move(child));
    }
    insert_path(*it, path, depth + 1);
}

auto finish_spans(PivotNode& node) -> std::size_t {
    if (node.children.empty()) {
        node.leaf_span = 1;
        return 1;
    }
    std::size_t span = 0;
    for (auto& child : node.children) {
        span += finish_spans(child);
    }
    node.leaf_span = span;
    return span;
}

auto node_json(const PivotNode& node) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["value"] = cell_json(node.value);
    out["depth"] = node.depth;
    out["leaf_span"] = node.leaf_span;
    OrderedJson children = OrderedJson::array();
    for (const auto& c : node.children) {
        children.push_back(node_json(c));
    }
    out["children"] = std::move(children);
    return out;
}

auto scalars_json(const std::vector<Scalar>& values) -> OrderedJson {
    OrderedJson out = OrderedJson::array();
    for (const auto& v : values) {
        out.push_back(cell_json(v));
    }
    return out;
}

using KeySet = std::set<std::vector<Scalar>, decltype([](const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
                            return std::lexicographical_compare(
                                a.begin(), a.end(), b.begin(), b.end(),
                                [](const Scalar& x, const Scalar& y) { return compare_scalars(x, y) < 0; });
                        })>;

}  // namespace

auto to_chart(const GraphicSpec& spec, const std::vector<FieldMeta>& fields, const FacetPlan& plan,
              const ViewTable& view) -> OrderedJson {
    if (spec.config.coord == CoordSystem::Geographic) {
        throw Error(ErrorCode::RenderError, "geographic rendering unsupported", "config.coord");
    }
    return ChartBuilder(spec, fields, plan, view).build();
}

auto PivotModel::find(const std::vector<Scalar>& col, const std::vector<Scalar>& row) const -> const PivotCell* {
    auto same = [](const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
        return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const Scalar& x, const Scalar& y) {
                   return compare_scalars(x, y) == 0;
               });
    };
    for (const auto& cell : cells) {
        if (same(cell.col, col) && same(cell.row, row)) {
            return &cell;
        }
    }
    return nullptr;
}

auto to_pivot(const PivotPlan& plan, const std::vector<ViewTable>& rollups) -> PivotModel {
    const std::size_t nc = plan.col_path.size();
    const std::size_t nr = plan.row_path.size();
    if (rollups.size() != (nc + 1) * (nr + 1)) {
        throw Error(ErrorCode::InconsistentRollups, "expected " + std::to_string((nc + 1) * (nr + 1)) +
                                                        " roll-ups, got " + std::to_string(rollups.size()));
    }
    PivotModel model;
    model.col_path = plan.col_path;
    model.row_path = plan.row_path;
    model.measures = plan.measures;

    // keys[i][j] holds the (col prefix ++ row prefix) tuples of roll-up (i, j).
    std::vector<std::vector<KeySet>> keys(nc + 1, std::vector<KeySet>(nr + 1));
    for (std::size_t i = 0; i <= nc; ++i) {
        for (std::size_t j = 0; j <= nr; ++j) {
            const auto& table = rollups[plan.rollup_index(i, j)];
            std::vector<std::size_t> key_cols;
            std::vector<std::size_t> value_cols;
            for (std::size_t k = 0; k < i; ++k) {
                key_cols.push_back(table.column_index(plan.col_path[k]).value_or(table.columns.size()));
            }
            for (std::size_t k = 0; k < j; ++k) {
                key_cols.push_back(table.column_index(plan.row_path[k]).value_or(table.columns.size()));
            }
            for (const auto& m : plan.measures) {
                value_cols.push_back(table.column_index(m.out_fid).value_or(table.columns.size()));
            }
            for (auto c : key_cols) {
                if (c >= table.columns.size()) {
                    throw Error(ErrorCode::InconsistentRollups, "roll-up is missing a key column");
                }
            }
            for (auto c : value_cols) {
                if (c >= table.columns.size()) {
                    throw Error(ErrorCode::InconsistentRollups, "roll-up is missing a measure column");
                }
            }
            for (const auto& row : table.rows) {
                PivotCell cell;
                std::vector<Scalar> key;
                for (std::size_t k = 0; k < key_cols.size(); ++k) {
                    key.push_back(row[key_cols[k]]);
                    (k < i ? cell.col : cell.row).push_back(row[key_cols[k]]);
                }
                for (auto c : value_cols) {
                    cell.values.push_back(row[c]);
                }
                keys[i][j].insert(std::move(key));
                model.cells.push_back(std::move(cell));
            }
        }
    }

    for (std::size_t i = 0; i <= nc; ++i) {
        for (std::size_t j = 0; j <= nr; ++j) {
            for (const auto& key : keys[i][j]) {
                if (i > 0) {
                    auto parent = key;
                    parent.erase(parent.begin() + static_cast<std::ptrdiff_t>(i) - 1);
                    if (keys[i - 1][j].count(parent) == 0) {
                        throw Error(ErrorCode::InconsistentRollups,
                                    "column path at depth " + std::to_string(i) + " has no parent at depth " +
                                        std::to_string(i - 1));
                    }
                }
                if (j > 0) {
                    auto parent = key;
                    parent.pop_back();
                    if (keys[i][j - 1].count(parent) == 0) {
                        throw Error(ErrorCode::InconsistentRollups,
                                    "row path at depth " + std::to_string(j) + " has no parent at depth " +
                                        std::to_string(j - 1));
                    }
                }
            }
        }
    }

    for (const auto& key : keys[nc][0]) {
        insert_path(model.col_tree, key, 0);
    }
    for (const auto& key : keys[0][nr]) {
        insert_path(model.row_tree, key, 0);
    }
    finish_spans(model.col_tree);
    finish_spans(model.row_tree);
    return model;
}

auto pivot_model_to_json(const PivotModel& model) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    OrderedJson measures = OrderedJson::array();
    for (const auto& m : model.measures) {
        measures.push_back({{"fid", m.fid}, {"aggregation", to_string(m.aggregation)}, {"out_fid", m.out_fid}});
    }
    out["measures"] = std::move(measures);
    out["col_path"] = model.col_path;
    out["row_path"] = model.row_path;
    out["col_tree"] = node_json(model.col_tree);
    out["row_tree"] = node_json(model.row_tree);
    OrderedJson cells = OrderedJson::array();
    for (const auto& c : model.cells) {
        OrderedJson cell = OrderedJson::object();
        cell["col"] = scalars_json(c.col);
        cell["row"] = scalars_json(c.row);
        cell["values"] = scalars_json(c.values);
        cells.push_back(std::move(cell));
    }
    out["cells"] = std::move(cells);
    return out;
}

}  // namespace walk
