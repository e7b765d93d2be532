#include <walk/spec_model.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace walk {

auto to_string(MarkType mark) -> std::string_view {
    switch (mark) {
        case MarkType::Auto:
            return "auto";
        case MarkType::Bar:
            return "bar";
        case MarkType::Line:
            return "line";
        case MarkType::Area:
            return "area";
        case MarkType::Point:
            return "point";
        case MarkType::Circle:
            return "circle";
        case MarkType::Tick:
            return "tick";
        case MarkType::Rect:
            return "rect";
        case MarkType::Arc:
            return "arc";
        case MarkType::Text:
            return "text";
        case MarkType::Table:
            return "table";
    }
    return "auto";
}

auto to_string(Channel channel) -> std::string_view {
    switch (channel) {
        case Channel::X:
            return "x";
        case Channel::Y:
            return "y";
        case Channel::Color:
            return "color";
        case Channel::Size:
            return "size";
        case Channel::Shape:
            return "shape";
        case Channel::Opacity:
            return "opacity";
    }
    return "x";
}

auto to_string(Aggregation aggregation) -> std::string_view {
    switch (aggregation) {
        case Aggregation::None:
            return "none";
        case Aggregation::Sum:
            return "sum";
        case Aggregation::Mean:
            return "mean";
        case Aggregation::Count:
            return "count";
        case Aggregation::Min:
            return "min";
        case Aggregation::Max:
            return "max";
        case Aggregation::Median:
            return "median";
        case Aggregation::Variance:
            return "variance";
        case Aggregation::Stddev:
            return "stddev";
        case Aggregation::CountDistinct:
            return "count_distinct";
    }
    return "none";
}

auto to_string(SortDirection direction) -> std::string_view {
    return direction == SortDirection::Asc ? "asc" : "desc";
}

auto to_string(StackMode stack) -> std::string_view {
    switch (stack) {
        case StackMode::Stack:
            return "stack";
        case StackMode::Normalize:
            return "normalize";
        case StackMode::None:
            return "none";
    }
    return "none";
}

auto to_string(CoordSystem coord) -> std::string_view {
    return coord == CoordSystem::Generic ? "generic" : "geographic";
}

auto to_string(Transform::Op op) -> std::string_view {
    switch (op) {
        case Transform::Op::Log2:
            return "log2";
        case Transform::Op::Log10:
            return "log10";
        case Transform::Op::Bin:
            return "bin";
    }
    return "log2";
}

auto parse_mark(std::string_view text) -> std::optional<MarkType> {
    for (auto m : {MarkType::Auto, MarkType::Bar, MarkType::Line, MarkType::Area, MarkType::Point, MarkType::Circle,
                   MarkType::Tick, MarkType::Rect, MarkType::Arc, MarkType::Text, MarkType::Table}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    return std::nullopt;
}

auto parse_channel(std::string_view text) -> std::optional<Channel> {
    for (auto c : kChannels) {
        if (to_string(c) == text) {
            return c;
        }
    }
    return std::nullopt;
}

auto parse_aggregation(std::string_view text) -> std::optional<Aggregation> {
    if (text == "none") {
        return Aggregation::None;
    }
    for (auto a : kAggregations) {
        if (to_string(a) == text) {
            return a;
        }
    }
    return std::nullopt;
}

void to_json(nlohmann::json& out, const Violation& violation) {
    out = nlohmann::json{{"code", violation.code}, {"path", violation.path}, {"message", violation.message}};
}

auto find_field(const std::vector<FieldMeta>& fields, std::string_view fid) -> const FieldMeta* {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const FieldMeta& f) { return f.fid == fid; });
    return it == fields.end() ? nullptr : &*it;
}

auto is_measure_ref(const FieldRef& ref, const FieldMeta* meta, bool aggregated) -> bool {
    bool measure_field = meta != nullptr && meta->analytic_type == AnalyticType::Measure;
    if (!aggregated) {
        return measure_field;
    }
    return ref.aggregation != Aggregation::None || measure_field;
}

auto measure_out_fid(const FieldRef& ref, bool aggregated) -> std::string {
    if (!aggregated || ref.aggregation == Aggregation::None) {
        return ref.fid;
    }
    return ref.fid + "_" + std::string(to_string(ref.aggregation));
}

auto resolve_fields(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> std::vector<FieldMeta> {
    std::vector<FieldMeta> out = fields;
    for (const auto& computed : spec.computed) {
        const auto* source = find_field(fields, computed.source_fid);
        if (source == nullptr || find_field(out, computed.out_fid) != nullptr) {
            continue;
        }
        FieldMeta meta;
        meta.fid = computed.out_fid;
        meta.name = std::string(to_string(computed.transform.op)) + "(" + source->name + ")";
        if (computed.transform.op == Transform::Op::Bin) {
            meta.semantic_type = SemanticType::Ordinal;
            meta.analytic_type = AnalyticType::Dimension;
        } else {
            meta.semantic_type = SemanticType::Quantitative;
            meta.analytic_type = AnalyticType::Measure;
        }
        out.push_back(std::move(meta));
    }
    return out;
}

namespace {

enum class FieldClass : std::uint8_t { Empty, OrderedDimension, NominalDimension, Measure };

auto classify(const std::vector<FieldRef>& refs, const std::vector<FieldMeta>& fields, bool aggregated)
    -> FieldClass {
    if (refs.empty()) {
        return FieldClass::Empty;
    }
    const auto& ref = refs.back();
    const auto* meta = find_field(fields, ref.fid);
    if (is_measure_ref(ref, meta, aggregated)) {
        return FieldClass::Measure;
    }
    if (meta == nullptr) {
        return FieldClass::Empty;
    }
    if (meta->semantic_type == SemanticType::Temporal || meta->semantic_type == SemanticType::Ordinal) {
        return FieldClass::OrderedDimension;
    }
    return FieldClass::NominalDimension;
}

auto mark_for_dimension(FieldClass c) -> std::optional<MarkType> {
    if (c == FieldClass::OrderedDimension) {
        return MarkType::Line;
    }
    if (c == FieldClass::NominalDimension) {
        return MarkType::Bar;
    }
    return std::nullopt;
}

auto measure_and_dim_counts(const GraphicSpec& spec, const std::vector<FieldMeta>& fields)
    -> std::pair<std::size_t, std::size_t> {
    std::size_t measures = 0;
    std::size_t dims = 0;
    for (auto channel : {Channel::X, Channel::Y}) {
        for (const auto& ref : spec.channel(channel)) {
            const auto* meta = find_field(fields, ref.fid);
            if (is_measure_ref(ref, meta, spec.aggregated)) {
                ++measures;
            } else if (meta != nullptr) {
                ++dims;
            }
        }
    }
    return {measures, dims};
}

}  // namespace

auto default_mark(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> MarkType {
    if (spec.mark != MarkType::Auto) {
        return spec.mark;
    }
    auto all = resolve_fields(spec, fields);
    auto x = classify(spec.channel(Channel::X), all, spec.aggregated);
    auto y = classify(spec.channel(Channel::Y), all, spec.aggregated);
    auto [measures, dims] = measure_and_dim_counts(spec, all);

    if (x == FieldClass::Measure && y == FieldClass::Measure) {
        return MarkType::Point;
    }
    if (measures > 0) {
        if (auto m = mark_for_dimension(x)) {
            return *m;
        }
        if (auto m = mark_for_dimension(y)) {
            return *m;
        }
        return MarkType::Tick;
    }
    if (dims > 0) {
        return MarkType::Table;
    }
    // Nothing on either axis yet: an empty bar chart.
    return MarkType::Bar;
}

namespace {

class Validator {
public:
    Validator(const GraphicSpec& spec, const std::vector<FieldMeta>& fields)
        : spec_(spec), fields_(fields), all_(resolve_fields(spec, fields)) {}

    auto run() -> std::vector<Violation> {
        check_computed();
        mark_ = default_mark(spec_, fields_);
        for (auto channel : kChannels) {
            const auto& refs = spec_.channel(channel);
            for (std::size_t i = 0; i < refs.size(); ++i) {
                check_ref(refs[i], path_of(channel, i));
            }
        }
        if (!spec_.channel(Channel::Shape).empty() && mark_ != MarkType::Point && mark_ != MarkType::Circle) {
            add("ShapeRequiresPointMark", "channels.shape", "the shape channel applies only to point and circle marks");
        }
        if (mark_ == MarkType::Table) {
            check_table();
        } else {
            check_axis_order(Channel::X);
            check_axis_order(Channel::Y);
        }
        check_filters();
        check_sort();
        return std::move(out_);
    }

private:
    static auto path_of(Channel channel, std::size_t i) -> std::string {
        return "channels." + std::string(to_string(channel)) + "[" + std::to_string(i) + "]";
    }

    void add(std::string code, std::string path, std::string message) {
        out_.push_back(Violation{std::move(code), std::move(path), std::move(message)});
    }

    void check_computed() {
        std::set<std::string> outs;
        for (std::size_t i = 0; i < spec_.computed.size(); ++i) {
            const auto& c = spec_.computed[i];
            auto path = "computed[" + std::to_string(i) + "]";
            if (find_field(fields_, c.out_fid) != nullptr || !outs.insert(c.out_fid).second) {
                add("DuplicateField", path + ".out_fid", "computed field '" + c.out_fid + "' is already defined");
            }
            const auto* source = find_field(fields_, c.source_fid);
            if (source == nullptr) {
                add("UnresolvedField", path + ".source_fid", "unknown field '" + c.source_fid + "'");
            } else if (source->semantic_type != SemanticType::Quantitative) {
                add("NonQuantitativeSource", path + ".source_fid",
                    "transform source '" + c.source_fid + "' is not quantitative");
            }
        }
    }

    // Returns the resolved field, or nullptr after recording a violation.
    auto check_ref(const FieldRef& ref, const std::string& path) -> const FieldMeta* {
        const auto* meta = find_field(all_, ref.fid);
        if (meta == nullptr) {
            add("UnresolvedField", path, "unknown field '" + ref.fid + "'");
            return nullptr;
        }
        if (ref.aggregation != Aggregation::None && ref.aggregation != Aggregation::Count &&
            meta->semantic_type != SemanticType::Quantitative) {
            add("IllegalAggregation", path,
                std::string(to_string(ref.aggregation)) + " requires a quantitative field, '" + ref.fid + "' is " +
                    std::string(to_string(meta->semantic_type)));
        }
        if (spec_.aggregated && meta->analytic_type == AnalyticType::Measure && ref.aggregation == Aggregation::None) {
            add("MissingAggregation", path, "measure '" + ref.fid + "' needs an aggregation in an aggregated chart");
        }
        return meta;
    }

    void check_table() {
        if (!spec_.aggregated) {
            add("TableRequiresAggregation", "aggregated", "a table mark shows aggregated values only");
        }
        for (auto channel : {Channel::X, Channel::Y}) {
            const auto& refs = spec_.channel(channel);
            for (std::size_t i = 0; i < refs.size(); ++i) {
                const auto* meta = find_field(all_, refs[i].fid);
                if (meta != nullptr && is_measure_ref(refs[i], meta, spec_.aggregated)) {
                    add("TableMeasureOnAxis", path_of(channel, i),
                        "table axes hold dimensions; put measures in config.style.table_values");
                }
            }
        }
        auto values = spec_.table_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto path = "config.style.table_values[" + std::to_string(i) + "]";
            const auto* meta = check_ref(values[i], path);
            if (meta != nullptr && values[i].aggregation == Aggregation::None &&
                meta->analytic_type != AnalyticType::Measure) {
                add("MissingAggregation", path, "table values need an aggregation");
            }
        }
    }

    void check_axis_order(Channel channel) {
        const auto& refs = spec_.channel(channel);
        bool seen_measure = false;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const auto* meta = find_field(all_, refs[i].fid);
            if (meta == nullptr) {
                continue;
            }
            bool measure = is_measure_ref(refs[i], meta, spec_.aggregated);
            if (!measure && seen_measure) {
                add("MeasureBeforeDimension", path_of(channel, i),
                    "dimensions must precede measures on an axis");
            }
            seen_measure = seen_measure || measure;
        }
    }

    void check_filters() {
        for (std::size_t i = 0; i < spec_.filters.size(); ++i) {
            const auto& filter = spec_.filters[i];
            auto path = "filters[" + std::to_string(i) + "]";
            const auto* meta = find_field(fields_, filter.fid);
            if (meta == nullptr) {
                if (find_field(all_, filter.fid) != nullptr) {
                    add("FilterOnComputedField", path, "filters apply before transforms; '" + filter.fid +
                                                           "' is computed");
                } else {
                    add("UnresolvedField", path, "unknown field '" + filter.fid + "'");
                }
                continue;
            }
            auto type = meta->semantic_type;
            if (std::holds_alternative<Range>(filter.rule)) {
                if (type == SemanticType::Nominal) {
                    add("FilterTypeMismatch", path, "range filter on nominal field '" + filter.fid + "'");
                }
                continue;
            }
            for (const auto& value : std::get<OneOf>(filter.rule).values) {
                bool ok = true;
                if (const auto* s = std::get_if<std::string>(&value)) {
                    ok = type == SemanticType::Nominal ||
                         (type == SemanticType::Temporal && parse_iso_datetime(*s).has_value());
                } else if (const auto* d = std::get_if<double>(&value)) {
                    ok = type != SemanticType::Nominal &&
                         (type != SemanticType::Temporal || (std::floor(*d) == *d && std::fabs(*d) <= 9.0e15));
                }
                if (!ok) {
                    add("FilterTypeMismatch", path + ".one_of",
                        "value " + scalar_to_json(value).dump() + " does not match field '" + filter.fid + "'");
                    break;
                }
            }
        }
    }

    void check_sort() {
        if (!spec_.sort) {
            return;
        }
        const auto& fid = spec_.sort->fid;
        if (find_field(all_, fid) == nullptr) {
            add("UnresolvedField", "sort.fid", "unknown field '" + fid + "'");
            return;
        }
        auto consider = [&](const std::vector<FieldRef>& refs) {
            return std::any_of(refs.begin(), refs.end(), [&](const FieldRef& r) { return r.fid == fid; });
        };
        bool in_view = false;
        if (mark_ == MarkType::Table) {
            in_view = consider(spec_.channel(Channel::X)) || consider(spec_.channel(Channel::Y)) ||
                      consider(spec_.table_values());
        } else {
            for (auto channel : kChannels) {
                in_view = in_view || consider(spec_.channel(channel));
            }
        }
        if (!in_view) {
            add("SortFieldNotInView", "sort.fid", "sort field '" + fid + "' is not part of the chart");
        }
    }

    const GraphicSpec& spec_;
    const std::vector<FieldMeta>& fields_;
    std::vector<FieldMeta> all_;
    MarkType mark_ = MarkType::Auto;
    std::vector<Violation> out_;
};

}  // namespace

auto validate_against(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> std::vector<Violation> {
    return Validator(spec, fields).run();
}

}  // namespace walk
