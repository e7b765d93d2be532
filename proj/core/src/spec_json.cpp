// JSON codec for the chart spec document (version 1).
//
// Serialization is canonical: keys are emitted in schema order, empty
// channels are omitted, and the output is compact. parse_spec accepts exactly
// what serialize_spec produces plus omitted optional members.

#include <walk/error.hpp>
#include <walk/spec_model.hpp>

#include <cmath>
#include <limits>
#include <set>

namespace walk {

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& reason) {
    throw Error(ErrorCode::SchemaViolation, reason, path);
}

auto join(const std::string& base, std::string_view key) -> std::string {
    if (base.empty()) {
        return std::string(key);
    }
    return base + "." + std::string(key);
}

auto index_path(const std::string& base, std::size_t i) -> std::string {
    return base + "[" + std::to_string(i) + "]";
}

void expect_object(const OrderedJson& in, const std::string& path) {
    if (!in.is_object()) {
        violation(path, "expected an object");
    }
}

void reject_unknown(const OrderedJson& in, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& [key, _] : in.items()) {
        bool found = false;
        for (auto k : known) {
            found = found || k == key;
        }
        if (!found) {
            violation(join(path, key), "unknown key");
        }
    }
}

auto get_string(const OrderedJson& in, std::string_view key, const std::string& path) -> std::string {
    auto it = in.find(std::string(key));
    if (it == in.end()) {
        violation(join(path, key), "missing required key");
    }
    if (!it->is_string()) {
        violation(join(path, key), "expected a string");
    }
    return it->get<std::string>();
}

auto get_number(const OrderedJson& value, const std::string& path) -> double {
    if (!value.is_number()) {
        violation(path, "expected a number");
    }
    return value.get<double>();
}

auto get_positive_int(const OrderedJson& value, const std::string& path) -> int {
    if (!value.is_number_integer() || value.get<long long>() <= 0 ||
        value.get<long long>() > std::numeric_limits<int>::max()) {
        violation(path, "expected a positive integer");
    }
    return value.get<int>();
}

template <typename Enum, typename Parse>
auto get_enum(const OrderedJson& in, std::string_view key, const std::string& path, Parse parse) -> Enum {
    auto text = get_string(in, key, path);
    auto parsed = parse(text);
    if (!parsed) {
        violation(join(path, key), "unknown value '" + text + "'");
    }
    return *parsed;
}

auto parse_scalar(const OrderedJson& value, const std::string& path) -> Scalar {
    if (value.is_null()) {
        return std::monostate{};
    }
    if (value.is_number()) {
        return value.get<double>();
    }
    if (value.is_string()) {
        return value.get<std::string>();
    }
    violation(path, "expected a scalar (null, number or string)");
}

auto parse_stack(std::string_view text) -> std::optional<StackMode> {
    for (auto s : {StackMode::Stack, StackMode::Normalize, StackMode::None}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

auto parse_direction(std::string_view text) -> std::optional<SortDirection> {
    for (auto d : {SortDirection::Asc, SortDirection::Desc}) {
        if (to_string(d) == text) {
            return d;
        }
    }
    return std::nullopt;
}

auto parse_coord(std::string_view text) -> std::optional<CoordSystem> {
    for (auto c : {CoordSystem::Generic, CoordSystem::Geographic}) {
        if (to_string(c) == text) {
            return c;
        }
    }
    return std::nullopt;
}

auto parse_field_list(const OrderedJson& in, const std::string& path) -> std::vector<FieldRef> {
    if (!in.is_array()) {
        violation(path, "expected an array");
    }
    std::vector<FieldRef> out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out.push_back(field_ref_from_json(in[i], index_path(path, i)));
    }
    return out;
}

auto parse_config(const OrderedJson& in, const std::string& path) -> SpecConfig {
    expect_object(in, path);
    reject_unknown(in, path, {"coord", "layout", "palette", "style"});
    SpecConfig config;
    if (in.contains("coord")) {
        config.coord = get_enum<CoordSystem>(in, "coord", path, parse_coord);
    }
    if (auto it = in.find("layout"); it != in.end()) {
        auto layout_path = join(path, "layout");
        if (it->is_string()) {
            if (it->get<std::string>() != "auto") {
                violation(layout_path, "expected \"auto\" or {width, height}");
            }
        } else if (it->is_object()) {
            reject_unknown(*it, layout_path, {"width", "height"});
            if (!it->contains("width") || !it->contains("height")) {
                violation(layout_path, "fixed layout needs width and height");
            }
            config.layout = FixedLayout{get_positive_int(it->at("width"), join(layout_path, "width")),
                                        get_positive_int(it->at("height"), join(layout_path, "height"))};
        } else {
            violation(layout_path, "expected \"auto\" or {width, height}");
        }
    }
    if (in.contains("palette")) {
        config.palette = get_string(in, "palette", path);
    }
    if (auto it = in.find("style"); it != in.end()) {
        auto style_path = join(path, "style");
        expect_object(*it, style_path);
        config.style = *it;
        if (auto tv = it->find(std::string(kTableValuesKey)); tv != it->end()) {
            parse_field_list(*tv, join(style_path, kTableValuesKey));
        }
    }
    return config;
}

}  // namespace

auto scalar_to_json(const Scalar& value) -> OrderedJson {
    switch (value.index()) {
        case 1:
            return std::get<double>(value);
        case 2:
            return std::get<std::string>(value);
        case 3:
            return format_iso_datetime(std::get<Timestamp>(value));
        default:
            return nullptr;
    }
}

auto field_ref_to_json(const FieldRef& ref) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["fid"] = ref.fid;
    if (ref.aggregation != Aggregation::None) {
        out["aggregation"] = to_string(ref.aggregation);
    }
    return out;
}

auto field_ref_from_json(const OrderedJson& in, const std::string& path) -> FieldRef {
    expect_object(in, path);
    reject_unknown(in, path, {"fid", "aggregation"});
    FieldRef ref;
    ref.fid = get_string(in, "fid", path);
    if (ref.fid.empty()) {
        violation(join(path, "fid"), "empty field id");
    }
    if (in.contains("aggregation")) {
        ref.aggregation = get_enum<Aggregation>(in, "aggregation", path, parse_aggregation);
    }
    return ref;
}

auto computed_to_json(const ComputedField& field) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["out_fid"] = field.out_fid;
    out["source_fid"] = field.source_fid;
    out["kind"] = to_string(field.transform.op);
    if (field.transform.op == Transform::Op::Bin) {
        out["bins"] = field.transform.bins;
    }
    return out;
}

auto computed_from_json(const OrderedJson& in, const std::string& path) -> ComputedField {
    expect_object(in, path);
    reject_unknown(in, path, {"out_fid", "source_fid", "kind", "bins"});
    ComputedField field;
    field.out_fid = get_string(in, "out_fid", path);
    field.source_fid = get_string(in, "source_fid", path);
    if (field.out_fid.empty() || field.source_fid.empty()) {
        violation(path, "empty field id");
    }
    auto kind = get_string(in, "kind", path);
    if (kind == "log2") {
        field.transform.op = Transform::Op::Log2;
    } else if (kind == "log10") {
        field.transform.op = Transform::Op::Log10;
    } else if (kind == "bin") {
        field.transform.op = Transform::Op::Bin;
        if (!in.contains("bins")) {
            violation(join(path, "bins"), "bin needs a bin count");
        }
        field.transform.bins = get_positive_int(in.at("bins"), join(path, "bins"));
        return field;
    } else {
        violation(join(path, "kind"), "unknown transform '" + kind + "'");
    }
    if (in.contains("bins")) {
        violation(join(path, "bins"), "bins only applies to bin");
    }
    return field;
}

auto filter_to_json(const Filter& filter) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["fid"] = filter.fid;
    if (const auto* one_of = std::get_if<OneOf>(&filter.rule)) {
        OrderedJson values = OrderedJson::array();
        for (const auto& v : one_of->values) {
            values.push_back(scalar_to_json(v));
        }
        out["one_of"] = std::move(values);
    } else {
        const auto& range = std::get<Range>(filter.rule);
        out["range"] = OrderedJson::array({range.lo, range.hi});
    }
    if (filter.temporal) {
        out["temporal"] = true;
    }
    return out;
}

auto filter_from_json(const OrderedJson& in, const std::string& path, bool allow_temporal_flag) -> Filter {
    expect_object(in, path);
    if (allow_temporal_flag) {
        reject_unknown(in, path, {"fid", "one_of", "range", "temporal"});
    } else {
        reject_unknown(in, path, {"fid", "one_of", "range"});
    }
    Filter filter;
    filter.fid = get_string(in, "fid", path);
    bool has_one_of = in.contains("one_of");
    bool has_range = in.contains("range");
    if (has_one_of == has_range) {
        violation(path, "filter needs exactly one of one_of or range");
    }
    if (has_one_of) {
        const auto& values = in.at("one_of");
        auto values_path = join(path, "one_of");
        if (!values.is_array() || values.empty()) {
            violation(values_path, "expected a non-empty array");
        }
        OneOf rule;
        for (std::size_t i = 0; i < values.size(); ++i) {
            rule.values.push_back(parse_scalar(values[i], index_path(values_path, i)));
        }
        filter.rule = std::move(rule);
    } else {
        const auto& bounds = in.at("range");
        auto range_path = join(path, "range");
        if (!bounds.is_array() || bounds.size() != 2) {
            violation(range_path, "expected [lo, hi]");
        }
        Range range{get_number(bounds[0], index_path(range_path, 0)), get_number(bounds[1], index_path(range_path, 1))};
        if (!(range.lo <= range.hi)) {
            violation(range_path, "lo must not exceed hi");
        }
        filter.rule = range;
    }
    if (auto it = in.find("temporal"); it != in.end()) {
        if (!it->is_boolean()) {
            violation(join(path, "temporal"), "expected a boolean");
        }
        filter.temporal = it->get<bool>();
    }
    return filter;
}

auto spec_to_json(const GraphicSpec& spec) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["version"] = spec.version;
    out["name"] = spec.name;
    out["mark"] = to_string(spec.mark);
    out["aggregated"] = spec.aggregated;
    OrderedJson channels = OrderedJson::object();
    for (auto channel : kChannels) {
        const auto& refs = spec.channel(channel);
        if (refs.empty()) {
            continue;
        }
        OrderedJson list = OrderedJson::array();
        for (const auto& ref : refs) {
            list.push_back(field_ref_to_json(ref));
        }
        channels[std::string(to_string(channel))] = std::move(list);
    }
    out["channels"] = std::move(channels);
    OrderedJson computed = OrderedJson::array();
    for (const auto& field : spec.computed) {
        computed.push_back(computed_to_json(field));
    }
    out["computed"] = std::move(computed);
    OrderedJson filters = OrderedJson::array();
    for (const auto& filter : spec.filters) {
        filters.push_back(filter_to_json(filter));
    }
    out["filters"] = std::move(filters);
    if (spec.sort) {
        OrderedJson sort = OrderedJson::object();
        sort["fid"] = spec.sort->fid;
        sort["direction"] = to_string(spec.sort->direction);
        out["sort"] = std::move(sort);
    }
    out["stack"] = to_string(spec.stack);
    OrderedJson config = OrderedJson::object();
    config["coord"] = to_string(spec.config.coord);
    if (spec.config.layout) {
        OrderedJson layout = OrderedJson::object();
        layout["width"] = spec.config.layout->width;
        layout["height"] = spec.config.layout->height;
        config["layout"] = std::move(layout);
    } else {
        config["layout"] = "auto";
    }
    config["palette"] = spec.config.palette;
    config["style"] = spec.config.style;
    out["config"] = std::move(config);
    return out;
}

auto serialize_spec(const GraphicSpec& spec) -> std::string {
    return spec_to_json(spec).dump();
}

auto parse_spec(std::string_view json_text) -> GraphicSpec {
    OrderedJson document;
    try {
        document = OrderedJson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::JsonSyntax, e.what());
    }
    return parse_spec_json(document);
}

auto parse_spec_json(const OrderedJson& in) -> GraphicSpec {
    expect_object(in, "");
    if (!in.contains("version")) {
        violation("version", "missing required key");
    }
    const auto& version = in.at("version");
    if (!version.is_number_integer()) {
        violation("version", "expected an integer");
    }
    if (version.get<long long>() != 1) {
        throw Error(ErrorCode::UnsupportedVersion, "only version 1 is supported", "version");
    }
    reject_unknown(in, "",
                   {"version", "name", "mark", "aggregated", "channels", "computed", "filters", "sort", "stack",
                    "config"});

    GraphicSpec spec;
    if (in.contains("name")) {
        spec.name = get_string(in, "name", "");
    }
    if (in.contains("mark")) {
        spec.mark = get_enum<MarkType>(in, "mark", "", parse_mark);
    }
    if (auto it = in.find("aggregated"); it != in.end()) {
        if (!it->is_boolean()) {
            violation("aggregated", "expected a boolean");
        }
        spec.aggregated = it->get<bool>();
    }
    if (auto it = in.find("channels"); it != in.end()) {
        expect_object(*it, "channels");
        for (const auto& [key, value] : it->items()) {
            auto channel = parse_channel(key);
            auto path = join("channels", key);
            if (!channel) {
                violation(path, "unknown channel");
            }
            auto refs = parse_field_list(value, path);
            if (*channel != Channel::X && *channel != Channel::Y && refs.size() > 1) {
                violation(path, "channel holds at most one field");
            }
            spec.channel(*channel) = std::move(refs);
        }
    }
    if (auto it = in.find("computed"); it != in.end()) {
        if (!it->is_array()) {
            violation("computed", "expected an array");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            spec.computed.push_back(computed_from_json((*it)[i], index_path("computed", i)));
        }
    }
    if (auto it = in.find("filters"); it != in.end()) {
        if (!it->is_array()) {
            violation("filters", "expected an array");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            spec.filters.push_back(filter_from_json((*it)[i], index_path("filters", i), false));
        }
    }
    if (auto it = in.find("sort"); it != in.end() && !it->is_null()) {
        expect_object(*it, "sort");
        reject_unknown(*it, "sort", {"fid", "direction"});
        SortSpec sort;
        sort.fid = get_string(*it, "fid", "sort");
        if (it->contains("direction")) {
            sort.direction = get_enum<SortDirection>(*it, "direction", "sort", parse_direction);
        }
        spec.sort = std::move(sort);
    }
    if (in.contains("stack")) {
        spec.stack = get_enum<StackMode>(in, "stack", "", parse_stack);
    }
    if (auto it = in.find("config"); it != in.end()) {
        spec.config = parse_config(*it, "config");
    }
    return spec;
}

auto GraphicSpec::table_values() const -> std::vector<FieldRef> {
    auto it = config.style.find(std::string(kTableValuesKey));
    if (it == config.style.end()) {
        return {};
    }
    return parse_field_list(*it, "config.style.table_values");
}

void GraphicSpec::set_table_values(const std::vector<FieldRef>& values) {
    OrderedJson list = OrderedJson::array();
    for (const auto& ref : values) {
        list.push_back(field_ref_to_json(ref));
    }
    config.style[std::string(kTableValuesKey)] = std::move(list);
}

}  // namespace walk
