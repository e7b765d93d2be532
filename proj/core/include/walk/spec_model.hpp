#pragma once

#include <walk/scalar.hpp>
#include <walk/table_store.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace walk {

using OrderedJson = nlohmann::ordered_json;

enum class MarkType : std::uint8_t { Auto, Bar, Line, Area, Point, Circle, Tick, Rect, Arc, Text, Table };

enum class Channel : std::uint8_t { X, Y, Color, Size, Shape, Opacity };
inline constexpr std::array<Channel, 6> kChannels{Channel::X,    Channel::Y,     Channel::Color,
                                                  Channel::Size, Channel::Shape, Channel::Opacity};

enum class Aggregation : std::uint8_t {
    None,
    Sum,
    Mean,
    Count,
    Min,
    Max,
    Median,
    Variance,
    Stddev,
    CountDistinct,
};
inline constexpr std::array<Aggregation, 9> kAggregations{
    Aggregation::Sum,    Aggregation::Mean,     Aggregation::Count,  Aggregation::Min,          Aggregation::Max,
    Aggregation::Median, Aggregation::Variance, Aggregation::Stddev, Aggregation::CountDistinct};

enum class SortDirection : std::uint8_t { Asc, Desc };
enum class StackMode : std::uint8_t { Stack, Normalize, None };
enum class CoordSystem : std::uint8_t { Generic, Geographic };

auto to_string(MarkType mark) -> std::string_view;
auto to_string(Channel channel) -> std::string_view;
auto to_string(Aggregation aggregation) -> std::string_view;
auto to_string(SortDirection direction) -> std::string_view;
auto to_string(StackMode stack) -> std::string_view;
auto to_string(CoordSystem coord) -> std::string_view;
auto parse_mark(std::string_view text) -> std::optional<MarkType>;
auto parse_channel(std::string_view text) -> std::optional<Channel>;
auto parse_aggregation(std::string_view text) -> std::optional<Aggregation>;

struct FieldRef {
    std::string fid;
    Aggregation aggregation = Aggregation::None;

    auto operator==(const FieldRef&) const -> bool = default;
};

struct Transform {
    enum class Op : std::uint8_t { Log2, Log10, Bin };
    Op op = Op::Log2;
    int bins = 0;  // only for Op::Bin; positive

    auto operator==(const Transform&) const -> bool = default;
};

auto to_string(Transform::Op op) -> std::string_view;

struct ComputedField {
    std::string out_fid;
    std::string source_fid;
    Transform transform;

    auto operator==(const ComputedField&) const -> bool = default;
};

struct OneOf {
    std::vector<Scalar> values;  // null, number or string; non-empty

    auto operator==(const OneOf&) const -> bool = default;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;  // inclusive at both ends

    auto operator==(const Range&) const -> bool = default;
};

struct Filter {
    std::string fid;
    std::variant<OneOf, Range> rule;
    // Set during derivation when the field is temporal; filter values are then
    // ISO strings or epoch milliseconds. Never part of a chart spec document.
    bool temporal = false;

    auto operator==(const Filter&) const -> bool = default;
};

struct SortSpec {
    std::string fid;
    SortDirection direction = SortDirection::Asc;

    auto operator==(const SortSpec&) const -> bool = default;
};

struct FixedLayout {
    int width = 0;
    int height = 0;

    auto operator==(const FixedLayout&) const -> bool = default;
};

struct SpecConfig {
    CoordSystem coord = CoordSystem::Generic;
    std::optional<FixedLayout> layout;  // nullopt is "auto"
    std::string palette = "default";
    // Free-form style map, preserved verbatim. The key "table_values" holds
    // the measure list of a table mark.
    OrderedJson style = OrderedJson::object();

    auto operator==(const SpecConfig&) const -> bool = default;
};

inline constexpr std::string_view kTableValuesKey = "table_values";

/// The declarative chart document: what the user put on which shelf.
struct GraphicSpec {
    int version = 1;
    std::string name = "Chart 1";
    MarkType mark = MarkType::Auto;
    bool aggregated = true;
    std::array<std::vector<FieldRef>, kChannels.size()> channels{};
    std::vector<ComputedField> computed;
    std::vector<Filter> filters;
    std::optional<SortSpec> sort;
    StackMode stack = StackMode::Stack;
    SpecConfig config;

    [[nodiscard]] auto channel(Channel c) const -> const std::vector<FieldRef>& {
        return channels[static_cast<std::size_t>(c)];
    }
    auto channel(Channel c) -> std::vector<FieldRef>& { return channels[static_cast<std::size_t>(c)]; }

    // Measures of a table mark, read from config.style["table_values"].
    [[nodiscard]] auto table_values() const -> std::vector<FieldRef>;
    void set_table_values(const std::vector<FieldRef>& values);

    auto operator==(const GraphicSpec&) const -> bool = default;
};

auto parse_spec(std::string_view json_text) -> GraphicSpec;
auto parse_spec_json(const OrderedJson& document) -> GraphicSpec;
auto serialize_spec(const GraphicSpec& spec) -> std::string;
auto spec_to_json(const GraphicSpec& spec) -> OrderedJson;

// Shared JSON codecs (also used by the workflow document).
auto filter_to_json(const Filter& filter) -> OrderedJson;
auto filter_from_json(const OrderedJson& in, const std::string& path, bool allow_temporal_flag) -> Filter;
auto computed_to_json(const ComputedField& field) -> OrderedJson;
auto computed_from_json(const OrderedJson& in, const std::string& path) -> ComputedField;
auto field_ref_to_json(const FieldRef& ref) -> OrderedJson;
auto field_ref_from_json(const OrderedJson& in, const std::string& path) -> FieldRef;
auto scalar_to_json(const Scalar& value) -> OrderedJson;

// ---------------------------------------------------------------- validation

struct Violation {
    std::string code;  // e.g. "UnresolvedField"
    std::string path;  // e.g. "channels.y[1]"
    std::string message;

    auto operator==(const Violation&) const -> bool = default;
};

void to_json(nlohmann::json& out, const Violation& violation);

/// Dataset fields plus the fields produced by the spec's computed list
/// (log → quantitative measure, bin → ordinal dimension). Computed entries
/// whose source does not resolve are skipped.
auto resolve_fields(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> std::vector<FieldMeta>;

auto validate_against(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> std::vector<Violation>;

// Concrete mark for an auto spec (returns spec.mark unchanged otherwise).
auto default_mark(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) -> MarkType;

// In an aggregated spec a channel entry is a measure when it carries an
// aggregation or names a measure field; unaggregated specs ignore the
// aggregation and go by the field alone.
auto is_measure_ref(const FieldRef& ref, const FieldMeta* meta, bool aggregated) -> bool;

auto find_field(const std::vector<FieldMeta>& fields, std::string_view fid) -> const FieldMeta*;

// Output column of a measure entry: fid + "_" + aggregation when aggregated,
// the plain fid otherwise.
auto measure_out_fid(const FieldRef& ref, bool aggregated) -> std::string;

}  // namespace walk
