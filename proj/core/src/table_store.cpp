#include "ingest.hpp"

#include <walk/error.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <mutex>
#include <unordered_set>

namespace walk {

// ---------------------------------------------------------------- Column

Column::Column(std::string name, Storage values, std::vector<std::uint8_t> null_mask)
    : name_(std::move(name)), values_(std::move(values)), null_mask_(std::move(null_mask)) {
    std::size_t n = std::visit([](const auto& v) { return v.size(); }, values_);
    if (n != null_mask_.size()) {
        throw Error(ErrorCode::SchemaViolation, "null mask length differs from value count", name_);
    }
}

auto Column::from_scalars(std::string name, StorageKind kind, std::span<const Scalar> values) -> Column {
    std::vector<std::uint8_t> mask(values.size(), 0);
    auto fill = [&]<typename T>(std::vector<T>& out) {
        out.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (walk::is_null(values[i])) {
                mask[i] = 1;
                continue;
            }
            if constexpr (std::is_same_v<T, std::int64_t>) {
                const auto* ts = std::get_if<Timestamp>(&values[i]);
                if (ts == nullptr) {
                    throw Error(ErrorCode::TypeMismatch, "expected timestamp value", name);
                }
                out[i] = ts->millis;
            } else {
                const auto* v = std::get_if<T>(&values[i]);
                if (v == nullptr) {
                    throw Error(ErrorCode::TypeMismatch, "value does not match column storage", name);
                }
                out[i] = *v;
            }
        }
    };
    switch (kind) {
        case StorageKind::Float64: {
            std::vector<double> v;
            fill(v);
            return Column(std::move(name), std::move(v), std::move(mask));
        }
        case StorageKind::Utf8: {
            std::vector<std::string> v;
            fill(v);
            return Column(std::move(name), std::move(v), std::move(mask));
        }
        case StorageKind::Timestamp: {
            std::vector<std::int64_t> v;
            fill(v);
            return Column(std::move(name), std::move(v), std::move(mask));
        }
    }
    throw Error(ErrorCode::TypeMismatch, "unknown storage kind", name);
}

auto Column::kind() const noexcept -> StorageKind {
    switch (values_.index()) {
        case 0:
            return StorageKind::Float64;
        case 1:
            return StorageKind::Utf8;
        default:
            return StorageKind::Timestamp;
    }
}

auto Column::null_count() const -> std::size_t {
    return static_cast<std::size_t>(std::count(null_mask_.begin(), null_mask_.end(), std::uint8_t{1}));
}

auto Column::doubles() const -> std::span<const double> {
    return std::get<std::vector<double>>(values_);
}

auto Column::strings() const -> std::span<const std::string> {
    return std::get<std::vector<std::string>>(values_);
}

auto Column::millis() const -> std::span<const std::int64_t> {
    return std::get<std::vector<std::int64_t>>(values_);
}

auto Column::at(std::size_t row) const -> Scalar {
    if (is_null(row)) {
        return std::monostate{};
    }
    switch (values_.index()) {
        case 0:
            return std::get<0>(values_)[row];
        case 1:
            return std::get<1>(values_)[row];
        default:
            return Timestamp{std::get<2>(values_)[row]};
    }
}

auto Column::gather(std::span<const std::uint32_t> rows) const -> Column {
    std::vector<std::uint8_t> mask;
    mask.reserve(rows.size());
    for (auto r : rows) {
        mask.push_back(null_mask_[r]);
    }
    Storage out = std::visit(
        [&](const auto& src) -> Storage {
            std::remove_cvref_t<decltype(src)> dst;
            dst.reserve(rows.size());
            for (auto r : rows) {
                dst.push_back(src[r]);
            }
            return dst;
        },
        values_);
    return Column(name_, std::move(out), std::move(mask));
}

auto Column::renamed(std::string name) const -> Column {
    Column copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(std::string id, std::string name, std::vector<Column> columns)
    : id_(std::move(id)), name_(std::move(name)), columns_(std::move(columns)) {
    row_count_ = columns_.empty() ? 0 : columns_.front().size();
    std::vector<std::string> names;
    names.reserve(columns_.size());
    std::unordered_set<std::string> seen;
    for (const auto& column : columns_) {
        if (column.size() != row_count_) {
            throw Error(ErrorCode::SchemaViolation, "column length differs from row count", column.name());
        }
        if (!seen.insert(column.name()).second) {
            throw Error(ErrorCode::SchemaViolation, "duplicate column name", column.name());
        }
        names.push_back(column.name());
    }
    fids_ = sanitize_fids(names);
    for (std::size_t i = 0; i < fids_.size(); ++i) {
        by_fid_.emplace(fids_[i], i);
    }
}

auto Dataset::find(std::string_view fid) const -> const Column* {
    auto it = by_fid_.find(std::string(fid));
    return it == by_fid_.end() ? nullptr : &columns_[it->second];
}

auto Dataset::rebrand(std::string id, std::string name) && -> Dataset {
    return Dataset(std::move(id), std::move(name), std::move(columns_));
}

auto sanitize_fids(std::span<const std::string> names) -> std::vector<std::string> {
    std::vector<std::string> out;
    out.reserve(names.size());
    std::unordered_set<std::string> used;
    for (const auto& name : names) {
        std::string base;
        base.reserve(name.size());
        for (unsigned char c : name) {
            base.push_back(std::isalnum(c) != 0 && c < 0x80 ? static_cast<char>(std::tolower(c)) : '_');
        }
        if (base.empty()) {
            base = "field";
        }
        std::string candidate = base;
        for (int suffix = 2; used.contains(candidate); ++suffix) {
            candidate = base + "_" + std::to_string(suffix);
        }
        used.insert(candidate);
        out.push_back(std::move(candidate));
    }
    return out;
}

// ---------------------------------------------------------------- ingestion helpers

namespace detail {

auto infer_storage(const TextColumn& cells) -> StorageKind {
    bool any = false;
    bool numeric = true;
    bool temporal = true;
    for (const auto& cell : cells) {
        if (!cell) {
            continue;
        }
        any = true;
        if (numeric && !parse_number(*cell)) {
            numeric = false;
        }
        if (!numeric && temporal && !parse_iso_datetime(*cell)) {
            temporal = false;
        }
        if (!numeric && !temporal) {
            return StorageKind::Utf8;
        }
    }
    if (!any) {
        return StorageKind::Utf8;
    }
    return numeric ? StorageKind::Float64 : StorageKind::Timestamp;
}

auto build_dataset(TextTable table, std::string id, std::string name) -> Dataset {
    std::vector<Column> columns;
    columns.reserve(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        auto& cells = table.columns[c];
        std::vector<std::uint8_t> mask(cells.size(), 0);
        for (std::size_t r = 0; r < cells.size(); ++r) {
            mask[r] = cells[r].has_value() ? 0 : 1;
        }
        switch (infer_storage(cells)) {
            case StorageKind::Float64: {
                std::vector<double> values(cells.size(), 0.0);
                for (std::size_t r = 0; r < cells.size(); ++r) {
                    if (cells[r]) {
                        values[r] = *parse_number(*cells[r]);
                    }
                }
                columns.emplace_back(table.names[c], std::move(values), std::move(mask));
                break;
            }
            case StorageKind::Timestamp: {
                std::vector<std::int64_t> values(cells.size(), 0);
                for (std::size_t r = 0; r < cells.size(); ++r) {
                    if (cells[r]) {
                        values[r] = parse_iso_datetime(*cells[r])->millis;
                    }
                }
                columns.emplace_back(table.names[c], std::move(values), std::move(mask));
                break;
            }
            case StorageKind::Utf8: {
                std::vector<std::string> values(cells.size());
                for (std::size_t r = 0; r < cells.size(); ++r) {
                    if (cells[r]) {
                        values[r] = std::move(*cells[r]);
                    }
                }
                columns.emplace_back(table.names[c], std::move(values), std::move(mask));
                break;
            }
        }
    }
    return Dataset(std::move(id), std::move(name), std::move(columns));
}

auto find_invalid_utf8(std::string_view bytes) -> std::optional<std::size_t> {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        }
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > n) {
            return i;
        }
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return i;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates and out-of-range code points.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
            (cp >= 0xD800 && cp <= 0xDFFF)) {
            return i;
        }
        i += len;
    }
    return std::nullopt;
}

auto uniquify_names(std::vector<std::string> names) -> std::vector<std::string> {
    std::unordered_set<std::string> used;
    for (auto& name : names) {
        std::string candidate = name;
        for (int suffix = 2; used.contains(candidate); ++suffix) {
            candidate = name + " (" + std::to_string(suffix) + ")";
        }
        used.insert(candidate);
        name = std::move(candidate);
    }
    return names;
}

}  // namespace detail

auto load_json_rows(const nlohmann::json& rows, std::string id, std::string name) -> Dataset {
    if (!rows.is_array()) {
        throw Error(ErrorCode::NestedValue, "expected an array of row objects");
    }
    detail::TextTable table;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (!row.is_object()) {
            throw Error(ErrorCode::NestedValue, "row is not an object", "[" + std::to_string(r) + "]");
        }
        for (const auto& [key, value] : row.items()) {
            auto [it, inserted] = index.emplace(key, table.names.size());
            if (inserted) {
                table.names.push_back(key);
                table.columns.emplace_back(r, std::nullopt);
            }
            auto& column = table.columns[it->second];
            column.resize(r + 1);
            std::optional<std::string> text;
            switch (value.type()) {
                case nlohmann::json::value_t::null:
                    break;
                case nlohmann::json::value_t::string:
                    text = value.get<std::string>();
                    break;
                case nlohmann::json::value_t::boolean:
                    text = value.get<bool>() ? "true" : "false";
                    break;
                case nlohmann::json::value_t::number_integer:
                case nlohmann::json::value_t::number_unsigned:
                case nlohmann::json::value_t::number_float:
                    text = format_number(value.get<double>());
                    break;
                default:
                    throw Error(ErrorCode::NestedValue, "value is not a scalar",
                                "[" + std::to_string(r) + "]." + key);
            }
            column[r] = std::move(text);
        }
        for (auto& column : table.columns) {
            column.resize(r + 1);
        }
    }
    if (table.names.empty()) {
        throw Error(ErrorCode::EmptyInput, "rows define zero columns");
    }
    return detail::build_dataset(std::move(table), std::move(id), std::move(name));
}

// ---------------------------------------------------------------- inference

auto to_string(SemanticType type) -> std::string_view {
    switch (type) {
        case SemanticType::Nominal:
            return "nominal";
        case SemanticType::Ordinal:
            return "ordinal";
        case SemanticType::Quantitative:
            return "quantitative";
        case SemanticType::Temporal:
            return "temporal";
    }
    return "nominal";
}

auto to_string(AnalyticType type) -> std::string_view {
    return type == AnalyticType::Measure ? "measure" : "dimension";
}

auto parse_semantic_type(std::string_view text) -> std::optional<SemanticType> {
    for (auto t : {SemanticType::Nominal, SemanticType::Ordinal, SemanticType::Quantitative, SemanticType::Temporal}) {
        if (to_string(t) == text) {
            return t;
        }
    }
    return std::nullopt;
}

auto parse_analytic_type(std::string_view text) -> std::optional<AnalyticType> {
    if (text == "dimension") {
        return AnalyticType::Dimension;
    }
    if (text == "measure") {
        return AnalyticType::Measure;
    }
    return std::nullopt;
}

namespace {

auto infer_one(const Column& column, std::string fid) -> FieldMeta {
    FieldMeta meta;
    meta.fid = std::move(fid);
    meta.name = column.name();
    switch (column.kind()) {
        case StorageKind::Utf8: {
            std::unordered_set<std::string_view> distinct;
            auto values = column.strings();
            for (std::size_t r = 0; r < column.size(); ++r) {
                if (!column.is_null(r)) {
                    distinct.insert(values[r]);
                }
            }
            meta.semantic_type = SemanticType::Nominal;
            meta.analytic_type = AnalyticType::Dimension;
            meta.distinct_count = distinct.size();
            break;
        }
        case StorageKind::Timestamp: {
            std::unordered_set<std::int64_t> distinct;
            auto values = column.millis();
            for (std::size_t r = 0; r < column.size(); ++r) {
                if (column.is_null(r)) {
                    continue;
                }
                distinct.insert(values[r]);
                auto v = static_cast<double>(values[r]);
                meta.min = meta.min ? std::min(*meta.min, v) : v;
                meta.max = meta.max ? std::max(*meta.max, v) : v;
            }
            meta.semantic_type = SemanticType::Temporal;
            meta.analytic_type = AnalyticType::Dimension;
            meta.distinct_count = distinct.size();
            break;
        }
        case StorageKind::Float64: {
            std::unordered_set<std::uint64_t> distinct;
            bool integral = true;
            std::optional<double> lo;
            std::optional<double> hi;
            auto values = column.doubles();
            for (std::size_t r = 0; r < column.size(); ++r) {
                if (column.is_null(r)) {
                    continue;
                }
                double v = values[r];
                distinct.insert(std::bit_cast<std::uint64_t>(v));
                integral = integral && std::floor(v) == v;
                lo = lo ? std::min(*lo, v) : v;
                hi = hi ? std::max(*hi, v) : v;
            }
            meta.distinct_count = distinct.size();
            if (integral && distinct.size() <= kOrdinalDistinctLimit) {
                meta.semantic_type = SemanticType::Ordinal;
                meta.analytic_type = AnalyticType::Dimension;
            } else {
                meta.semantic_type = SemanticType::Quantitative;
                meta.analytic_type = AnalyticType::Measure;
                meta.min = lo;
                meta.max = hi;
            }
            break;
        }
    }
    return meta;
}

}  // namespace

auto infer_fields(const Dataset& dataset) -> std::vector<FieldMeta> {
    std::vector<FieldMeta> out;
    out.reserve(dataset.columns().size());
    for (std::size_t i = 0; i < dataset.columns().size(); ++i) {
        out.push_back(infer_one(dataset.columns()[i], dataset.fids()[i]));
    }
    return out;
}

void to_json(nlohmann::json& out, const FieldMeta& meta) {
    out = nlohmann::json{{"fid", meta.fid},
                         {"name", meta.name},
                         {"semantic_type", to_string(meta.semantic_type)},
                         {"analytic_type", to_string(meta.analytic_type)},
                         {"distinct_count", meta.distinct_count}};
    if (meta.min) {
        out["min"] = *meta.min;
    }
    if (meta.max) {
        out["max"] = *meta.max;
    }
}

void from_json(const nlohmann::json& in, FieldMeta& meta) {
    meta.fid = in.at("fid").get<std::string>();
    meta.name = in.value("name", meta.fid);
    auto semantic = parse_semantic_type(in.at("semantic_type").get<std::string>());
    auto analytic = parse_analytic_type(in.at("analytic_type").get<std::string>());
    if (!semantic || !analytic) {
        throw Error(ErrorCode::SchemaViolation, "unknown field type", meta.fid);
    }
    meta.semantic_type = *semantic;
    meta.analytic_type = *analytic;
    meta.distinct_count = in.value("distinct_count", std::size_t{0});
    meta.min = in.contains("min") ? std::optional<double>(in["min"].get<double>()) : std::nullopt;
    meta.max = in.contains("max") ? std::optional<double>(in["max"].get<double>()) : std::nullopt;
}

// ---------------------------------------------------------------- registry

auto DatasetRegistry::add(Dataset dataset, std::string name) -> Entry {
    std::string id;
    {
        std::unique_lock lock(mutex_);
        id = "ds_" + std::to_string(next_id_++);
    }
    auto stored = std::make_shared<const Dataset>(std::move(dataset).rebrand(id, std::move(name)));
    Entry entry{stored, infer_fields(*stored)};
    std::unique_lock lock(mutex_);
    entries_.emplace(id, entry);
    return entry;
}

auto DatasetRegistry::find(const std::string& id) const -> std::optional<Entry> {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

auto DatasetRegistry::list() const -> std::vector<Entry> {
    std::shared_lock lock(mutex_);
    std::vector<Entry> out;
    out.reserve(entries_.size());
    for (const auto& [id, entry] : entries_) {
        out.push_back(entry);
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
        auto na = std::stoull(a.dataset->id().substr(3));
        auto nb = std::stoull(b.dataset->id().substr(3));
        return na < nb;
    });
    return out;
}

}  // namespace walk
