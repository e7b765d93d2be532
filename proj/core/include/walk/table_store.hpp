#pragma once

#include <walk/scalar.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace walk {

/// One typed column vector plus its null mask. A null cell keeps a default
/// value in the storage vector; readers must consult is_null() first.
class Column {
public:
    using Storage = std::variant<std::vector<double>, std::vector<std::string>, std::vector<std::int64_t>>;

    Column(std::string name, Storage values, std::vector<std::uint8_t> null_mask);

    static auto from_scalars(std::string name, StorageKind kind, std::span<const Scalar> values) -> Column;

    [[nodiscard]] auto name() const noexcept -> const std::string& { return name_; }
    [[nodiscard]] auto kind() const noexcept -> StorageKind;
    [[nodiscard]] auto size() const noexcept -> std::size_t { return null_mask_.size(); }
    [[nodiscard]] auto is_null(std::size_t row) const -> bool { return null_mask_[row] != 0; }
    [[nodiscard]] auto null_count() const -> std::size_t;

    [[nodiscard]] auto doubles() const -> std::span<const double>;
    [[nodiscard]] auto strings() const -> std::span<const std::string>;
    [[nodiscard]] auto millis() const -> std::span<const std::int64_t>;

    [[nodiscard]] auto at(std::size_t row) const -> Scalar;

    // New column holding rows[i] of this one, in order.
    [[nodiscard]] auto gather(std::span<const std::uint32_t> rows) const -> Column;
    [[nodiscard]] auto renamed(std::string name) const -> Column;

    auto operator==(const Column& other) const -> bool = default;

private:
    std::string name_;
    Storage values_;
    std::vector<std::uint8_t> null_mask_;
};

/// Immutable columnar table. Construction validates the shape; afterwards
/// the object is only ever read (share it as std::shared_ptr<const Dataset>).
class Dataset {
public:
    Dataset(std::string id, std::string name, std::vector<Column> columns);

    [[nodiscard]] auto id() const noexcept -> const std::string& { return id_; }
    [[nodiscard]] auto name() const noexcept -> const std::string& { return name_; }
    [[nodiscard]] auto columns() const noexcept -> const std::vector<Column>& { return columns_; }
    [[nodiscard]] auto row_count() const noexcept -> std::size_t { return row_count_; }

    // Stable field identifiers, parallel to columns().
    [[nodiscard]] auto fids() const noexcept -> const std::vector<std::string>& { return fids_; }
    [[nodiscard]] auto find(std::string_view fid) const -> const Column*;

    // Same columns under a new identity; used when a registry assigns ids.
    [[nodiscard]] auto rebrand(std::string id, std::string name) && -> Dataset;

private:
    std::string id_;
    std::string name_;
    std::vector<Column> columns_;
    std::vector<std::string> fids_;
    std::unordered_map<std::string, std::size_t> by_fid_;
    std::size_t row_count_ = 0;
};

enum class SemanticType : std::uint8_t { Nominal, Ordinal, Quantitative, Temporal };
enum class AnalyticType : std::uint8_t { Dimension, Measure };

auto to_string(SemanticType type) -> std::string_view;
auto to_string(AnalyticType type) -> std::string_view;
auto parse_semantic_type(std::string_view text) -> std::optional<SemanticType>;
auto parse_analytic_type(std::string_view text) -> std::optional<AnalyticType>;

struct FieldMeta {
    std::string fid;
    std::string name;
    SemanticType semantic_type = SemanticType::Nominal;
    AnalyticType analytic_type = AnalyticType::Dimension;
    std::size_t distinct_count = 0;
    std::optional<double> min;
    std::optional<double> max;

    auto operator==(const FieldMeta&) const -> bool = default;
};

void to_json(nlohmann::json& out, const FieldMeta& meta);
void from_json(const nlohmann::json& in, FieldMeta& meta);

struct CsvOptions {
    char delimiter = ',';
    bool has_header = true;
    std::string id = "ds";
    std::string name = "dataset";
};

// Integral columns with at most this many distinct values are ordinal
// dimensions rather than measures.
inline constexpr std::size_t kOrdinalDistinctLimit = 20;

auto load_csv(std::string_view bytes, const CsvOptions& options = {}) -> Dataset;
auto load_json_rows(const nlohmann::json& rows, std::string id = "ds", std::string name = "dataset") -> Dataset;
auto infer_fields(const Dataset& dataset) -> std::vector<FieldMeta>;

// RFC 4180 text of the dataset (header + rows), numbers in shortest
// round-trip form and timestamps in ISO-8601.
auto write_csv(const Dataset& dataset, char delimiter = ',') -> std::string;

// Lowercase, non-alphanumerics to '_', collisions suffixed _2, _3, ...
auto sanitize_fids(std::span<const std::string> names) -> std::vector<std::string>;

/// Registry of loaded datasets. Entries are immutable once inserted; insert
/// and lookup may race freely.
class DatasetRegistry {
public:
    struct Entry {
        std::shared_ptr<const Dataset> dataset;
        std::vector<FieldMeta> fields;
    };

    // Assigns the next id ("ds_1", "ds_2", ...) and infers fields.
    auto add(Dataset dataset, std::string name) -> Entry;
    [[nodiscard]] auto find(const std::string& id) const -> std::optional<Entry>;
    [[nodiscard]] auto list() const -> std::vector<Entry>;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry> entries_;
    std::uint64_t next_id_ = 1;
};

}  // namespace walk
