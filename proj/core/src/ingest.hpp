#pragma once

// Shared between the CSV and JSON loaders: text cells collected per column,
// then typed by one inference pass.

#include <walk/table_store.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace walk::detail {

using TextColumn = std::vector<std::optional<std::string>>;

struct TextTable {
    std::vector<std::string> names;
    std::vector<TextColumn> columns;
};

// Storage kind chosen by scanning every non-null cell: all numeric → float64,
// else all ISO dates → timestamp, else utf8. An all-null column is utf8.
auto infer_storage(const TextColumn& cells) -> StorageKind;

auto build_dataset(TextTable table, std::string id, std::string name) -> Dataset;

// Byte offset of the first invalid UTF-8 sequence, if any.
auto find_invalid_utf8(std::string_view bytes) -> std::optional<std::size_t>;

// Duplicate names get " (2)", " (3)", ... so column names stay unique.
auto uniquify_names(std::vector<std::string> names) -> std::vector<std::string>;

}  // namespace walk::detail
