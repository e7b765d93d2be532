#pragma once

#include <walk/compute_link.hpp>
#include <walk/scalar.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace walk {

enum class Dialect : std::uint8_t { Ansi, DuckDb };

auto to_string(Dialect dialect) -> std::string_view;
auto parse_dialect(std::string_view text) -> std::optional<Dialect>;

struct SqlQuery {
    Dialect dialect = Dialect::Ansi;
    std::string text;  // one statement, no trailing semicolon
    std::vector<std::string> output_fields;
};

// `a"b` -> `"a""b"`. Throws InvalidIdentifier on empty names or embedded NUL.
auto quote_ident(std::string_view name) -> std::string;

// 'O''Hare', 2.5, NULL, TIMESTAMP '2012-01-01 00:00:00'.
auto quote_literal(const Scalar& value) -> std::string;

// Expression for one computed column, including its `AS "out"` alias. Bin
// uses window functions and so must be evaluated over the filtered rows.
auto compile_transform_sql(const ComputedField& computed, Dialect dialect) -> std::string;

auto compile_sql(const Workflow& workflow, std::string_view table, Dialect dialect) -> SqlQuery;

}  // namespace walk
