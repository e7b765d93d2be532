#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace walk {

// Physical storage of a column. Every column holds exactly one kind.
enum class StorageKind : std::uint8_t {
    Float64,
    Utf8,
    Timestamp,  // epoch milliseconds, UTC
};

auto to_string(StorageKind kind) -> std::string_view;

struct Timestamp {
    std::int64_t millis = 0;

    auto operator<=>(const Timestamp&) const = default;
};

// A single cell value. std::monostate is SQL NULL.
using Scalar = std::variant<std::monostate, double, std::string, Timestamp>;

inline auto is_null(const Scalar& value) -> bool {
    return std::holds_alternative<std::monostate>(value);
}

// Total order used for group keys, sorting and pivot headers: null sorts
// first, then values of one kind by their natural order. Mixed kinds (which
// never occur inside one column) order float < utf8 < timestamp.
auto compare_scalars(const Scalar& lhs, const Scalar& rhs) -> std::strong_ordering;

// Group-key equality: exact, with float64 compared bitwise.
auto scalars_identical(const Scalar& lhs, const Scalar& rhs) -> bool;

// Strict numeric literal: optional '-', digits, optional fraction and
// exponent. Rejects inf/nan, hex and surrounding whitespace.
auto parse_number(std::string_view text) -> std::optional<double>;

// Shortest decimal text that round-trips to the same double.
auto format_number(double value) -> std::string;

// Accepts `YYYY-MM-DD` and `YYYY-MM-DDTHH:MM:SS[Z]` (a space is also accepted
// in place of 'T'), interpreted as UTC.
auto parse_iso_datetime(std::string_view text) -> std::optional<Timestamp>;

// `YYYY-MM-DDTHH:MM:SSZ`, with `.mmm` inserted when the millisecond part is
// non-zero.
auto format_iso_datetime(Timestamp ts) -> std::string;

// `YYYY-MM-DD HH:MM:SS[.mmm]`, the form used inside SQL TIMESTAMP literals.
auto format_sql_datetime(Timestamp ts) -> std::string;

// Display form used by CSV writing and diagnostics; null renders empty.
auto scalar_to_text(const Scalar& value) -> std::string;

}  // namespace walk
