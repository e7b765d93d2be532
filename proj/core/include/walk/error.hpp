#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace walk {

enum class ErrorCode : std::uint8_t {
    // ingestion
    EmptyInput,
    RaggedRow,
    CsvSyntax,
    EncodingError,
    NestedValue,
    // spec documents
    JsonSyntax,
    SchemaViolation,
    UnsupportedVersion,
    ValidationFailed,
    // derivation
    DerivationError,
    FacetError,
    PivotError,
    // execution
    UnknownField,
    TypeMismatch,
    OverflowDomain,
    NonQuantitativeSource,
    // sql
    UnsupportedInDialect,
    InvalidIdentifier,
    // rendering
    RenderError,
    InconsistentRollups,
    // io
    IoError,
};

auto error_code_name(ErrorCode code) -> std::string_view;

// Every failure in the engine surfaces as walk::Error. `path` locates the
// problem inside the input (a JSON path such as "channels.color", or a CSV
// line such as "line 3") and is empty when not applicable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string path = {});

    [[nodiscard]] auto code() const noexcept -> ErrorCode { return code_; }
    [[nodiscard]] auto path() const noexcept -> const std::string& { return path_; }

private:
    ErrorCode code_;
    std::string path_;
};

}  // namespace walk
