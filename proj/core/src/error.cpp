#include <walk/error.hpp>

namespace walk {

auto error_code_name(ErrorCode code) -> std::string_view {
    switch (code) {
        case ErrorCode::EmptyInput:
            return "EmptyInput";
        case ErrorCode::RaggedRow:
            return "RaggedRow";
        case ErrorCode::CsvSyntax:
            return "CsvSyntax";
        case ErrorCode::EncodingError:
            return "EncodingError";
        case ErrorCode::NestedValue:
            return "NestedValue";
        case ErrorCode::JsonSyntax:
            return "JsonSyntax";
        case ErrorCode::SchemaViolation:
            return "SchemaViolation";
        case ErrorCode::UnsupportedVersion:
            return "UnsupportedVersion";
        case ErrorCode::ValidationFailed:
            return "ValidationFailed";
        case ErrorCode::DerivationError:
            return "DerivationError";
        case ErrorCode::FacetError:
            return "FacetError";
        case ErrorCode::PivotError:
            return "PivotError";
        case ErrorCode::UnknownField:
            return "UnknownField";
        case ErrorCode::TypeMismatch:
            return "TypeMismatch";
        case ErrorCode::OverflowDomain:
            return "OverflowDomain";
        case ErrorCode::NonQuantitativeSource:
            return "NonQuantitativeSource";
        case ErrorCode::UnsupportedInDialect:
            return "UnsupportedInDialect";
        case ErrorCode::InvalidIdentifier:
            return "InvalidIdentifier";
        case ErrorCode::RenderError:
            return "RenderError";
        case ErrorCode::InconsistentRollups:
            return "InconsistentRollups";
        case ErrorCode::IoError:
            return "IoError";
    }
    return "Unknown";
}

namespace {

auto compose(ErrorCode code, const std::string& message, const std::string& path) -> std::string {
    std::string out(error_code_name(code));
    if (!path.empty()) {
        out += " at ";
        out += path;
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

}  // namespace walk
