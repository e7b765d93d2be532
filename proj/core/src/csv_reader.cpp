#include "ingest.hpp"

#include <walk/error.hpp>

#include <string>

namespace walk {

namespace {

// RFC 4180 record scanner. Quoted fields may span lines and escape '"' by
// doubling it; CRLF and LF both terminate records.
class CsvScanner {
public:
    CsvScanner(std::string_view text, char delimiter) : text_(text), delimiter_(delimiter) {}

    [[nodiscard]] auto done() const -> bool { return pos_ >= text_.size(); }
    [[nodiscard]] auto line() const -> std::size_t { return line_; }

    // Reads one record; a quoted-empty or unquoted-empty field is nullopt.
    auto next(std::vector<std::optional<std::string>>& fields) -> void {
        fields.clear();
        std::string cell;
        bool quoted = false;
        bool any = false;
        auto flush = [&] {
            if (cell.empty()) {
                fields.emplace_back(std::nullopt);
            } else {
                fields.emplace_back(std::move(cell));
            }
            cell.clear();
            quoted = false;
        };
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '"' && cell.empty() && !quoted) {
                quoted = true;
                any = true;
                ++pos_;
                read_quoted(cell);
                continue;
            }
            if (c == delimiter_) {
                any = true;
                flush();
                ++pos_;
                continue;
            }
            if (c == '\n' || c == '\r') {
                ++pos_;
                if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
                    ++pos_;
                }
                ++line_;
                flush();
                return;
            }
            if (quoted) {
                throw Error(ErrorCode::CsvSyntax, "unexpected character after closing quote",
                            "line " + std::to_string(line_));
            }
            any = true;
            cell.push_back(c);
            ++pos_;
        }
        if (any || !cell.empty()) {
            flush();
        } else {
            fields.emplace_back(std::nullopt);
        }
    }

private:
    auto read_quoted(std::string& cell) -> void {
        std::size_t start_line = line_;
        while (pos_ < text_.size()) {
            char c = text_[pos_++];
            if (c == '"') {
                if (pos_ < text_.size() && text_[pos_] == '"') {
                    cell.push_back('"');
                    ++pos_;
                    continue;
                }
                return;
            }
            if (c == '\n') {
                ++line_;
            }
            cell.push_back(c);
        }
        throw Error(ErrorCode::CsvSyntax, "unterminated quoted field", "line " + std::to_string(start_line));
    }

    std::string_view text_;
    char delimiter_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

auto is_blank(const std::vector<std::optional<std::string>>& fields) -> bool {
    return fields.size() == 1 && !fields.front().has_value();
}

}  // namespace

auto load_csv(std::string_view bytes, const CsvOptions& options) -> Dataset {
    if (bytes.empty()) {
        throw Error(ErrorCode::EmptyInput, "input has zero bytes");
    }
    if (bytes.starts_with("\xEF\xBB\xBF")) {
        bytes.remove_prefix(3);
    }
    if (auto bad = detail::find_invalid_utf8(bytes)) {
        throw Error(ErrorCode::EncodingError, "invalid UTF-8 sequence", "byte " + std::to_string(*bad));
    }
    if (options.delimiter == '"' || options.delimiter == '\n' || options.delimiter == '\r') {
        throw Error(ErrorCode::CsvSyntax, "delimiter cannot be a quote or line break");
    }

    CsvScanner scanner(bytes, options.delimiter);
    std::vector<std::optional<std::string>> record;
    detail::TextTable table;

    std::size_t width = 0;
    bool have_width = false;
    if (options.has_header) {
        scanner.next(record);
        if (is_blank(record)) {
            throw Error(ErrorCode::EmptyInput, "header row has zero columns");
        }
        for (auto& cell : record) {
            table.names.push_back(cell.value_or(std::string{}));
        }
        width = record.size();
        have_width = true;
        table.columns.resize(width);
    }

    while (!scanner.done()) {
        std::size_t line = scanner.line();
        scanner.next(record);
        if (is_blank(record) && width != 1) {
            continue;
        }
        if (!have_width) {
            width = record.size();
            have_width = true;
            table.columns.resize(width);
            for (std::size_t i = 0; i < width; ++i) {
                table.names.push_back("column_" + std::to_string(i + 1));
            }
        }
        if (record.size() != width) {
            throw Error(ErrorCode::RaggedRow,
                        "expected " + std::to_string(width) + " fields, found " + std::to_string(record.size()),
                        "line " + std::to_string(line));
        }
        for (std::size_t i = 0; i < width; ++i) {
            table.columns[i].push_back(std::move(record[i]));
        }
    }
    if (!have_width || width == 0) {
        throw Error(ErrorCode::EmptyInput, "input has zero columns");
    }
    table.names = detail::uniquify_names(std::move(table.names));
    return detail::build_dataset(std::move(table), options.id, options.name);
}

namespace {

auto needs_quotes(std::string_view text, char delimiter) -> bool {
    return text.empty() || text.find_first_of(std::string{'"', '\n', '\r', delimiter}) != std::string_view::npos;
}

auto append_cell(std::string& out, std::string_view text, char delimiter, bool force_quote) {
    if (!force_quote && !needs_quotes(text, delimiter)) {
        out.append(text);
        return;
    }
    out.push_back('"');
    for (char c : text) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

auto write_csv(const Dataset& dataset, char delimiter) -> std::string {
    std::string out;
    const auto& columns = dataset.columns();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c > 0) {
            out.push_back(delimiter);
        }
        append_cell(out, columns[c].name(), delimiter, false);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c > 0) {
                out.push_back(delimiter);
            }
            const auto& column = columns[c];
            if (column.is_null(r)) {
                // An unquoted empty cell reads back as null.
                continue;
            }
            append_cell(out, scalar_to_text(column.at(r)), delimiter, false);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace walk
