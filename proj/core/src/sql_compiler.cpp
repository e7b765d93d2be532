#include <walk/error.hpp>
#include <walk/sql_compiler.hpp>

#include <algorithm>

namespace walk {

auto to_string(Dialect dialect) -> std::string_view {
    return dialect == Dialect::Ansi ? "ansi" : "duckdb";
}

auto parse_dialect(std::string_view text) -> std::optional<Dialect> {
    if (text == "ansi") {
        return Dialect::Ansi;
    }
    if (text == "duckdb") {
        return Dialect::DuckDb;
    }
    return std::nullopt;
}

auto quote_ident(std::string_view name) -> std::string {
    if (name.empty()) {
        throw Error(ErrorCode::InvalidIdentifier, "identifier is empty");
    }
    std::string out = "\"";
    for (char c : name) {
        if (c == '\0') {
            throw Error(ErrorCode::InvalidIdentifier, "identifier contains a NUL byte");
        }
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

auto quote_literal(const Scalar& value) -> std::string {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "NULL";
            } else if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else if constexpr (std::is_same_v<T, Timestamp>) {
                return "TIMESTAMP '" + format_sql_datetime(v) + "'";
            } else {
                if (v.find('\0') != std::string::npos) {
                    throw Error(ErrorCode::InvalidIdentifier, "string literal contains a NUL byte");
                }
                std::string out = "'";
                for (char c : v) {
                    if (c == '\'') {
                        out += '\'';
                    }
                    out += c;
                }
                out += '\'';
                return out;
            }
        },
        value);
}

namespace {

auto join(const std::vector<std::string>& parts, std::string_view sep) -> std::string {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

auto filter_condition(const Filter& filter) -> std::string {
    auto column = quote_ident(filter.fid);
    if (const auto* range = std::get_if<Range>(&filter.rule)) {
        if (filter.temporal) {
            auto [lo, hi] = temporal_range_bounds(*range);
            return column + " BETWEEN " + quote_literal(Timestamp{lo}) + " AND " + quote_literal(Timestamp{hi});
        }
        return column + " BETWEEN " + quote_literal(range->lo) + " AND " + quote_literal(range->hi);
    }
    std::vector<std::string> literals;
    bool has_null = false;
    for (const auto& v : std::get<OneOf>(filter.rule).values) {
        if (is_null(v)) {
            has_null = true;
            continue;
        }
        literals.push_back(quote_literal(filter.temporal ? temporal_filter_value(v) : v));
    }
    if (literals.empty()) {
        return column + " IS NULL";
    }
    auto in = column + " IN (" + join(literals, ", ") + ")";
    return has_null ? "(" + in + " OR " + column + " IS NULL)" : in;
}

auto aggregate_sql(const MeasureSpec& m, Dialect dialect) -> std::string {
    auto x = quote_ident(m.fid);
    switch (m.aggregation) {
        case Aggregation::Sum:
            return "SUM(" + x + ")";
        case Aggregation::Mean:
            return "AVG(" + x + ")";
        case Aggregation::Count:
            return "COUNT(*)";
        case Aggregation::CountDistinct:
            return "COUNT(DISTINCT " + x + ")";
        case Aggregation::Min:
            return "MIN(" + x + ")";
        case Aggregation::Max:
            return "MAX(" + x + ")";
        case Aggregation::Median:
            return dialect == Dialect::DuckDb ? "MEDIAN(" + x + ")"
                                              : "PERCENTILE_CONT(0.5) WITHIN GROUP (ORDER BY " + x + ")";
        case Aggregation::Variance:
            return (dialect == Dialect::DuckDb ? "VARIANCE(" : "VAR_SAMP(") + x + ")";
        case Aggregation::Stddev:
            return (dialect == Dialect::DuckDb ? "STDDEV(" : "STDDEV_SAMP(") + x + ")";
        case Aggregation::None:
            break;
    }
    throw Error(ErrorCode::DerivationError, "measure '" + m.fid + "' has no aggregation");
}

}  // namespace

auto compile_transform_sql(const ComputedField& computed, Dialect /*dialect*/) -> std::string {
    auto x = quote_ident(computed.source_fid);
    auto alias = " AS " + quote_ident(computed.out_fid);
    switch (computed.transform.op) {
        case Transform::Op::Log2:
            return "CASE WHEN " + x + " > 0 THEN LN(" + x + ")/LN(2) END" + alias;
        case Transform::Op::Log10:
            return "CASE WHEN " + x + " > 0 THEN LN(" + x + ")/LN(10) END" + alias;
        case Transform::Op::Bin: {
            if (computed.transform.bins <= 0) {
                throw Error(ErrorCode::DerivationError, "bin count must be positive", computed.out_fid);
            }
            auto k = std::to_string(computed.transform.bins);
            auto min = "MIN(" + x + ") OVER ()";
            auto span = "(MAX(" + x + ") OVER () - " + min + ")";
            auto width = "(" + span + " / " + k + ")";
            // The explicit NULL arm matters: LEAST skips nulls on some engines.
            return "CASE WHEN " + x + " IS NULL THEN NULL WHEN " + span + " = 0 THEN " + min + " ELSE " + min +
                   " + LEAST(FLOOR((" + x + " - " + min + ") / " + width + "), " + k + " - 1) * " + width + " END" +
                   alias;
        }
    }
    return {};
}

auto compile_sql(const Workflow& workflow, std::string_view table, Dialect dialect) -> SqlQuery {
    SqlQuery query;
    query.dialect = dialect;
    query.output_fields = workflow.output_fids();
    if (query.output_fields.empty()) {
        throw Error(ErrorCode::DerivationError, "the view selects no columns");
    }

    std::vector<std::string> ctes;
    std::string source = quote_ident(table);
    if (workflow.filter && !workflow.filter->filters.empty()) {
        std::vector<std::string> conditions;
        for (const auto& f : workflow.filter->filters) {
            conditions.push_back(filter_condition(f));
        }
        ctes.push_back("filtered AS (SELECT * FROM " + source + " WHERE " + join(conditions, " AND ") + ")");
        source = "filtered";
    }
    if (workflow.transform && !workflow.transform->computed.empty()) {
        std::vector<std::string> exprs{"*"};
        for (const auto& c : workflow.transform->computed) {
            exprs.push_back(compile_transform_sql(c, dialect));
        }
        ctes.push_back("transformed AS (SELECT " + join(exprs, ", ") + " FROM " + source + ")");
        source = "transformed";
    }

    std::string text;
    if (!ctes.empty()) {
        text = "WITH " + join(ctes, ", ") + " ";
    }

    std::vector<std::string> group_keys;
    std::vector<std::string> select;
    if (const auto* agg = std::get_if<AggregateView>(&workflow.view.mode)) {
        for (const auto& g : agg->group_by) {
            group_keys.push_back(quote_ident(g));
            select.push_back(quote_ident(g));
        }
        for (const auto& m : agg->measures) {
            select.push_back(aggregate_sql(m, dialect) + " AS " + quote_ident(m.out_fid));
        }
    } else {
        for (const auto& fid : std::get<RawView>(workflow.view.mode).fids) {
            select.push_back(quote_ident(fid));
        }
    }
    text += "SELECT " + join(select, ", ") + " FROM " + source;
    if (!group_keys.empty()) {
        text += " GROUP BY " + join(group_keys, ", ");
    }
    if (workflow.sort) {
        auto key = quote_ident(workflow.sort->fid);
        std::vector<std::string> order{key + (workflow.sort->direction == SortDirection::Asc ? " ASC NULLS FIRST"
                                                                                             : " DESC NULLS LAST")};
        for (const auto& g : group_keys) {
            if (g != key) {
                order.push_back(g + " ASC NULLS FIRST");
            }
        }
        text += " ORDER BY " + join(order, ", ");
    }
    query.text = std::move(text);
    return query;
}

}  // namespace walk
