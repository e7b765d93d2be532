#include <walk/exec_engine.hpp>
#include <walk/pipeline.hpp>
#include <walk/sql_compiler.hpp>

#include <compare.hpp>
#include <generators.hpp>
#include <oracle.hpp>
#include <sqlite_ref.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

using namespace walk;
using walk::testing::Rng;

namespace {

auto shuffled(const Dataset& ds, Rng& rng) -> Dataset {
    std::vector<std::uint32_t> order(ds.row_count());
    std::iota(order.begin(), order.end(), 0U);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Column> columns;
    for (const auto& c : ds.columns()) {
        columns.push_back(c.gather(order));
    }
    return Dataset(ds.id(), ds.name(), std::move(columns));
}

auto sort_col(const Workflow& wf, const ViewTable& view) -> std::optional<std::size_t> {
    if (!wf.sort) {
        return std::nullopt;
    }
    return view.column_index(wf.sort->fid);
}

auto describe_key(const Scalar& v) -> std::string {
    return walk::testing::describe_row({v});
}

// Folds finer roll-up values into a coarser key the way each decomposable
// aggregation composes.
auto combine(Aggregation agg, const Scalar& acc, const Scalar& v) -> Scalar {
    if (is_null(v)) {
        return acc;
    }
    if (is_null(acc)) {
        return v;
    }
    double a = std::get<double>(acc);
    double b = std::get<double>(v);
    switch (agg) {
        case Aggregation::Min:
            return Scalar{std::min(a, b)};
        case Aggregation::Max:
            return Scalar{std::max(a, b)};
        default:
            return Scalar{a + b};
    }
}

}  // namespace

TEST(Properties, AggregatesIgnoreRowOrder) {
    Rng rng(1001);
    for (int i = 0; i < 100; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto wf = derive_workflow(walk::testing::random_valid_spec(rng, ds, fields, false), fields);
        if (!std::holds_alternative<AggregateView>(wf.view.mode)) {
            continue;
        }
        auto a = execute(wf, ds);
        auto b = execute(wf, shuffled(ds, rng));
        std::string why;
        ASSERT_TRUE(walk::testing::rows_match(a.rows, b.rows, std::nullopt, &why)) << why;
    }
}

TEST(Properties, AddingAFilterNeverAddsRows) {
    Rng rng(1002);
    for (int i = 0; i < 100; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto spec = walk::testing::random_valid_spec(rng, ds, fields, false);
        if (spec.filters.empty()) {
            continue;
        }
        auto fewer = spec;
        fewer.filters.pop_back();
        auto filtered = derive_workflow(spec, fields);
        auto wider = derive_workflow(fewer, fields);
        // Raw views count rows directly; only compare those and grouped counts.
        filtered.view.mode = RawView{{ds.fids()[0]}};
        wider.view.mode = RawView{{ds.fids()[0]}};
        filtered.transform.reset();
        wider.transform.reset();
        filtered.sort.reset();
        wider.sort.reset();
        EXPECT_LE(execute(filtered, ds).rows.size(), execute(wider, ds).rows.size());
    }
}

TEST(Properties, SortStepOrdersItsColumn) {
    Rng rng(1003);
    int checked = 0;
    for (int i = 0; i < 300 && checked < 80; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto wf = derive_workflow(walk::testing::random_valid_spec(rng, ds, fields, false), fields);
        if (!wf.sort) {
            continue;
        }
        ++checked;
        auto view = execute(wf, ds);
        auto col = *view.column_index(wf.sort->fid);
        for (std::size_t r = 1; r < view.rows.size(); ++r) {
            auto order = compare_scalars(view.rows[r - 1][col], view.rows[r][col]);
            if (wf.sort->direction == SortDirection::Asc) {
                ASSERT_TRUE(order <= 0);
            } else if (!is_null(view.rows[r][col])) {
                ASSERT_TRUE(order >= 0 && !is_null(view.rows[r - 1][col]));
            }
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(Properties, RollupsAgreeAcrossLevels) {
    Rng rng(1004);
    for (int i = 0; i < 60; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto spec = walk::testing::random_pivot_spec(rng, ds, fields, true);
        auto plan = derive_pivot(spec, fields);
        auto tables = execute_pivot(plan, ds);
        auto model = to_pivot(plan, tables);
        const std::size_t nc = plan.col_path.size();
        const std::size_t nr = plan.row_path.size();
        // Every cell at (i, j) with i < nc is the fold of its children at (i+1, j).
        for (std::size_t i = 0; i < nc; ++i) {
            for (std::size_t j = 0; j <= nr; ++j) {
                const auto& fine = tables[plan.rollup_index(i + 1, j)];
                std::map<std::vector<std::string>, std::vector<Scalar>> folded;
                for (const auto& row : fine.rows) {
                    std::vector<std::string> key;
                    for (std::size_t k = 0; k < i; ++k) {
                        key.push_back(describe_key(row[*fine.column_index(plan.col_path[k])]));
                    }
                    for (std::size_t k = 0; k < j; ++k) {
                        key.push_back(describe_key(row[*fine.column_index(plan.row_path[k])]));
                    }
                    auto& acc = folded[key];
                    acc.resize(plan.measures.size());
                    for (std::size_t m = 0; m < plan.measures.size(); ++m) {
                        const auto& measure = plan.measures[m];
                        acc[m] = combine(measure.aggregation, acc[m], row[*fine.column_index(measure.out_fid)]);
                    }
                }
                const auto& coarse = tables[plan.rollup_index(i, j)];
                for (const auto& row : coarse.rows) {
                    std::vector<std::string> key;
                    for (std::size_t k = 0; k < i; ++k) {
                        key.push_back(describe_key(row[*coarse.column_index(plan.col_path[k])]));
                    }
                    for (std::size_t k = 0; k < j; ++k) {
                        key.push_back(describe_key(row[*coarse.column_index(plan.row_path[k])]));
                    }
                    auto it = folded.find(key);
                    if (it == folded.end()) {
                        // Only the empty grand total has no finer rows.
                        ASSERT_EQ(ds.row_count(), 0U);
                        continue;
                    }
                    for (std::size_t m = 0; m < plan.measures.size(); ++m) {
                        ASSERT_TRUE(walk::testing::cells_match(row[*coarse.column_index(plan.measures[m].out_fid)],
                                                               it->second[m]))
                            << serialize_spec(spec);
                    }
                }
            }
        }
        EXPECT_EQ(model.cells.size(), std::accumulate(tables.begin(), tables.end(), std::size_t{0},
                                                      [](std::size_t n, const ViewTable& t) { return n + t.rows.size(); }));
    }
}

TEST(Properties, SqlMatchesEngine) {
    Rng rng(1005);
    for (int i = 0; i < 60; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto wf = derive_workflow(walk::testing::random_valid_spec(rng, ds, fields, false), fields);
        // An empty projection has no SQL form.
        if (wf.output_fids().empty()) {
            continue;
        }
        auto view = execute(wf, ds);
        walk::testing::SqliteRef db;
        db.load(ds, "t");
        for (auto dialect : {Dialect::Ansi, Dialect::DuckDb}) {
            auto sql = walk::testing::SqliteRef::shim(compile_sql(wf, "t", dialect).text);
            auto result = db.query(sql);
            std::string why;
            ASSERT_TRUE(walk::testing::rows_match(view.rows, result.rows, sort_col(wf, view), &why))
                << why << "\n" << sql;
        }
    }
}

TEST(Properties, ValidSpecsAlwaysRun) {
    Rng rng(1006);
    for (int i = 0; i < 150; ++i) {
        auto ds = walk::testing::random_dataset(rng);
        auto fields = infer_fields(ds);
        auto spec = i % 3 == 0 ? walk::testing::random_pivot_spec(rng, ds, fields, false)
                               : walk::testing::random_valid_spec(rng, ds, fields, true);
        ASSERT_NO_THROW(render(spec, ds, fields)) << serialize_spec(spec);
    }
}
