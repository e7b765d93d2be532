#include <walk/exec_engine.hpp>
#include <walk/pipeline.hpp>
#include <walk/sql_compiler.hpp>

#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace walk;

namespace {

auto read_file(const std::string& path) -> std::string {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

auto superstore() -> const Dataset& {
    static const Dataset ds = load_csv(read_file(WALK_SUPERSTORE_CSV));
    return ds;
}

auto scenario(const std::string& name) -> GraphicSpec {
    return parse_spec(read_file(std::string(WALK_SPEC_DIR) + "/" + name + ".json"));
}

// `rows` rows over 50 groups, 12 colors and a noisy measure.
auto synthetic(std::int64_t rows) -> Dataset {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> group(0, 49);
    std::uniform_int_distribution<int> color(0, 11);
    std::normal_distribution<double> value(100.0, 25.0);
    std::ostringstream csv;
    csv << "group,color,value\n";
    for (std::int64_t i = 0; i < rows; ++i) {
        csv << 'g' << group(rng) << ",c" << color(rng) << ',' << value(rng) << '\n';
    }
    return load_csv(csv.str());
}

auto synthetic_spec() -> GraphicSpec {
    return parse_spec(R"({"version":1,"mark":"bar","channels":{"x":[{"fid":"group"}],
        "y":[{"fid":"value","aggregation":"mean"}],"color":[{"fid":"color"}]}})");
}

void BM_LoadSuperstoreCsv(benchmark::State& state) {
    auto text = read_file(WALK_SUPERSTORE_CSV);
    for (auto _ : state) {
        benchmark::DoNotOptimize(load_csv(text));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_LoadSuperstoreCsv);

void BM_ExecuteScenario(benchmark::State& state) {
    const auto& ds = superstore();
    auto fields = infer_fields(ds);
    auto wf = derive_workflow(scenario("furniture_cities"), fields);
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute(wf, ds));
    }
}
BENCHMARK(BM_ExecuteScenario);

void BM_CompileSql(benchmark::State& state) {
    auto fields = infer_fields(superstore());
    auto wf = derive_workflow(scenario("furniture_cities"), fields);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compile_sql(wf, "superstore", Dialect::DuckDb));
    }
}
BENCHMARK(BM_CompileSql);

void BM_RenderScenario(benchmark::State& state) {
    const auto& ds = superstore();
    auto fields = infer_fields(ds);
    auto spec = scenario("sales_by_region");
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(spec, ds, fields));
    }
}
BENCHMARK(BM_RenderScenario);

void BM_RenderPivot(benchmark::State& state) {
    const auto& ds = superstore();
    auto fields = infer_fields(ds);
    auto spec = scenario("north_asia_pivot");
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(spec, ds, fields));
    }
}
BENCHMARK(BM_RenderPivot);

void BM_ExecuteSynthetic(benchmark::State& state) {
    auto ds = synthetic(state.range(0));
    auto fields = infer_fields(ds);
    auto wf = derive_workflow(synthetic_spec(), fields);
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute(wf, ds));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExecuteSynthetic)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
