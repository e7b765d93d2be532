#include <walk/server.hpp>

#include <fixtures.hpp>
#include <json_schema.hpp>

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <unistd.h>

using namespace walk;
using walk::testing::fixture_path;
using walk::testing::read_text;

namespace {

auto request(std::string method, std::string path, std::string body = {}, std::string content_type = "application/json",
             std::map<std::string, std::string> query = {}) -> ApiRequest {
    return ApiRequest{std::move(method), std::move(path), std::move(query), std::move(content_type), std::move(body)};
}

auto body_of(const ApiResponse& r) -> OrderedJson {
    return OrderedJson::parse(r.body);
}

auto spec_text(const std::string& name) -> std::string {
    return read_text(fixture_path("specs/" + name + ".json"));
}

auto count_of(const std::string& haystack, const std::string& needle) -> std::size_t {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

class ApiTest : public ::testing::Test {
protected:
    void SetUp() override {
        auto r = api.handle(request("POST", "/api/datasets", read_text(fixture_path("superstore.csv")), "text/csv",
                                    {{"name", "superstore"}}));
        ASSERT_EQ(r.status, 200) << r.body;
        id = body_of(r)["id"].get<std::string>();
    }

    Api api;
    std::string id;
};

}  // namespace

TEST_F(ApiTest, Health) {
    auto r = api.handle(request("GET", "/api/health"));
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body_of(r)["status"], "ok");
}

TEST_F(ApiTest, UploadReturnsFields) {
    EXPECT_EQ(id, "ds_1");
    auto r = api.handle(request("POST", "/api/datasets", "a,b\n1,x\n2,y\n", "text/csv"));
    ASSERT_EQ(r.status, 200);
    auto body = body_of(r);
    EXPECT_EQ(body["id"], "ds_2");
    EXPECT_EQ(body["fields"].size(), 2U);
    EXPECT_EQ(body["row_count"], 2);
    EXPECT_EQ(body["fields"][0]["fid"], "a");
}

TEST_F(ApiTest, UploadJsonRows) {
    auto r = api.handle(request("POST", "/api/datasets", R"([{"a":1},{"a":2,"b":"x"}])", "application/json"));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(body_of(r)["fields"].size(), 2U);
}

TEST_F(ApiTest, UploadErrors) {
    auto ragged = api.handle(request("POST", "/api/datasets", "a,b\n1,x\n2", "text/csv"));
    EXPECT_EQ(ragged.status, 400);
    EXPECT_EQ(body_of(ragged)["code"], "RaggedRow");
    EXPECT_EQ(body_of(ragged)["details"][0]["path"], "line 3");
    auto empty = api.handle(request("POST", "/api/datasets", "", "text/csv"));
    EXPECT_EQ(empty.status, 400);
    EXPECT_EQ(body_of(empty)["code"], "EmptyInput");
    auto nested = api.handle(request("POST", "/api/datasets", R"([{"a":{"b":1}}])"));
    EXPECT_EQ(body_of(nested)["code"], "NestedValue");
}

TEST(ApiCaps, OversizeUploadIs413) {
    ServerConfig config;
    config.data_cap_bytes = 16;
    Api api(config);
    auto r = api.handle(request("POST", "/api/datasets", "a,b\n1,x\n2,y\n3,z\n4,w\n", "text/csv"));
    EXPECT_EQ(r.status, 413);
    EXPECT_EQ(body_of(r)["code"], "PayloadTooLarge");

    ServerConfig rows;
    rows.row_cap = 1;
    Api small(rows);
    EXPECT_EQ(small.handle(request("POST", "/api/datasets", "a\n1\n2\n", "text/csv")).status, 413);
}

TEST_F(ApiTest, ListAndGetDataset) {
    auto list = body_of(api.handle(request("GET", "/api/datasets")));
    ASSERT_EQ(list.size(), 1U);
    EXPECT_EQ(list[0]["name"], "superstore");
    auto one = api.handle(request("GET", "/api/datasets/" + id));
    ASSERT_EQ(one.status, 200);
    auto body = body_of(one);
    EXPECT_EQ(body["fields"].size(), 21U);
    EXPECT_EQ(body["preview"]["fields"].size(), 21U);
    EXPECT_FALSE(body["preview"]["rows"].empty());
    auto missing = api.handle(request("GET", "/api/datasets/ds_99"));
    EXPECT_EQ(missing.status, 404);
    EXPECT_EQ(body_of(missing)["code"], "UnknownDataset");
}

TEST_F(ApiTest, QueryScenarioLineChart) {
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/query", spec_text("sales_by_region")));
    ASSERT_EQ(r.status, 200) << r.body;
    auto body = body_of(r);
    std::vector<std::string> fids;
    for (const auto& f : body["fields"]) {
        fids.push_back(f["fid"].get<std::string>());
    }
    EXPECT_EQ(fids, (std::vector<std::string>{"year", "region", "sales_sum"}));
    EXPECT_EQ(body["rows"].size(), 16U);
}

TEST_F(ApiTest, QueryTableSpecHasSixRollups) {
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/query", spec_text("north_asia_pivot")));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(body_of(r)["rollups"].size(), 6U);
}

TEST_F(ApiTest, QueryErrors) {
    auto unresolved = api.handle(request("POST", "/api/datasets/" + id + "/query",
                                         R"({"version":1,"channels":{"x":[{"fid":"salez"}]}})"));
    EXPECT_EQ(unresolved.status, 422);
    auto body = body_of(unresolved);
    EXPECT_EQ(body["code"], "ValidationFailed");
    EXPECT_EQ(body["details"][0]["code"], "UnresolvedField");
    EXPECT_EQ(body["details"][0]["path"], "channels.x[0]");

    auto syntax = api.handle(request("POST", "/api/datasets/" + id + "/query", "{"));
    EXPECT_EQ(syntax.status, 400);
    EXPECT_EQ(body_of(syntax)["code"], "JsonSyntax");

    auto version = api.handle(request("POST", "/api/datasets/" + id + "/query", R"({"version":2})"));
    EXPECT_EQ(body_of(version)["code"], "UnsupportedVersion");

    EXPECT_EQ(api.handle(request("POST", "/api/datasets/ds_9/query", spec_text("sales_by_region"))).status, 404);
}

TEST_F(ApiTest, RenderReturnsSchemaValidChart) {
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/render", spec_text("north_asia_categories")));
    ASSERT_EQ(r.status, 200) << r.body;
    auto doc = nlohmann::json::parse(r.body);
    EXPECT_TRUE(walk::testing::vega_lite_schema().validate(doc).empty());
    EXPECT_EQ(doc["encoding"]["color"]["field"], "category");
}

TEST_F(ApiTest, RenderEmptySpec) {
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/render", R"({"version":1})"));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_TRUE(walk::testing::vega_lite_schema().validate(nlohmann::json::parse(r.body)).empty());
}

TEST_F(ApiTest, RenderGeographicIs422) {
    auto spec = OrderedJson::parse(spec_text("north_asia_categories"));
    spec["config"] = {{"coord", "geographic"}};
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/render", spec.dump()));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(body_of(r)["code"], "RenderError");
}

TEST_F(ApiTest, RenderPivot) {
    auto r = api.handle(request("POST", "/api/datasets/" + id + "/render", spec_text("north_asia_pivot")));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_TRUE(body_of(r).contains("col_tree"));
}

TEST_F(ApiTest, CompileSpecToGoldenSql) {
    OrderedJson body = {{"spec", OrderedJson::parse(spec_text("sales_by_region"))},
                        {"dataset", id},
                        {"table", "superstore"},
                        {"dialect", "ansi"}};
    auto r = api.handle(request("POST", "/api/compile/sql", body.dump()));
    ASSERT_EQ(r.status, 200) << r.body;
    auto golden = read_text(fixture_path("golden/sales_by_region.ansi.sql"));
    while (!golden.empty() && golden.back() == '\n') {
        golden.pop_back();
    }
    EXPECT_EQ(body_of(r)["sql"], golden);
    EXPECT_EQ(body_of(r)["output_fields"], OrderedJson({"year", "region", "sales_sum"}));
}

TEST_F(ApiTest, CompileWithInlineFields) {
    auto fields = body_of(api.handle(request("GET", "/api/datasets/" + id)))["fields"];
    OrderedJson body = {{"spec", OrderedJson::parse(spec_text("north_asia_categories"))},
                        {"fields", fields},
                        {"table", "superstore"},
                        {"dialect", "duckdb"}};
    auto r = api.handle(request("POST", "/api/compile/sql", body.dump()));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(body_of(r)["dialect"], "duckdb");
}

TEST_F(ApiTest, CompileWorkflowDirectly) {
    OrderedJson body = {
        {"workflow", OrderedJson::parse(R"({"steps":[{"step":"view","mode":"aggregate","group_by":["region"],
            "measures":[{"fid":"sales","aggregation":"sum","out_fid":"sales_sum"}]}]})")},
        {"table", "t"}};
    auto r = api.handle(request("POST", "/api/compile/sql", body.dump()));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(body_of(r)["sql"], R"(SELECT "region", SUM("sales") AS "sales_sum" FROM "t" GROUP BY "region")");
}

TEST_F(ApiTest, CompileErrors) {
    OrderedJson bad_dialect = {{"workflow", {{"steps", OrderedJson::array()}}}, {"table", "t"}, {"dialect", "oracle"}};
    auto r = api.handle(request("POST", "/api/compile/sql", bad_dialect.dump()));
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(body_of(r)["details"][0]["path"], "dialect");
    OrderedJson no_table = {{"spec", OrderedJson::parse(spec_text("sales_by_region"))}, {"dataset", id}};
    EXPECT_EQ(api.handle(request("POST", "/api/compile/sql", no_table.dump())).status, 400);
    OrderedJson no_fields = {{"spec", OrderedJson::parse(spec_text("sales_by_region"))}, {"table", "t"}};
    EXPECT_EQ(api.handle(request("POST", "/api/compile/sql", no_fields.dump())).status, 400);
    OrderedJson invalid = {{"spec", OrderedJson::parse(R"({"version":1,"channels":{"x":[{"fid":"salez"}]}})")},
                           {"dataset", id},
                           {"table", "t"}};
    EXPECT_EQ(api.handle(request("POST", "/api/compile/sql", invalid.dump())).status, 422);
}

TEST_F(ApiTest, SpecPutGetIsByteEqual) {
    auto put = api.handle(request("PUT", "/api/specs/sales", spec_text("sales_by_region")));
    ASSERT_EQ(put.status, 200) << put.body;
    EXPECT_EQ(body_of(put)["name"], "sales");
    auto first = api.handle(request("GET", "/api/specs/sales"));
    ASSERT_EQ(first.status, 200);
    auto golden = read_text(fixture_path("golden/sales_by_region.canonical.json"));
    while (!golden.empty() && golden.back() == '\n') {
        golden.pop_back();
    }
    EXPECT_EQ(first.body, golden);
    ASSERT_EQ(api.handle(request("PUT", "/api/specs/sales", first.body)).status, 200);
    EXPECT_EQ(api.handle(request("GET", "/api/specs/sales")).body, first.body);
    EXPECT_EQ(body_of(api.handle(request("GET", "/api/specs"))), OrderedJson({"sales"}));
}

TEST_F(ApiTest, SpecErrors) {
    EXPECT_EQ(api.handle(request("GET", "/api/specs/none")).status, 404);
    EXPECT_EQ(api.handle(request("PUT", "/api/specs/..evil", spec_text("sales_by_region"))).status, 400);
    auto bad = api.handle(request("PUT", "/api/specs/x", R"({"version":1,"channels":{"color":[{"fid":"a"},{"fid":"b"}]}})"));
    EXPECT_EQ(bad.status, 400);
    EXPECT_EQ(body_of(bad)["code"], "SchemaViolation");
    EXPECT_EQ(body_of(bad)["details"][0]["path"], "channels.color");
}

TEST(ApiSpecDir, SpecsPersistAcrossInstances) {
    auto dir = std::filesystem::temp_directory_path() / ("walk_specs_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    ServerConfig config;
    config.spec_dir = dir;
    std::string saved;
    {
        Api api(config);
        ASSERT_EQ(api.handle(request("PUT", "/api/specs/keep", spec_text("north_asia_pivot"))).status, 200);
        saved = api.handle(request("GET", "/api/specs/keep")).body;
    }
    Api again(config);
    auto r = again.handle(request("GET", "/api/specs/keep"));
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body, saved);
    std::filesystem::remove_all(dir);
}

TEST_F(ApiTest, ExportEmptyShell) {
    auto r = api.handle(request("GET", "/api/export/html"));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.content_type.rfind("text/html", 0), 0U);
    EXPECT_EQ(count_of(r.body, "class=\"gw-tab\""), 0U);
}

TEST_F(ApiTest, ExportScenarioTabs) {
    std::string names;
    for (const auto& name : walk::testing::kScenarioSpecs) {
        ASSERT_EQ(api.handle(request("PUT", "/api/specs/" + name, spec_text(name))).status, 200);
        names += (names.empty() ? "" : ",") + name;
    }
    auto r = api.handle(request("GET", "/api/export/html", {}, {}, {{"specs", names}, {"dataset", id}}));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(count_of(r.body, "class=\"gw-tab\""), 4U);
    EXPECT_EQ(api.handle(request("GET", "/api/export/html", {}, {}, {{"specs", names}})).status, 400);
    EXPECT_EQ(api.handle(request("GET", "/api/export/html", {}, {}, {{"specs", "nope"}, {"dataset", id}})).status, 404);
}

TEST_F(ApiTest, UnknownRoutes) {
    EXPECT_EQ(api.handle(request("GET", "/api/nothing")).status, 404);
    EXPECT_EQ(api.handle(request("DELETE", "/api/datasets")).status, 404);
    EXPECT_EQ(api.handle(request("GET", "/elsewhere")).status, 404);
    EXPECT_EQ(api.handle(request("OPTIONS", "/api/datasets")).status, 204);
}

TEST_F(ApiTest, ConcurrentQueriesAndUploads) {
    auto spec = spec_text("sales_by_region");
    auto expected = api.handle(request("POST", "/api/datasets/" + id + "/query", spec)).body;
    std::atomic<int> mismatches{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 10; ++i) {
                if (t % 2 == 0) {
                    if (api.handle(request("POST", "/api/datasets/" + id + "/query", spec)).body != expected) {
                        ++mismatches;
                    }
                } else {
                    if (api.handle(request("POST", "/api/datasets", "a\n1\n", "text/csv")).status != 200) {
                        ++mismatches;
                    }
                    api.handle(request("PUT", "/api/specs/s" + std::to_string(t), spec));
                }
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(mismatches.load(), 0);
    EXPECT_EQ(body_of(api.handle(request("GET", "/api/datasets"))).size(), 41U);
}
