#pragma once

#include <walk/spec_model.hpp>
#include <walk/table_store.hpp>

#include <string>
#include <vector>

namespace walk::testing {

auto fixture_path(const std::string& relative) -> std::string;
auto read_text(const std::string& path) -> std::string;
void write_text(const std::string& path, const std::string& text);

struct Superstore {
    Dataset dataset;
    std::vector<FieldMeta> fields;
};

// tests/fixtures/superstore.csv, loaded once per process.
auto superstore() -> const Superstore&;

// tests/fixtures/specs/<name>.json
auto scenario_spec(const std::string& name) -> GraphicSpec;

inline const std::vector<std::string> kScenarioSpecs = {"sales_by_region", "north_asia_categories",
                                                        "north_asia_pivot", "furniture_cities"};

}  // namespace walk::testing
