#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace walk::testing {

auto fixture_path(const std::string& relative) -> std::string {
    return std::string(WALK_FIXTURES_DIR) + "/" + relative;
}

auto read_text(const std::string& path) -> std::string {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
}

auto superstore() -> const Superstore& {
    static const Superstore store = [] {
        CsvOptions options;
        options.id = "ds_1";
        options.name = "superstore";
        auto dataset = load_csv(read_text(fixture_path("superstore.csv")), options);
        auto fields = infer_fields(dataset);
        return Superstore{std::move(dataset), std::move(fields)};
    }();
    return store;
}

auto scenario_spec(const std::string& name) -> GraphicSpec {
    return parse_spec(read_text(fixture_path("specs/" + name + ".json")));
}

}  // namespace walk::testing
