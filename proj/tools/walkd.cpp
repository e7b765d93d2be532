// walkd: serve the API, run specs headlessly, compile SQL, inspect inference.
//
// Exit codes: 0 success, 1 usage error, 2 data or spec error.

#include <walk/pipeline.hpp>
#include <walk/server.hpp>
#include <walk/sql_compiler.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

walk::HttpServer* g_server = nullptr;

void on_signal(int /*signal*/) {
    if (g_server != nullptr) {
        g_server->stop();
    }
}

auto env(const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') {
        return std::string(v);
    }
    return std::nullopt;
}

auto read_file(const std::string& path) -> std::string {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw walk::Error(walk::ErrorCode::IoError, "cannot read file", path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw walk::Error(walk::ErrorCode::IoError, "cannot write file", path);
    }
}

auto load_dataset(const std::string& path, char delimiter) -> walk::Dataset {
    walk::CsvOptions options;
    options.delimiter = delimiter;
    options.name = fs::path(path).stem().string();
    return walk::load_csv(read_file(path), options);
}

auto to_plain(const walk::OrderedJson& value) -> std::string {
    return value.dump(2) + "\n";
}

void print_infer_table(const std::vector<walk::FieldMeta>& fields) {
    std::vector<std::array<std::string, 7>> rows{{"fid", "name", "semantic", "analytic", "distinct", "min", "max"}};
    for (const auto& f : fields) {
        auto bound = [&](const std::optional<double>& v) -> std::string {
            if (!v) {
                return "";
            }
            if (f.semantic_type == walk::SemanticType::Temporal) {
                return walk::format_iso_datetime(walk::Timestamp{static_cast<std::int64_t>(*v)});
            }
            return walk::format_number(*v);
        };
        rows.push_back({f.fid, f.name, std::string(walk::to_string(f.semantic_type)),
                        std::string(walk::to_string(f.analytic_type)), std::to_string(f.distinct_count),
                        bound(f.min), bound(f.max)});
    }
    std::array<std::size_t, 7> width{};
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            width[c] = std::max(width[c], r[c].size());
        }
    }
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            line += r[c];
            if (c + 1 < r.size()) {
                line += std::string(width[c] - r[c].size() + 2, ' ');
            }
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        std::cout << line << "\n";
    }
}

void report(const walk::Error& error) {
    std::cerr << "error: " << walk::error_code_name(error.code()) << ": " << error.what() << "\n";
    if (const auto* invalid = dynamic_cast<const walk::ValidationError*>(&error)) {
        for (const auto& v : invalid->violations()) {
            std::cerr << "  " << v.code << " at " << v.path << ": " << v.message << "\n";
        }
    }
}

}  // namespace

auto main(int argc, char** argv) -> int {
    CLI::App app{"walkd: declarative chart engine"};
    app.require_subcommand(1);
    char delimiter = ',';

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API (and a UI bundle when given)");
    int port = 8787;
    if (auto p = env("WALKD_PORT") ? env("WALKD_PORT") : env("PORT")) {
        port = std::atoi(p->c_str());
    }
    std::string host = "127.0.0.1";
    std::vector<std::string> data_files;
    std::string spec_dir = env("WALKD_SPEC_DIR").value_or(env("SPEC_DIR").value_or(""));
    std::string ui_dir;
    serve->add_option("--port", port, "Port to listen on (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Interface to bind");
    serve->add_option("--data", data_files, "CSV files to preload");
    serve->add_option("--spec-dir", spec_dir, "Directory for saved specs");
    serve->add_option("--ui-dir", ui_dir, "Static UI bundle served at /")->check(CLI::ExistingDirectory);
    serve->add_option("--delimiter", delimiter, "CSV delimiter");

    auto* run = app.add_subcommand("run", "Execute a spec headlessly");
    std::string data_file;
    std::string spec_file;
    std::string out_file = "-";
    std::string format = "chart";
    run->add_option("--data", data_file, "CSV file")->required();
    run->add_option("--spec", spec_file, "Spec JSON file")->required();
    run->add_option("--out", out_file, "Output file ('-' for stdout)");
    run->add_option("--format", format, "view or chart")->check(CLI::IsMember({"view", "chart"}));
    run->add_option("--delimiter", delimiter, "CSV delimiter");

    auto* sql = app.add_subcommand("sql", "Compile a spec or workflow to SQL");
    std::string workflow_file;
    std::string table;
    std::string dialect_name = "ansi";
    bool sql_json = false;
    auto* sql_spec = sql->add_option("--spec", spec_file, "Spec JSON file (needs --data for field types)");
    auto* sql_workflow = sql->add_option("--workflow", workflow_file, "Workflow JSON file");
    sql_spec->excludes(sql_workflow);
    sql->add_option("--data", data_file, "CSV file whose columns the spec refers to");
    sql->add_option("--table", table, "Table name used in FROM")->required();
    sql->add_option("--dialect", dialect_name, "ansi or duckdb")->check(CLI::IsMember({"ansi", "duckdb"}));
    sql->add_flag("--json", sql_json, "Print {sql, output_fields} as JSON");
    sql->add_option("--delimiter", delimiter, "CSV delimiter");

    auto* infer = app.add_subcommand("infer", "Print inferred field types");
    bool infer_json = false;
    infer->add_option("--data", data_file, "CSV file")->required();
    infer->add_flag("--json", infer_json, "Machine-readable output");
    infer->add_option("--delimiter", delimiter, "CSV delimiter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (serve->parsed()) {
            walk::ServerConfig config;
            if (auto cap = env("DATA_CAP_BYTES")) {
                config.data_cap_bytes = std::stoull(*cap);
            }
            if (!spec_dir.empty()) {
                config.spec_dir = spec_dir;
            }
            if (!ui_dir.empty()) {
                config.ui_dir = ui_dir;
            }
            walk::Api api(config);
            for (const auto& file : data_files) {
                auto entry = api.add_dataset(load_dataset(file, delimiter), fs::path(file).stem().string());
                std::cout << "dataset " << entry.dataset->name() << " id=" << entry.dataset->id()
                          << " fields=" << entry.fields.size() << std::endl;
            }
            walk::HttpServer server(api);
            int bound = server.bind(host, port);
            std::cout << "listening on http://" << host << ":" << bound << std::endl;
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.serve();
            g_server = nullptr;
            return 0;
        }
        if (run->parsed()) {
            auto dataset = load_dataset(data_file, delimiter);
            auto fields = walk::infer_fields(dataset);
            auto spec = walk::parse_spec(read_file(spec_file));
            if (format == "view") {
                write_output(out_file, to_plain(walk::query_result_to_json(walk::run_query(spec, dataset, fields))));
            } else {
                write_output(out_file, to_plain(walk::render(spec, dataset, fields).document));
            }
            return 0;
        }
        if (sql->parsed()) {
            walk::Workflow workflow;
            if (!workflow_file.empty()) {
                workflow = walk::workflow_from_json(walk::OrderedJson::parse(read_file(workflow_file)));
            } else if (!spec_file.empty()) {
                if (data_file.empty()) {
                    std::cerr << "error: --spec needs --data to resolve field types\n";
                    return kUsageError;
                }
                auto dataset = load_dataset(data_file, delimiter);
                auto fields = walk::infer_fields(dataset);
                auto spec = walk::parse_spec(read_file(spec_file));
                walk::require_valid(spec, fields);
                workflow = walk::derive_workflow(spec, fields);
            } else {
                std::cerr << "error: one of --spec or --workflow is required\n";
                return kUsageError;
            }
            auto query = walk::compile_sql(workflow, table, *walk::parse_dialect(dialect_name));
            if (sql_json) {
                walk::OrderedJson out = {{"sql", query.text}, {"output_fields", query.output_fields}};
                std::cout << to_plain(out);
            } else {
                std::cout << query.text << "\n";
            }
            return 0;
        }
        if (infer->parsed()) {
            auto dataset = load_dataset(data_file, delimiter);
            auto fields = walk::infer_fields(dataset);
            if (infer_json) {
                nlohmann::json out = fields;
                std::cout << out.dump(2) << "\n";
            } else {
                print_infer_table(fields);
            }
            return 0;
        }
    } catch (const walk::Error& e) {
        report(e);
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: JsonSyntax: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsageError;
}
