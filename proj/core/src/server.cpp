#include <walk/server.hpp>
#include <walk/sql_compiler.hpp>

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>

namespace walk {

namespace {

constexpr std::size_t kPreviewRows = 100;

struct UnknownDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

auto json_response(int status, const OrderedJson& body) -> ApiResponse {
    return ApiResponse{status, "application/json", body.dump()};
}

auto error_response(int status, std::string_view code, const std::string& message,
                    OrderedJson details = OrderedJson::array()) -> ApiResponse {
    OrderedJson body = OrderedJson::object();
    body["code"] = code;
    body["message"] = message;
    body["details"] = std::move(details);
    return json_response(status, body);
}

auto status_for(ErrorCode code) -> int {
    switch (code) {
        case ErrorCode::EmptyInput:
        case ErrorCode::RaggedRow:
        case ErrorCode::CsvSyntax:
        case ErrorCode::EncodingError:
        case ErrorCode::NestedValue:
        case ErrorCode::JsonSyntax:
        case ErrorCode::SchemaViolation:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::InvalidIdentifier:
            return 400;
        case ErrorCode::IoError:
            return 500;
        default:
            return 422;
    }
}

auto from_error(const Error& error) -> ApiResponse {
    OrderedJson details = OrderedJson::array();
    if (const auto* invalid = dynamic_cast<const ValidationError*>(&error)) {
        for (const auto& v : invalid->violations()) {
            details.push_back({{"code", v.code}, {"path", v.path}, {"message", v.message}});
        }
    } else if (!error.path().empty()) {
        details.push_back({{"code", error_code_name(error.code())}, {"path", error.path()}});
    }
    return error_response(status_for(error.code()), error_code_name(error.code()), error.what(), std::move(details));
}

auto fields_json(const std::vector<FieldMeta>& fields) -> OrderedJson {
    nlohmann::json plain = fields;
    return OrderedJson::parse(plain.dump());
}

auto dataset_summary(const DatasetRegistry::Entry& entry) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    out["id"] = entry.dataset->id();
    out["name"] = entry.dataset->name();
    out["row_count"] = entry.dataset->row_count();
    out["fields"] = fields_json(entry.fields);
    return out;
}

auto split_path(const std::string& path) -> std::vector<std::string> {
    std::vector<std::string> parts;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) {
                parts.push_back(std::move(current));
                current.clear();
            }
        } else {
            current += c;
        }
    }
    if (!current.empty()) {
        parts.push_back(std::move(current));
    }
    return parts;
}

auto valid_spec_name(const std::string& name) -> bool {
    if (name.empty() || name.size() > 128 || name.front() == '.') {
        return false;
    }
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
    });
}

auto split_list(const std::string& text) -> std::vector<std::string> {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

auto parse_body(const ApiRequest& request) -> OrderedJson {
    try {
        return OrderedJson::parse(request.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::JsonSyntax, e.what());
    }
}

}  // namespace

Api::Api(ServerConfig config) : config_(std::move(config)) {
    load_saved_specs();
}

void Api::load_saved_specs() {
    if (!config_.spec_dir) {
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(*config_.spec_dir, ec);
    if (!std::filesystem::is_directory(*config_.spec_dir)) {
        throw Error(ErrorCode::IoError, "spec directory is not usable", config_.spec_dir->string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(*config_.spec_dir)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        auto name = entry.path().stem().string();
        if (!valid_spec_name(name)) {
            continue;
        }
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        try {
            specs_[name] = serialize_spec(parse_spec(text.str()));
        } catch (const Error&) {
            // Unreadable files are left alone rather than failing startup.
        }
    }
}

auto Api::add_dataset(Dataset dataset, std::string name) -> DatasetRegistry::Entry {
    return registry_.add(std::move(dataset), std::move(name));
}

auto Api::lookup(const std::string& id) -> DatasetRegistry::Entry {
    auto entry = registry_.find(id);
    if (!entry) {
        throw UnknownDataset(id);
    }
    return *entry;
}

auto Api::handle(const ApiRequest& request) -> ApiResponse {
    auto parts = split_path(request.path);
    const auto& m = request.method;
    try {
        if (parts.empty() || parts[0] != "api") {
            return error_response(404, "NotFound", "no route for " + request.path);
        }
        if (m == "OPTIONS") {
            return ApiResponse{204, "text/plain", ""};
        }
        if (parts.size() == 2 && parts[1] == "health" && m == "GET") {
            return json_response(200, {{"status", "ok"}});
        }
        if (parts.size() >= 2 && parts[1] == "datasets") {
            if (parts.size() == 2 && m == "POST") {
                return post_dataset(request);
            }
            if (parts.size() == 2 && m == "GET") {
                return list_datasets();
            }
            if (parts.size() == 3 && m == "GET") {
                return get_dataset(parts[2]);
            }
            if (parts.size() == 4 && m == "POST" && parts[3] == "query") {
                return query(parts[2], request);
            }
            if (parts.size() == 4 && m == "POST" && parts[3] == "render") {
                return render_spec(parts[2], request);
            }
        }
        if (parts.size() == 3 && parts[1] == "compile" && parts[2] == "sql" && m == "POST") {
            return compile(request);
        }
        if (parts.size() >= 2 && parts[1] == "specs") {
            if (parts.size() == 2 && m == "GET") {
                return list_specs();
            }
            if (parts.size() == 3 && m == "GET") {
                return get_spec(parts[2]);
            }
            if (parts.size() == 3 && m == "PUT") {
                return put_spec(parts[2], request);
            }
        }
        if (parts.size() == 3 && parts[1] == "export" && parts[2] == "html" && m == "GET") {
            return export_page(request);
        }
        return error_response(404, "NotFound", "no route for " + m + " " + request.path);
    } catch (const UnknownDataset& e) {
        return error_response(404, "UnknownDataset", std::string("unknown dataset '") + e.what() + "'");
    } catch (const Error& e) {
        return from_error(e);
    } catch (const nlohmann::json::exception& e) {
        return error_response(400, "BadRequest", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "Internal", e.what());
    }
}

auto Api::post_dataset(const ApiRequest& request) -> ApiResponse {
    if (request.body.size() > config_.data_cap_bytes) {
        return error_response(413, "PayloadTooLarge",
                              "upload exceeds " + std::to_string(config_.data_cap_bytes) +
                                  " bytes; use the SQL path for larger data");
    }
    std::string name = "dataset";
    if (auto it = request.query.find("name"); it != request.query.end() && !it->second.empty()) {
        name = it->second;
    }
    std::optional<Dataset> dataset;
    if (request.content_type.find("json") != std::string::npos) {
        auto rows = parse_body(request);
        dataset = load_json_rows(nlohmann::json::parse(rows.dump()), "upload", name);
    } else {
        CsvOptions options;
        options.name = name;
        if (auto it = request.query.find("delimiter"); it != request.query.end()) {
            if (it->second.size() != 1) {
                return error_response(400, "BadRequest", "delimiter must be one character");
            }
            options.delimiter = it->second[0];
        }
        if (auto it = request.query.find("header"); it != request.query.end()) {
            options.has_header = it->second != "false" && it->second != "0";
        }
        dataset = load_csv(request.body, options);
    }
    if (dataset->row_count() > config_.row_cap) {
        return error_response(413, "PayloadTooLarge",
                              "dataset has " + std::to_string(dataset->row_count()) + " rows, cap is " +
                                  std::to_string(config_.row_cap) + "; use the SQL path for larger data");
    }
    auto entry = registry_.add(std::move(*dataset), name);
    return json_response(200, dataset_summary(entry));
}

auto Api::list_datasets() -> ApiResponse {
    OrderedJson out = OrderedJson::array();
    for (const auto& entry : registry_.list()) {
        out.push_back(dataset_summary(entry));
    }
    return json_response(200, out);
}

auto Api::get_dataset(const std::string& id) -> ApiResponse {
    auto entry = lookup(id);
    auto out = dataset_summary(entry);
    const auto& ds = *entry.dataset;
    OrderedJson rows = OrderedJson::array();
    for (std::size_t r = 0; r < std::min(ds.row_count(), kPreviewRows); ++r) {
        OrderedJson row = OrderedJson::array();
        for (const auto& column : ds.columns()) {
            auto v = column.at(r);
            if (const auto* ts = std::get_if<Timestamp>(&v)) {
                row.push_back(format_iso_datetime(*ts));
            } else {
                row.push_back(scalar_to_json(v));
            }
        }
        rows.push_back(std::move(row));
    }
    out["preview"] = {{"fields", ds.fids()}, {"rows", std::move(rows)}};
    return json_response(200, out);
}

auto Api::query(const std::string& id, const ApiRequest& request) -> ApiResponse {
    auto entry = lookup(id);
    auto spec = parse_spec(request.body);
    auto result = run_query(spec, *entry.dataset, entry.fields);
    return json_response(200, query_result_to_json(result));
}

auto Api::render_spec(const std::string& id, const ApiRequest& request) -> ApiResponse {
    auto entry = lookup(id);
    auto spec = parse_spec(request.body);
    return json_response(200, render(spec, *entry.dataset, entry.fields).document);
}

auto Api::compile(const ApiRequest& request) -> ApiResponse {
    auto body = parse_body(request);
    if (!body.is_object()) {
        return error_response(400, "BadRequest", "expected a JSON object");
    }
    auto dialect_name = body.value("dialect", std::string("ansi"));
    auto dialect = parse_dialect(dialect_name);
    if (!dialect) {
        return error_response(400, "BadRequest", "unknown dialect '" + dialect_name + "'",
                              OrderedJson::array({{{"path", "dialect"}}}));
    }
    if (!body.contains("table") || !body["table"].is_string()) {
        return error_response(400, "BadRequest", "\"table\" is required", OrderedJson::array({{{"path", "table"}}}));
    }
    Workflow workflow;
    if (body.contains("workflow")) {
        workflow = workflow_from_json(body["workflow"]);
    } else if (body.contains("spec")) {
        auto spec = parse_spec_json(body["spec"]);
        std::vector<FieldMeta> fields;
        if (body.contains("dataset") && body["dataset"].is_string()) {
            fields = lookup(body["dataset"].get<std::string>()).fields;
        } else if (body.contains("fields") && body["fields"].is_array()) {
            fields = nlohmann::json::parse(body["fields"].dump()).get<std::vector<FieldMeta>>();
        } else {
            return error_response(400, "BadRequest", "a spec needs \"dataset\" or \"fields\" to resolve types",
                                  OrderedJson::array({{{"path", "dataset"}}}));
        }
        require_valid(spec, fields);
        workflow = derive_workflow(spec, fields);
    } else {
        return error_response(400, "BadRequest", "body needs \"spec\" or \"workflow\"");
    }
    auto q = compile_sql(workflow, body["table"].get<std::string>(), *dialect);
    OrderedJson out = OrderedJson::object();
    out["sql"] = q.text;
    out["dialect"] = to_string(q.dialect);
    out["output_fields"] = q.output_fields;
    return json_response(200, out);
}

auto Api::list_specs() -> ApiResponse {
    std::shared_lock lock(specs_mutex_);
    OrderedJson names = OrderedJson::array();
    for (const auto& [name, _] : specs_) {
        names.push_back(name);
    }
    return json_response(200, names);
}

auto Api::get_spec(const std::string& name) -> ApiResponse {
    std::shared_lock lock(specs_mutex_);
    auto it = specs_.find(name);
    if (it == specs_.end()) {
        return error_response(404, "UnknownSpec", "no spec named '" + name + "'");
    }
    return ApiResponse{200, "application/json", it->second};
}

auto Api::put_spec(const std::string& name, const ApiRequest& request) -> ApiResponse {
    if (!valid_spec_name(name)) {
        return error_response(400, "BadRequest", "spec names use letters, digits, '_', '-' and '.'");
    }
    auto text = serialize_spec(parse_spec(request.body));
    std::unique_lock lock(specs_mutex_);
    if (config_.spec_dir) {
        auto path = *config_.spec_dir / (name + ".json");
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << text;
            if (!out) {
                throw Error(ErrorCode::IoError, "cannot write spec file", tmp.string());
            }
        }
        std::filesystem::rename(tmp, path);
    }
    specs_[name] = text;
    return json_response(200, {{"name", name}});
}

auto Api::export_page(const ApiRequest& request) -> ApiResponse {
    std::vector<std::string> names;
    if (auto it = request.query.find("specs"); it != request.query.end()) {
        names = split_list(it->second);
    }
    std::vector<ExportTab> tabs;
    if (!names.empty()) {
        auto it = request.query.find("dataset");
        if (it == request.query.end()) {
            return error_response(400, "BadRequest", "export needs a dataset to render against");
        }
        auto entry = lookup(it->second);
        for (const auto& name : names) {
            std::string text;
            {
                std::shared_lock lock(specs_mutex_);
                auto found = specs_.find(name);
                if (found == specs_.end()) {
                    return error_response(404, "UnknownSpec", "no spec named '" + name + "'");
                }
                text = found->second;
            }
            auto spec = parse_spec(text);
            auto artifact = render(spec, *entry.dataset, entry.fields);
            tabs.push_back(ExportTab{spec.name, artifact.pivot, std::move(artifact.document)});
        }
    }
    return ApiResponse{200, "text/html; charset=utf-8", export_html(tabs)};
}

// ---------------------------------------------------------------- HTTP

struct HttpServer::Impl {
    Api& api;
    httplib::Server server;
    // A stop() that arrives before listening starts must not be lost.
    std::atomic<bool> serving{false};
    std::atomic<bool> stop_requested{false};

    explicit Impl(Api& a) : api(a) {}
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>(api)) {
    auto& server = impl_->server;
    // The library default sets SO_REUSEPORT, which lets a second process share
    // a busy port instead of failing.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    // Multipart framing adds a little on top of the file itself; the Api
    // applies the exact cap.
    server.set_payload_max_length(api.config().data_cap_bytes + (std::size_t{1} << 20U));

    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request;
        request.method = req.method;
        request.path = req.path;
        for (const auto& [k, v] : req.params) {
            request.query.emplace(k, v);
        }
        request.content_type = req.get_header_value("Content-Type");
        if (req.is_multipart_form_data()) {
            if (req.has_file("file")) {
                request.body = req.get_file_value("file").content;
            } else if (!req.files.empty()) {
                request.body = req.files.begin()->second.content;
            }
            request.content_type = "text/csv";
            if (req.has_file("file")) {
                const auto& ct = req.get_file_value("file").content_type;
                if (ct.find("json") != std::string::npos) {
                    request.content_type = ct;
                }
            }
        } else {
            request.body = req.body;
        }
        auto response = impl_->api.handle(request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    };
    const char* pattern = R"(/api/.*)";
    server.Get(pattern, forward);
    server.Post(pattern, forward);
    server.Put(pattern, forward);
    server.Options(pattern, forward);

    if (api.config().ui_dir) {
        server.set_mount_point("/", api.config().ui_dir->string());
    }
}

HttpServer::~HttpServer() = default;

auto HttpServer::bind(const std::string& host, int port) -> int {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    return bound;
}

void HttpServer::serve() {
    impl_->serving = true;
    if (impl_->stop_requested) {
        return;
    }
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->stop_requested = true;
    if (impl_->serving) {
        impl_->server.wait_until_ready();
        impl_->server.stop();
    }
}

}  // namespace walk
