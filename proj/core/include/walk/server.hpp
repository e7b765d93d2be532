#pragma once

#include <walk/pipeline.hpp>
#include <walk/table_store.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace walk {

struct ServerConfig {
    std::size_t data_cap_bytes = std::size_t{256} << 20U;
    std::size_t row_cap = 5'000'000;
    std::optional<std::filesystem::path> spec_dir;  // saved specs persist here when set
    std::optional<std::filesystem::path> ui_dir;    // static files served under /
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string content_type;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Every /api route, independent of the socket layer. Handlers may run
/// concurrently.
class Api {
public:
    explicit Api(ServerConfig config = {});

    auto handle(const ApiRequest& request) -> ApiResponse;

    auto add_dataset(Dataset dataset, std::string name) -> DatasetRegistry::Entry;
    [[nodiscard]] auto config() const -> const ServerConfig& { return config_; }

private:
    auto post_dataset(const ApiRequest& request) -> ApiResponse;
    auto list_datasets() -> ApiResponse;
    auto get_dataset(const std::string& id) -> ApiResponse;
    auto query(const std::string& id, const ApiRequest& request) -> ApiResponse;
    auto render_spec(const std::string& id, const ApiRequest& request) -> ApiResponse;
    auto compile(const ApiRequest& request) -> ApiResponse;
    auto get_spec(const std::string& name) -> ApiResponse;
    auto put_spec(const std::string& name, const ApiRequest& request) -> ApiResponse;
    auto list_specs() -> ApiResponse;
    auto export_page(const ApiRequest& request) -> ApiResponse;

    auto lookup(const std::string& id) -> DatasetRegistry::Entry;
    void load_saved_specs();

    ServerConfig config_;
    DatasetRegistry registry_;
    mutable std::shared_mutex specs_mutex_;
    std::map<std::string, std::string> specs_;  // name -> canonical JSON text
};

/// HTTP front end over an Api, with CORS headers on every response.
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    auto operator=(const HttpServer&) -> HttpServer& = delete;

    // Binds without serving yet. Port 0 picks a free port; returns the bound
    // port. Throws Error(IoError) when the port is unavailable.
    auto bind(const std::string& host, int port) -> int;
    void serve();  // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace walk
