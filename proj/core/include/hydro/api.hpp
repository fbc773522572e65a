#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydro/ingest.hpp"
#include "hydro/standards.hpp"
#include "hydro/store.hpp"
#include "hydro/time.hpp"

namespace hydro {

struct ApiRequest {
    std::string method = "GET";
    std::string path;                           // decoded, without query string
    std::map<std::string, std::string> query;   // decoded
    std::map<std::string, std::string> headers; // keys lower-case
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct ApiConfig {
    /// Bearer token required on write endpoints. Empty disables uploads.
    std::string upload_token;
    std::size_t default_max_points = 500;
};

/// HTTP status for a domain reason code (400, 401, 404, 409 or 500).
int status_for(std::string_view code);

/// `{"status", "code", "message", "detail"}` error body.
ApiResponse error_response(int status, std::string_view code, std::string_view message,
                           nlohmann::json detail = nullptr);

// Response documents shared by the API and the CLI so both emit identical bytes.
nlohmann::json assessment_document(const Store& store, const Standards& standards, std::string_view location_id,
                                   const std::optional<std::string>& purpose);
nlohmann::json standards_document(const Standards& standards, const std::optional<std::string>& purpose);

/// The public API as a transport-independent router. `handle` never throws:
/// every failure becomes an ApiError body with a status from `status_for`.
class ApiService {
public:
    ApiService(Store& store, const StandardsHandle& standards, ApiConfig config,
               std::function<Instant()> clock = &Instant::now);

    ApiResponse handle(const ApiRequest& request) const;

private:
    ApiResponse route(const ApiRequest& request) const;
    ApiResponse location_route(const ApiRequest& request, std::string_view id, std::string_view leaf) const;
    ApiResponse upload(const ApiRequest& request, bool csv) const;
    bool authorized(const ApiRequest& request) const;

    Store& store_;
    const StandardsHandle& standards_;
    ApiConfig config_;
    std::function<Instant()> clock_;
};

/// cpp-httplib binding for ApiService. Serves on a pool of worker threads.
class HttpServer {
public:
    explicit HttpServer(const ApiService& api);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds `host:port` (port 0 picks a free port) and returns the bound port.
    /// Throws Error(BIND_FAILED).
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocks the caller.
    void serve();
    /// Serves on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hydro
