#include <cctype>
#include <thread>

#include <httplib.h>

#include "hydro/api.hpp"
#include "hydro/error.hpp"

namespace hydro {

struct HttpServer::Impl {
    const ApiService& api;
    httplib::Server server;
    std::thread thread;

    explicit Impl(const ApiService& a) : api(a) {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            ApiRequest in;
            in.method = req.method;
            in.path = req.path;
            for (const auto& [k, v] : req.params) in.query.emplace(k, v);
            for (const auto& [k, v] : req.headers) {
                std::string key = k;
                for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                in.headers.emplace(std::move(key), v);
            }
            in.body = req.body;

            const auto out = api.handle(in);
            res.status = out.status;
            for (const auto& [k, v] : out.headers) res.set_header(k, v);
            if (!out.content_type.empty()) res.set_content(out.body, out.content_type);
        };
        server.Get(".*", dispatch);
        server.Post(".*", dispatch);
        server.Options(".*", dispatch);
        server.Put(".*", dispatch);
        server.Delete(".*", dispatch);
        server.Patch(".*", dispatch);
    }
};

HttpServer::HttpServer(const ApiService& api) : impl_(std::make_unique<Impl>(api)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error("BIND_FAILED", "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace hydro
