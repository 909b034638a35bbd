#include "captchastar/service/http_server.hpp"

#include <filesystem>
#include <stdexcept>

#include "httplib.h"

namespace captchastar::service {

namespace {

void send(httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_header("Cache-Control", "no-store");
    res.set_content(reply.body, reply.content_type);
}

}  // namespace

HttpServer::HttpServer(CaptchaService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    server_->Post("/api/challenge", [this](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.create(req.body, req.remote_addr));
    });
    server_->Get("/api/verify", [this](const httplib::Request& req, httplib::Response& res) {
        QueryParams q(req.params.begin(), req.params.end());
        send(res, service_.verify(q));
    });
    const auto& dir = service_.config().static_dir;
    if (!dir.empty()) {
        if (!std::filesystem::is_directory(dir) || !server_->set_mount_point("/", dir.string())) {
            throw std::runtime_error("static directory " + dir.string() + " cannot be served");
        }
    } else {
        server_->Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.status = 404;
            res.set_content(R"({"error":"no static client configured"})", "application/json");
        });
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host.c_str()) : (server_->bind_to_port(host.c_str(), port) ? port : -1);
    if (bound < 0) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    return bound;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_ && server_->is_running()) {
        server_->stop();
    }
}

bool HttpServer::running() const { return server_->is_running(); }

}  // namespace captchastar::service
