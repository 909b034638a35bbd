#pragma once

#include <memory>
#include <string>

#include "captchastar/service/service.hpp"

namespace httplib {
class Server;
}

namespace captchastar::service {

/// HTTP front end: POST /api/challenge, GET /api/verify and the static
/// client bundle under GET /.
class HttpServer {
public:
    explicit HttpServer(CaptchaService& service);
    ~HttpServer();

    /// Binds and returns the port; port 0 picks a free one. Throws on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void stop();
    bool running() const;

private:
    CaptchaService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace captchastar::service
