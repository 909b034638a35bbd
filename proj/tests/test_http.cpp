#include <filesystem>
#include <fstream>
#include <thread>

#include "captchastar/service/http_server.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

using namespace captchastar;
using namespace captchastar::service;
using nlohmann::json;

namespace {

ServiceConfig http_config() {
    ServiceConfig c;
    c.defaults = testing::small_params();
    c.seed = 11;
    return c;
}

/// Serves on a loopback port from a background thread for one test.
struct RunningServer {
    explicit RunningServer(ServiceConfig cfg) : service(std::move(cfg), testing::shared_small_pool()), http(service) {
        service.set_issue_observer([this](const Challenge& ch) { issued[ch.id] = ch; });
        port = http.bind("127.0.0.1", 0);
        thread = std::thread([this] { http.run(); });
        for (int i = 0; i < 500 && !http.running(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }
    ~RunningServer() {
        http.stop();
        thread.join();
    }

    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }

    CaptchaService service;
    HttpServer http;
    std::map<std::string, Challenge> issued;
    int port = 0;
    std::thread thread;
};

std::string verify_path(const std::string& id, Point p) {
    return "/api/verify?id=" + id + "&x=" + std::to_string(static_cast<int>(p.x)) +
           "&y=" + std::to_string(static_cast<int>(p.y));
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("challenge and verify over HTTP") {
    RunningServer s(http_config());
    REQUIRE(s.http.running());
    auto cli = s.client();
    const auto created = cli.Post("/api/challenge", "", "application/json");
    REQUIRE(created);
    CHECK(created->status == 200);
    CHECK(created->get_header_value("Cache-Control") == "no-store");
    CHECK(created->get_header_value("Content-Type").find("application/json") == 0);
    const json j = json::parse(created->body);
    const std::string id = j.at("id");
    REQUIRE(s.issued.count(id) == 1);

    const auto pass = cli.Get(verify_path(id, s.issued[id].solutions[0]).c_str());
    REQUIRE(pass);
    CHECK(pass->status == 200);
    CHECK(json::parse(pass->body).at("result") == "pass");
    CHECK(pass->get_header_value("Cache-Control") == "no-store");

    const auto reused = cli.Get(verify_path(id, s.issued[id].solutions[0]).c_str());
    REQUIRE(reused);
    CHECK(reused->status == 410);

    const auto bad = cli.Get(("/api/verify?id=" + id + "&x=9999&y=1").c_str());
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).contains("error"));
}

TEST_CASE("binary request body over HTTP") {
    RunningServer s(http_config());
    auto cli = s.client();
    const auto r = cli.Post("/api/challenge", R"({"encoding":"binary"})", "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body).contains("stars_b64"));
    const auto junk = cli.Post("/api/challenge", "{oops", "application/json");
    REQUIRE(junk);
    CHECK(junk->status == 400);
}

TEST_CASE("root without a static client") {
    RunningServer s(http_config());
    auto cli = s.client();
    const auto r = cli.Get("/");
    REQUIRE(r);
    CHECK(r->status == 404);
}

TEST_CASE("static client directory") {
    const auto dir = std::filesystem::temp_directory_path() / "captchastar_static_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "index.html");
        os << "<html>client</html>";
    }
    {
        ServiceConfig c = http_config();
        c.static_dir = dir;
        RunningServer s(c);
        auto cli = s.client();
        const auto r = cli.Get("/index.html");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(r->body == "<html>client</html>");
        const auto api = cli.Post("/api/challenge", "", "application/json");
        REQUIRE(api);
        CHECK(api->status == 200);
    }
    std::filesystem::remove_all(dir);

    ServiceConfig missing = http_config();
    missing.static_dir = dir;
    CaptchaService svc(missing, testing::shared_small_pool());
    CHECK_THROWS(HttpServer(svc));
}

TEST_CASE("stop ends run") {
    ServiceConfig c = http_config();
    CaptchaService svc(c, testing::shared_small_pool());
    HttpServer http(svc);
    http.bind("127.0.0.1", 0);
    std::thread t([&] { http.run(); });
    for (int i = 0; i < 500 && !http.running(); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    CHECK(http.running());
    http.stop();
    t.join();
    CHECK_FALSE(http.running());
}

}  // TEST_SUITE
