#include <filesystem>
#include <fstream>
#include <map>

#include "captchastar/service/config.hpp"
#include "doctest.h"

using namespace captchastar;
using namespace captchastar::service;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) {
            return std::nullopt;
        }
        return it->second;
    };
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
    const ServiceConfig c;
    CHECK(c.port == 8080);
    CHECK(c.ttl_seconds == 300);
    CHECK(c.encoding == wire::Encoding::json);
    CHECK(c.defaults.psi == 70);
    CHECK(c.defaults.delta == 7);
    CHECK(c.defaults.pic_size == 210);
    CHECK_NOTHROW(check_config(c));
}

TEST_CASE("parsing every key") {
    const ServiceConfig c = parse_config(R"({
        "pool_dir": "/pics", "host": "127.0.0.1", "port": 9000, "ttl_seconds": 60,
        "encoding": "binary", "static_dir": "/www", "rate_limit_per_minute": 30,
        "prebuffer": 4, "seed": 99,
        "defaults": {"psi": 50, "delta": 9.5, "nsol": 2, "pic_size": 150, "rotation": true,
                     "tolerance": 6, "solution_policy": "all-of"},
        "overrides": {"allow": false, "max_nsol": 3, "max_psi": 200, "max_delta": 20}
    })");
    CHECK(c.pool_dir == "/pics");
    CHECK(c.host == "127.0.0.1");
    CHECK(c.port == 9000);
    CHECK(c.ttl_seconds == 60);
    CHECK(c.encoding == wire::Encoding::binary);
    CHECK(c.static_dir == "/www");
    CHECK(c.rate_limit_per_minute == 30);
    CHECK(c.prebuffer == 4);
    REQUIRE(c.seed.has_value());
    CHECK(*c.seed == 99);
    CHECK(c.defaults.psi == 50);
    CHECK(c.defaults.delta == 9.5);
    CHECK(c.defaults.nsol == 2);
    CHECK(c.defaults.pic_size == 150);
    CHECK(c.defaults.rotation);
    CHECK(c.defaults.tolerance == 6);
    CHECK(c.defaults.solution_policy == SolutionPolicy::all_of);
    CHECK_FALSE(c.overrides.allow);
    CHECK(c.overrides.max_nsol == 3);
    CHECK(c.overrides.max_psi == 200);
    CHECK(c.overrides.max_delta == 20);
}

TEST_CASE("partial configs keep the base") {
    ServiceConfig base;
    base.port = 1234;
    const ServiceConfig c = parse_config(R"({"defaults": {"psi": 10}})", base);
    CHECK(c.port == 1234);
    CHECK(c.defaults.psi == 10);
    CHECK(c.defaults.delta == 7);
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"colour": "red"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"defaults": {"speed": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"overrides": {"max_size": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"port": "80"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"defaults": 5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"encoding": "xml"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"defaults": {"solution_policy": "some_of"}})"), ConfigError);
}

TEST_CASE("environment overrides") {
    const ServiceConfig c = apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_PORT", "9100"},
                                                                {"CAPTCHASTAR_PSI", "12.5"},
                                                                {"CAPTCHASTAR_ROTATION", "yes"},
                                                                {"CAPTCHASTAR_POLICY", "all-of"},
                                                                {"CAPTCHASTAR_ENCODING", "binary"},
                                                                {"CAPTCHASTAR_PREBUFFER", "3"},
                                                                {"CAPTCHASTAR_POOL_DIR", "/p"}}));
    CHECK(c.port == 9100);
    CHECK(c.defaults.psi == 12.5);
    CHECK(c.defaults.rotation);
    CHECK(c.defaults.solution_policy == SolutionPolicy::all_of);
    CHECK(c.encoding == wire::Encoding::binary);
    CHECK(c.prebuffer == 3);
    CHECK(c.pool_dir == "/p");
    CHECK(c.ttl_seconds == 300);

    CHECK_THROWS_AS(apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_PORT", "80x"}})), ConfigError);
    CHECK_THROWS_AS(apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_PSI", "lots"}})), ConfigError);
    CHECK_THROWS_AS(apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_ROTATION", "maybe"}})), ConfigError);
    CHECK_THROWS_AS(apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_PREBUFFER", "-1"}})), ConfigError);
    CHECK_THROWS_AS(apply_env(ServiceConfig{}, env_of({{"CAPTCHASTAR_ENCODING", "xml"}})), ConfigError);
}

TEST_CASE("range checks") {
    ServiceConfig c;
    c.port = 70000;
    CHECK_THROWS_AS(check_config(c), ConfigError);
    c = {};
    c.ttl_seconds = 0;
    CHECK_THROWS_AS(check_config(c), ConfigError);
    c = {};
    c.rate_limit_per_minute = -1;
    CHECK_THROWS_AS(check_config(c), ConfigError);
    c = {};
    c.defaults.delta = -2;
    CHECK_THROWS_AS(check_config(c), ConfigError);
    c = {};
    c.defaults.nsol = 0;
    CHECK_THROWS_AS(check_config(c), ConfigError);
}

TEST_CASE("config files") {
    const auto path = std::filesystem::temp_directory_path() / "captchastar_config_test.json";
    {
        std::ofstream os(path);
        os << R"({"port": 8181, "defaults": {"delta": 5}})";
    }
    const ServiceConfig c = load_config_file(path);
    CHECK(c.port == 8181);
    CHECK(c.defaults.delta == 5);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config_file(path), ConfigError);
}

}  // TEST_SUITE
