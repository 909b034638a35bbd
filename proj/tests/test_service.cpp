#include <map>
#include <set>
#include <thread>

#include "captchastar/heuristics.hpp"
#include "captchastar/service/service.hpp"
#include "captchastar/wire.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace captchastar;
using namespace captchastar::service;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

ServiceConfig test_config() {
    ServiceConfig c;
    c.defaults = testing::small_params();
    c.seed = 5;
    return c;
}

/// Service plus a copy of every issued challenge, solution included.
struct Harness {
    explicit Harness(ServiceConfig c = test_config()) : service(std::move(c), testing::shared_small_pool()) {
        service.set_issue_observer([this](const Challenge& ch) { issued[ch.id] = ch; });
    }

    std::string create_id(std::string_view body = "") {
        const HttpReply r = service.create(body);
        REQUIRE(r.status == 200);
        return json::parse(r.body).at("id").get<std::string>();
    }

    CaptchaService service;
    std::map<std::string, Challenge> issued;
};

QueryParams answer(const std::string& id, Point p) {
    return {{"id", id}, {"x", std::to_string(static_cast<int>(p.x))}, {"y", std::to_string(static_cast<int>(p.y))}};
}

Point miss(const Challenge& ch, double dx) {
    // A point on the disc boundary's outside, clamped into the space.
    for (const double sign : {1.0, -1.0}) {
        const Point p{ch.solutions[0].x + sign * dx, ch.solutions[0].y};
        if (p.x >= 0 && p.x <= 300 && !within_tolerance(p, ch)) {
            return p;
        }
    }
    const Point p{ch.solutions[0].x, ch.solutions[0].y + (ch.solutions[0].y < 150 ? dx : -dx)};
    return p;
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("create then verify the solution") {
    Harness h;
    const HttpReply r = h.service.create("");
    REQUIRE(r.status == 200);
    CHECK(r.content_type == "application/json");
    const json j = json::parse(r.body);
    const std::string id = j.at("id");
    REQUIRE(h.issued.count(id) == 1);
    const HttpReply v = h.service.verify(answer(id, h.issued[id].solutions[0]));
    CHECK(v.status == 200);
    CHECK(json::parse(v.body) == json{{"result", "pass"}, {"remaining", 0}});
    const HttpReply again = h.service.verify(answer(id, h.issued[id].solutions[0]));
    CHECK(again.status == 410);
}

TEST_CASE("json challenge schema carries nothing but stars") {
    Harness h;
    const json j = json::parse(h.service.create("").body);
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.insert(k);
    }
    CHECK(keys == std::set<std::string>{"id", "encoding", "stars"});
    CHECK(j.at("encoding") == "json");
    for (const auto& star : j.at("stars")) {
        CHECK(star.size() == 6);
    }
    const ClientChallenge c = wire::decode_json(j.dump());
    CHECK(c.stars.size() == h.issued.at(c.id).stars.size());
}

TEST_CASE("binary encoding on request") {
    Harness h;
    const json j = json::parse(h.service.create(R"({"encoding":"binary"})").body);
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.insert(k);
    }
    CHECK(keys == std::set<std::string>{"id", "encoding", "stars_b64"});
    const auto bytes = wire::base64_decode(j.at("stars_b64").get<std::string>());
    const ClientChallenge c = wire::decode_binary(bytes);
    CHECK(c.id == j.at("id"));
    CHECK(bytes.size() == wire::kHeaderSize + 24 * c.stars.size());
    CHECK(c.stars.size() == h.issued.at(c.id).stars.size());
}

TEST_CASE("ids are distinct") {
    Harness h;
    std::set<std::string> ids;
    for (int i = 0; i < 50; ++i) {
        ids.insert(h.create_id());
    }
    CHECK(ids.size() == 50);
}

TEST_CASE("malformed verify requests") {
    Harness h;
    const std::string id = h.create_id();
    CHECK(h.service.verify({{"id", id}, {"x", "9999"}, {"y", "10"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", "-1"}, {"y", "10"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", "10"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", "1"}, {"x", "2"}, {"y", "3"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", "1.5"}, {"y", "3"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", "abc"}, {"y", "3"}}).status == 400);
    CHECK(h.service.verify({{"id", id}, {"x", ""}, {"y", "3"}}).status == 400);
    // None of the above consumed the challenge.
    CHECK(h.service.store().status(id) == ChallengeStatus::active);
    CHECK(h.service.verify({{"id", "ffff"}, {"x", "1"}, {"y", "3"}}).status == 410);
}

TEST_CASE("wrong answers reveal nothing about the distance") {
    Harness h;
    for (int round = 0; round < 5; ++round) {
        const std::string a = h.create_id();
        const std::string b = h.create_id();
        const HttpReply near = h.service.verify(answer(a, miss(h.issued[a], 6)));
        const HttpReply far = h.service.verify(answer(b, miss(h.issued[b], 120)));
        CHECK(near.status == 200);
        CHECK(near.status == far.status);
        CHECK(near.content_type == far.content_type);
        CHECK(near.body == far.body);
        CHECK(json::parse(near.body).at("result") == "fail");
    }
}

TEST_CASE("no solution data in any response") {
    Harness h;
    std::set<std::string> bodies;
    for (int i = 0; i < 100; ++i) {
        const bool binary = i % 2 == 1;
        const HttpReply r = h.service.create(binary ? R"({"encoding":"binary"})" : "");
        REQUIRE(r.status == 200);
        const json j = json::parse(r.body);
        const Challenge& ch = h.issued.at(j.at("id").get<std::string>());
        for (const std::string key : {"sol", "solution", "solutions", "anchor", "shape", "noise", "delta", "psi"}) {
            CHECK(r.body.find("\"" + key) == std::string::npos);
        }
        const ClientChallenge c = binary ? wire::decode_binary(wire::base64_decode(j.at("stars_b64").get<std::string>()))
                                         : wire::decode_json(r.body);
        CHECK(c.stars.size() == ch.stars.size());
        const HttpReply v = h.service.verify(answer(c.id, miss(ch, 40)));
        bodies.insert(v.body);
    }
    // Every wrong answer gets the very same reply.
    CHECK(bodies.size() == 1);
}

TEST_CASE("all-of sequences through the endpoint") {
    ServiceConfig cfg = test_config();
    cfg.defaults.nsol = 2;
    cfg.defaults.solution_policy = SolutionPolicy::all_of;
    Harness h(cfg);
    for (int attempt = 0; attempt < 20; ++attempt) {
        const std::string id = h.create_id();
        const Challenge& ch = h.issued[id];
        if (euclidean_distance(ch.solutions[0], ch.solutions[1]) <= 2 * ch.params.tolerance) {
            continue;
        }
        const HttpReply first = h.service.verify(answer(id, ch.solutions[0]));
        CHECK(json::parse(first.body) == json{{"result", "pass"}, {"remaining", 1}});
        const HttpReply second = h.service.verify(answer(id, ch.solutions[1]));
        CHECK(json::parse(second.body) == json{{"result", "pass"}, {"remaining", 0}});
        CHECK(h.service.verify(answer(id, ch.solutions[1])).status == 410);
        return;
    }
    FAIL("no challenge with separated solutions");
}

TEST_CASE("parameter overrides") {
    Harness h;
    const std::string id = h.create_id(R"({"psi": 0, "delta": 5, "nsol": 2})");
    CHECK(h.issued[id].params.psi == 0);
    CHECK(h.issued[id].params.delta == 5);
    CHECK(h.issued[id].solutions.size() == 2);
    CHECK(h.issued[id].params.pic_size == 60);
    CHECK(h.service.create(R"({"nsol": 9})").status == 400);
    CHECK(h.service.create(R"({"psi": 1000})").status == 400);
    CHECK(h.service.create(R"({"delta": 99})").status == 400);
    CHECK(h.service.create(R"({"delta": -1})").status == 400);
    CHECK(h.service.create(R"({"nsol": 1.5})").status == 400);
    CHECK(h.service.create(R"({"psi": "high"})").status == 400);
    CHECK(h.service.create(R"({"colour": 1})").status == 400);
    CHECK(h.service.create(R"({"encoding": "xml"})").status == 400);
    CHECK(h.service.create("{not json").status == 400);
    CHECK(h.service.create("[]").status == 400);

    ServiceConfig locked = test_config();
    locked.overrides.allow = false;
    Harness l(locked);
    CHECK(l.service.create(R"({"psi": 10})").status == 400);
    CHECK(l.service.create(R"({"encoding": "binary"})").status == 200);
}

TEST_CASE("rate limiting per client") {
    ServiceConfig cfg = test_config();
    cfg.rate_limit_per_minute = 3;
    Harness h(cfg);
    const auto t = CaptchaService::Clock::now();
    for (int i = 0; i < 3; ++i) {
        CHECK(h.service.create("", "alice", t + std::chrono::seconds(i)).status == 200);
    }
    CHECK(h.service.create("", "alice", t + 10s).status == 429);
    CHECK(h.service.create("", "bob", t + 10s).status == 200);
    CHECK(h.service.create("", "alice", t + 61s).status == 200);
}

TEST_CASE("expired challenges answer 410") {
    ServiceConfig cfg = test_config();
    cfg.ttl_seconds = 30;
    Harness h(cfg);
    const auto t = CaptchaService::Clock::now();
    const HttpReply r = h.service.create("", "", t);
    const std::string id = json::parse(r.body).at("id");
    CHECK(h.service.sweep(t + 29s) == 0);
    CHECK(h.service.sweep(t + 31s) == 1);
    CHECK(h.service.verify(answer(id, h.issued[id].solutions[0]), t + 31s).status == 410);
}

TEST_CASE("an empty pool answers 503") {
    CaptchaService s(test_config(), std::make_shared<MemoryPool>());
    CHECK(s.create("").status == 503);
}

TEST_CASE("construction checks") {
    CHECK_THROWS(CaptchaService(test_config(), nullptr));
    ServiceConfig bad = test_config();
    bad.ttl_seconds = 0;
    CHECK_THROWS_AS(CaptchaService(bad, testing::shared_small_pool()), ConfigError);
}

TEST_CASE("pre-generated challenges are served and refilled") {
    ServiceConfig cfg = test_config();
    cfg.prebuffer = 3;
    Harness h(cfg);
    h.service.start_background();
    for (int i = 0; i < 200 && h.service.buffered() < 3; ++i) {
        std::this_thread::sleep_for(10ms);
    }
    CHECK(h.service.buffered() == 3);
    const std::string id = h.create_id();
    CHECK(h.service.verify(answer(id, h.issued[id].solutions[0])).status == 200);
    for (int i = 0; i < 200 && h.service.buffered() < 3; ++i) {
        std::this_thread::sleep_for(10ms);
    }
    CHECK(h.service.buffered() == 3);
    // Overridden requests bypass the buffer.
    h.create_id(R"({"psi": 0})");
    h.service.stop();
    CHECK(h.service.buffered() == 3);
}

}  // TEST_SUITE
