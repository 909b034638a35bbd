#include <cmath>
#include <map>
#include <set>

#include "captchastar/core.hpp"
#include "captchastar/rng.hpp"
#include "doctest.h"

using namespace captchastar;

TEST_SUITE("core") {

TEST_CASE("validate_params accepts the hardened defaults and fills tolerance") {
    GenParamsInput in;
    in.psi = 70.0;
    in.delta = 7.0;
    in.nsol = 1;
    const GenParams p = validate_params(in);
    CHECK(p.psi == 70.0);
    CHECK(p.delta == 7.0);
    CHECK(p.nsol == 1);
    CHECK(p.tolerance == 5.0);
    CHECK_FALSE(p.rotation);
    CHECK(p.solution_policy == SolutionPolicy::any_of);
    CHECK(p == GenParams{});
}

TEST_CASE("validate_params rejects a zero delta with a named field") {
    GenParamsInput in;
    in.delta = 0.0;
    try {
        validate_params(in);
        FAIL("expected ParamError");
    } catch (const ParamError& e) {
        CHECK(e.field() == "delta");
        CHECK(std::string(e.what()) == "delta must be positive");
    }
}

TEST_CASE("validate_params accepts heavy noise") {
    GenParamsInput in;
    in.psi = 250.0;
    in.delta = 5.0;
    const GenParams p = validate_params(in);
    CHECK(p.psi == 250.0);
    CHECK(p.delta == 5.0);
}

TEST_CASE("validate_params names each out-of-range field") {
    const auto field_of = [](GenParams p) -> std::string {
        try {
            validate_params(p);
        } catch (const ParamError& e) {
            return e.field();
        }
        return "";
    };
    GenParams p;
    p.psi = -1;
    CHECK(field_of(p) == "psi");
    p = {};
    p.psi = std::nan("");
    CHECK(field_of(p) == "psi");
    p = {};
    p.delta = -3;
    CHECK(field_of(p) == "delta");
    p = {};
    p.delta = INFINITY;
    CHECK(field_of(p) == "delta");
    p = {};
    p.nsol = 0;
    CHECK(field_of(p) == "nsol");
    p = {};
    p.pic_size = 15;
    CHECK(field_of(p) == "pic_size");
    p = {};
    p.pic_size = 291;
    CHECK(field_of(p) == "pic_size");
    p = {};
    p.tolerance = 0;
    CHECK(field_of(p) == "tolerance");
    p = {};
    p.pic_size = 16;
    CHECK(field_of(p).empty());
    p.pic_size = 290;
    CHECK(field_of(p).empty());
}

TEST_CASE("validate_params is idempotent") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        GenParamsInput in;
        in.psi = rng.uniform(0, 400);
        in.delta = rng.uniform(0.01, 50);
        in.nsol = static_cast<int>(rng.uniform_int(1, 4));
        in.pic_size = static_cast<int>(rng.uniform_int(16, 290));
        in.rotation = rng.below(2) == 1;
        in.tolerance = rng.uniform(0.01, 20);
        in.solution_policy = rng.below(2) ? SolutionPolicy::all_of : SolutionPolicy::any_of;
        const GenParams once = validate_params(in);
        CHECK(validate_params(once) == once);
    }
}

TEST_CASE("solution policy names roundtrip") {
    CHECK(parse_solution_policy("any-of") == SolutionPolicy::any_of);
    CHECK(parse_solution_policy("all-of") == SolutionPolicy::all_of);
    CHECK(parse_solution_policy(to_string(SolutionPolicy::all_of)) == SolutionPolicy::all_of);
    CHECK_THROWS_AS(parse_solution_policy("both"), ParamError);
}

TEST_CASE("euclidean_distance examples") {
    CHECK(euclidean_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(euclidean_distance({0, 0}, {3, 4}) == 5.0);
    CHECK(euclidean_distance({5, 295}, {295, 5}) == doctest::Approx(std::sqrt(2.0 * 290 * 290)).epsilon(1e-15));
    CHECK(euclidean_distance({5, 295}, {295, 5}) == doctest::Approx(410.1219).epsilon(1e-7));
}

TEST_CASE("euclidean_distance is a metric on random triples") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Point a{rng.uniform(-500, 500), rng.uniform(-500, 500)};
        const Point b{rng.uniform(-500, 500), rng.uniform(-500, 500)};
        const Point c{rng.uniform(-500, 500), rng.uniform(-500, 500)};
        CHECK(euclidean_distance(a, b) == euclidean_distance(b, a));
        CHECK(euclidean_distance(a, a) == 0.0);
        CHECK(euclidean_distance(a, b) > 0.0);
        CHECK(euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9);
    }
}

TEST_CASE("drawable space constants") {
    CHECK(DrawableSpace::side == 300);
    CHECK(DrawableSpace::solution_min == 5);
    CHECK(DrawableSpace::solution_max == 295);
}

TEST_CASE("splitmix64 reference outputs") {
    std::uint64_t state = 1234567;
    CHECK(splitmix64(state) == 6457827717110365317ULL);
    CHECK(splitmix64(state) == 3203168211198807973ULL);
    CHECK(splitmix64(state) == 9817491932198370423ULL);
    CHECK(splitmix64(state) == 4593380528125082431ULL);
    CHECK(splitmix64(state) == 16408922859458223821ULL);
}

TEST_CASE("Rng is deterministic per seed and differs across seeds") {
    Rng a(99), b(99), c(100);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        differs |= va != c.next_u64();
    }
    CHECK(differs);
    CHECK(a.seed() == 99);
}

TEST_CASE("Rng distributions stay in range") {
    Rng rng(3);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform(-2.5, 7.0);
        CHECK(v >= -2.5);
        CHECK(v < 7.0);
        const auto k = rng.uniform_int(5, 295);
        CHECK(k >= 5);
        CHECK(k <= 295);
        seen.insert(k);
        CHECK(rng.below(7) < 7);
    }
    // Both inclusive endpoints are reachable.
    CHECK(seen.size() == 291);
    CHECK(rng.uniform_int(4, 4) == 4);
}

TEST_CASE("Rng below is close to uniform") {
    Rng rng(17);
    std::map<std::uint64_t, int> counts;
    constexpr int n = 60000;
    for (int i = 0; i < n; ++i) {
        ++counts[rng.below(6)];
    }
    double chi2 = 0;
    for (const auto& [k, c] : counts) {
        const double e = n / 6.0;
        chi2 += (c - e) * (c - e) / e;
    }
    // 5 degrees of freedom, p = 0.001 critical value.
    CHECK(chi2 < 20.52);
}

TEST_CASE("derive_seed separates indices") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seeds.insert(derive_seed(42, i));
    }
    CHECK(seeds.size() == 1000);
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
    CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}

}  // TEST_SUITE
