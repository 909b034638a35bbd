#include <cstdlib>
#include <string>

#include "captchastar/heuristics.hpp"
#include "captchastar/simd/kernels.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace captchastar;

namespace {

simd::TrajectoryArrays random_arrays(Rng& rng, std::size_t n) {
    std::vector<StarTrajectory> stars;
    for (std::size_t i = 0; i < n; ++i) {
        stars.push_back(testing::random_star(rng));
    }
    return to_arrays(stars);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("active table is one of the known tables") {
    const simd::KernelTable& active = simd::active_kernels();
    const simd::KernelTable* avx2 = simd::avx2_kernels();
    CHECK((&active == &simd::scalar_kernels() || &active == avx2));
    const char* forced = std::getenv("CAPTCHASTAR_SIMD");
    if (forced && std::string(forced) == "scalar") {
        CHECK(&active == &simd::scalar_kernels());
    } else if (avx2) {
        CHECK(std::string(active.name) == "avx2");
    }
    CHECK(std::string(simd::scalar_kernels().name) == "scalar");
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const simd::KernelTable* avx2 = simd::avx2_kernels();
    if (!avx2) {
        MESSAGE("AVX2 table unavailable on this machine; equivalence not exercised");
        return;
    }
    const simd::KernelTable& ref = simd::scalar_kernels();
    Rng rng(2718);
    // Lengths around every vector-width remainder, plus larger clouds.
    std::vector<std::size_t> sizes;
    for (std::size_t n = 1; n <= 19; ++n) {
        sizes.push_back(n);
    }
    for (std::size_t n : {63, 64, 65, 255, 256, 257, 1000, 1311}) {
        sizes.push_back(n);
    }
    for (std::size_t n : sizes) {
        const auto t = random_arrays(rng, n);
        for (int c = 0; c < 5; ++c) {
            const double cx = rng.uniform(0, 300), cy = rng.uniform(0, 300);
            std::vector<double> xs(n), ys(n), xv(n), yv(n), s1(n), s2(n);
            ref.positions(t, cx, cy, xs.data(), ys.data());
            avx2->positions(t, cx, cy, xv.data(), yv.data());
            CAPTURE(n);
            CHECK(xs == xv);
            CHECK(ys == yv);
            CHECK(avx2->extent(xs.data(), ys.data(), n) == ref.extent(xs.data(), ys.data(), n));
            CHECK(avx2->pair_sum(xs.data(), ys.data(), n) ==
                  doctest::Approx(ref.pair_sum(xs.data(), ys.data(), n)).epsilon(1e-12));
            if (n >= 2) {
                CHECK(avx2->nearest_sum(xs.data(), ys.data(), n, s1.data()) ==
                      doctest::Approx(ref.nearest_sum(xs.data(), ys.data(), n, s2.data())).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("AVX2 kernels handle duplicates and extreme values") {
    const simd::KernelTable* avx2 = simd::avx2_kernels();
    if (!avx2) {
        return;
    }
    const simd::KernelTable& ref = simd::scalar_kernels();
    std::vector<double> xs{1e9, -1e9, 0, 0, 0, 5, 5, 5, 5, 1e-300, -0.0};
    std::vector<double> ys{0, 0, 0, 0, 0, 5, 5, 5, 5, 1e-300, 0.0};
    std::vector<double> s(xs.size());
    CHECK(avx2->extent(xs.data(), ys.data(), xs.size()) == ref.extent(xs.data(), ys.data(), xs.size()));
    CHECK(avx2->nearest_sum(xs.data(), ys.data(), xs.size(), s.data()) ==
          doctest::Approx(ref.nearest_sum(xs.data(), ys.data(), xs.size(), s.data())));
    CHECK(avx2->pair_sum(xs.data(), ys.data(), xs.size()) ==
          doctest::Approx(ref.pair_sum(xs.data(), ys.data(), xs.size())));
}

TEST_CASE("solver results do not depend on the kernel table") {
    const simd::KernelTable* avx2 = simd::avx2_kernels();
    if (!avx2) {
        return;
    }
    Rng rng(5);
    const Challenge ch = generate_challenge(testing::small_params(70, 7, 80), testing::small_pool(), rng);
    const SearchGrid grid = square_grid(5, 294, 9);
    for (Heuristic h : {Heuristic::min_size, Heuristic::min_distribution, Heuristic::min_sum_dist,
                        Heuristic::all_sum_dist}) {
        SolveOptions a, b;
        a.kernels = &simd::scalar_kernels();
        b.kernels = avx2;
        a.accelerate = b.accelerate = false;
        const auto ra = solve(client_view(ch), h, grid, a);
        const auto rb = solve(client_view(ch), h, grid, b);
        CAPTURE(to_string(h));
        CHECK(ra.best_cursor == rb.best_cursor);
        CHECK(ra.best_score == doctest::Approx(rb.best_score).epsilon(1e-12));
    }
}

}  // TEST_SUITE
