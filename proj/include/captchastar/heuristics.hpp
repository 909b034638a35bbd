#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "captchastar/generator.hpp"
#include "captchastar/kinematics.hpp"

namespace captchastar {

/// Cursor positions visited by the exhaustive solver.
struct SearchGrid {
    std::vector<Point> positions;
    std::string description;
};

/// Integer cursors 5..294 on both axes, x varying fastest: 290^2 states.
SearchGrid default_grid();

/// Integer cursors lo..hi (inclusive) in steps of `step`, x fastest.
SearchGrid square_grid(int lo, int hi, int step = 1);

SearchGrid single_position_grid(Point p);

enum class Heuristic { min_size, min_distribution, min_sum_dist, all_sum_dist };

std::string_view to_string(Heuristic h);
std::optional<Heuristic> parse_heuristic(std::string_view name);

double score_min_size(const State& state);
double score_min_distribution(const PixelMatrix& matrix);
double score_min_sum_dist(const State& state);
double score_all_sum_dist(const State& state);

struct HeuristicResult {
    Point best_cursor;
    double best_score = 0.0;
    std::size_t states_evaluated = 0;
    std::chrono::duration<double> wall_time{};
};

struct SolveOptions {
    unsigned threads = 0;  ///< 0: hardware concurrency
    int star_side = kStarSide;
    /// Score pairwise heuristics on a random subset of this many stars.
    /// Development aid only; exhaustive runs leave it unset.
    std::optional<std::size_t> sample;
    std::uint64_t sample_seed = 0;
    const simd::KernelTable* kernels = nullptr;  ///< defaults to active_kernels()
    /// Exact shortcuts that return the same argmin as the plain scan:
    /// bucketed nearest neighbours for MinSumDist and a convexity-bounded
    /// branch and bound for AllSumDist. Off means every state is scored by
    /// the kernel table.
    bool accelerate = true;
};

/// Score every grid position and return the minimum, ties broken by the
/// lexicographically smallest (x, y).
HeuristicResult solve(const ClientChallenge& challenge, Heuristic heuristic, const SearchGrid& grid,
                      const SolveOptions& options = {});

/// Scratch buffers for nearest_sum_bucketed.
struct BucketScratch {
    std::vector<std::uint32_t> start;
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> cell;
    std::vector<std::uint32_t> fill;
    std::vector<double> sx, sy, best;
};

/// Same value as the scalar kernel's nearest_sum, computed with a uniform
/// grid of buckets instead of all pairs. Requires n >= 2.
double nearest_sum_bucketed(const double* xs, const double* ys, std::size_t n, BucketScratch& scratch);

/// AllSumDist and its gradient with respect to the cursor, for the pruned
/// search. Pairs at zero distance contribute a zero subgradient.
struct ScoreWithGradient {
    double value = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};
ScoreWithGradient all_sum_dist_gradient(const simd::TrajectoryArrays& t, Point cursor);

/// True when `answer` lies strictly within tolerance of some solution.
bool within_tolerance(Point answer, const Challenge& challenge);

}  // namespace captchastar
