#include "captchastar/ml/attack.hpp"

#include <limits>
#include <stdexcept>

#include "captchastar/kinematics.hpp"
#include "captchastar/parallel.hpp"

namespace captchastar::ml {

std::vector<Point> lambda_grid(int lambda) {
    if (lambda < 1 || lambda > DrawableSpace::side) {
        throw std::invalid_argument("lambda must lie in [1, 300]");
    }
    const int steps = DrawableSpace::side / lambda;
    std::vector<Point> grid;
    grid.reserve(static_cast<std::size_t>(steps + 1) * (steps + 1));
    for (int j = 0; j <= steps; ++j) {
        for (int i = 0; i <= steps; ++i) {
            grid.push_back({static_cast<double>(lambda * i), static_cast<double>(lambda * j)});
        }
    }
    return grid;
}

namespace {

struct Best {
    double score = -std::numeric_limits<double>::infinity();
    Point cursor;
    bool have = false;

    void offer(double s, Point c) {
        const bool lex_smaller = c.x < cursor.x || (c.x == cursor.x && c.y < cursor.y);
        if (!have || s > score || (s == score && lex_smaller)) {
            score = s;
            cursor = c;
            have = true;
        }
    }
};

}  // namespace

MlResult ml_solve(const ClientChallenge& challenge, const StateScorer& scorer, const ReferenceTiles& refs,
                  const MlSolveOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Point> grid = lambda_grid(options.lambda);
    const simd::TrajectoryArrays arrays = to_arrays(challenge.stars);
    const simd::KernelTable& k = simd::active_kernels();
    const std::size_t n = challenge.stars.size();

    const unsigned workers = worker_count(options.threads);
    std::vector<Best> best(workers);
    parallel_chunks(grid.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
        std::vector<double> xs(n), ys(n);
        PixelMatrix matrix;
        Best local;
        for (std::size_t i = begin; i < end; ++i) {
            const Point c = grid[i];
            k.positions(arrays, c.x, c.y, xs.data(), ys.data());
            render_positions(xs, ys, matrix, options.star_side);
            local.offer(scorer(c, feature_vector(matrix, refs)), c);
        }
        best[w] = local;
    });
    Best total;
    for (const Best& b : best) {
        if (b.have) {
            total.offer(b.score, b.cursor);
        }
    }
    MlResult r;
    r.cursor = total.cursor;
    r.score = total.score;
    r.states_evaluated = grid.size();
    r.wall_time = std::chrono::steady_clock::now() - start;
    return r;
}

MlResult ml_solve(const ClientChallenge& challenge, const Classifier& model, const ReferenceTiles& refs,
                  const MlSolveOptions& options) {
    return ml_solve(
        challenge, [&model](Point, const FeatureVector& f) { return model.predict(f); }, refs, options);
}

}  // namespace captchastar::ml
