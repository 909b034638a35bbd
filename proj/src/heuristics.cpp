#include "captchastar/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "captchastar/parallel.hpp"
#include "captchastar/rng.hpp"

namespace captchastar {

SearchGrid square_grid(int lo, int hi, int step) {
    if (step < 1 || hi < lo) {
        throw std::invalid_argument("grid requires step >= 1 and lo <= hi");
    }
    SearchGrid g;
    for (int y = lo; y <= hi; y += step) {
        for (int x = lo; x <= hi; x += step) {
            g.positions.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
    }
    g.description = "[" + std::to_string(lo) + "," + std::to_string(hi) + "]^2 step " + std::to_string(step);
    return g;
}

SearchGrid default_grid() { return square_grid(5, 294, 1); }

SearchGrid single_position_grid(Point p) { return {{p}, "single"}; }

std::string_view to_string(Heuristic h) {
    switch (h) {
        case Heuristic::min_size: return "minsize";
        case Heuristic::min_distribution: return "mindistribution";
        case Heuristic::min_sum_dist: return "minsumdist";
        case Heuristic::all_sum_dist: return "allsumdist";
    }
    return "unknown";
}

std::optional<Heuristic> parse_heuristic(std::string_view name) {
    for (Heuristic h : {Heuristic::min_size, Heuristic::min_distribution, Heuristic::min_sum_dist,
                        Heuristic::all_sum_dist}) {
        if (name == to_string(h)) {
            return h;
        }
    }
    return std::nullopt;
}

namespace {

void split(const State& state, std::vector<double>& xs, std::vector<double>& ys) {
    xs.clear();
    ys.clear();
    for (const Point& p : state.positions) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
}

constexpr int kDistributionTile = 25;

double distribution_score(const PixelMatrix& m) {
    constexpr int tiles = PixelMatrix::side / kDistributionTile;
    constexpr int full = kDistributionTile * kDistributionTile;
    double total = 0.0;
    for (int ty = 0; ty < tiles; ++ty) {
        for (int tx = 0; tx < tiles; ++tx) {
            const int white = m.count_white(tx * kDistributionTile, ty * kDistributionTile, kDistributionTile,
                                            kDistributionTile);
            total += std::abs(2 * white - full);
        }
    }
    return total;
}

struct Candidate {
    double score;
    Point cursor;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) {
        return a.score < b.score;
    }
    if (a.cursor.x != b.cursor.x) {
        return a.cursor.x < b.cursor.x;
    }
    return a.cursor.y < b.cursor.y;
}

struct Lipschitz {
    double x = 0.0;
    double y = 0.0;
};

Lipschitz all_sum_lipschitz(const simd::TrajectoryArrays& t) {
    Lipschitz l;
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double axx = t.m_xx[i] - t.m_xx[j];
            const double ayx = t.m_yx[i] - t.m_yx[j];
            const double axy = t.m_xy[i] - t.m_xy[j];
            const double ayy = t.m_yy[i] - t.m_yy[j];
            l.x += std::sqrt(axx * axx + ayx * ayx);
            l.y += std::sqrt(axy * axy + ayy * ayy);
        }
    }
    l.x *= 2.0;
    l.y *= 2.0;
    return l;
}

// Best-first branch and bound over the grid points. AllSumDist is a sum of
// Euclidean norms of affine functions of the cursor, hence convex, so the
// tangent plane at a region's center bounds the score from below; the
// Lipschitz bound is a second, gradient-free lower bound. Regions whose bound
// exceeds the incumbent by more than the rounding margin are dropped; the
// rest are split until they are small enough to score exactly.
HeuristicResult solve_all_sum_pruned(const simd::TrajectoryArrays& arrays, const SearchGrid& grid,
                                     const simd::KernelTable& k, std::chrono::steady_clock::time_point start) {
    constexpr std::size_t kLeaf = 8;
    const std::size_t n = arrays.size();
    const Lipschitz lip = all_sum_lipschitz(arrays);

    std::vector<std::size_t> perm(grid.positions.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    struct Node {
        double bound;
        std::size_t begin;
        std::size_t end;
    };
    auto cmp = [](const Node& a, const Node& b) { return a.bound > b.bound; };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);

    auto bound_of = [&](std::size_t b, std::size_t e) {
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (std::size_t i = b; i < e; ++i) {
            const Point p = grid.positions[perm[i]];
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        const Point c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        const double hx = 0.5 * (x1 - x0);
        const double hy = 0.5 * (y1 - y0);
        const ScoreWithGradient f = all_sum_dist_gradient(arrays, c);
        const double tangent = f.value - std::abs(f.dx) * hx - std::abs(f.dy) * hy;
        const double lipschitz = f.value - lip.x * hx - lip.y * hy;
        return std::max(tangent, lipschitz);
    };

    open.push({bound_of(0, perm.size()), 0, perm.size()});
    Candidate best{std::numeric_limits<double>::infinity(), {}};
    bool have = false;
    std::size_t evaluated = 0;
    std::vector<double> xs(n), ys(n);

    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        if (have) {
            const double margin = 1e-9 * std::abs(best.score) + 1e-9;
            if (node.bound > best.score + margin) {
                break;
            }
        }
        const std::size_t size = node.end - node.begin;
        if (size <= kLeaf) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const Point c = grid.positions[perm[i]];
                k.positions(arrays, c.x, c.y, xs.data(), ys.data());
                const Candidate cand{k.pair_sum(xs.data(), ys.data(), n), c};
                ++evaluated;
                if (!have || better(cand, best)) {
                    best = cand;
                    have = true;
                }
            }
            continue;
        }
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const Point p = grid.positions[perm[i]];
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        const bool along_x = (x1 - x0) >= (y1 - y0);
        const std::size_t mid = node.begin + size / 2;
        std::nth_element(perm.begin() + static_cast<std::ptrdiff_t>(node.begin),
                         perm.begin() + static_cast<std::ptrdiff_t>(mid),
                         perm.begin() + static_cast<std::ptrdiff_t>(node.end), [&](std::size_t a, std::size_t b) {
                             const Point pa = grid.positions[a];
                             const Point pb = grid.positions[b];
                             return along_x ? (pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y))
                                            : (pa.y < pb.y || (pa.y == pb.y && pa.x < pb.x));
                         });
        open.push({bound_of(node.begin, mid), node.begin, mid});
        open.push({bound_of(mid, node.end), mid, node.end});
    }

    HeuristicResult r;
    r.best_cursor = best.cursor;
    r.best_score = best.score;
    r.states_evaluated = evaluated;
    r.wall_time = std::chrono::steady_clock::now() - start;
    return r;
}

}  // namespace

constexpr double kBucketLoad = 1.2;

double nearest_sum_bucketed(const double* xs, const double* ys, std::size_t n, BucketScratch& s) {
    if (n < 2) {
        throw std::invalid_argument("MinSumDist needs at least two stars");
    }
    double x0 = xs[0], x1 = xs[0], y0 = ys[0], y1 = ys[0];
    for (std::size_t i = 1; i < n; ++i) {
        x0 = std::min(x0, xs[i]);
        x1 = std::max(x1, xs[i]);
        y0 = std::min(y0, ys[i]);
        y1 = std::max(y1, ys[i]);
    }
    const double w = x1 - x0;
    const double h = y1 - y0;
    const double nd = static_cast<double>(n);
    // A few stars per cell on average.
    double cell = std::max(std::sqrt(kBucketLoad * w * h / nd), kBucketLoad * std::max(w, h) / nd);
    if (!(cell > 0.0)) {
        cell = 1.0;  // every star coincides
    }
    int gx = static_cast<int>(w / cell) + 1;
    int gy = static_cast<int>(h / cell) + 1;
    while (static_cast<double>(gx) * gy > 2.0 * nd / kBucketLoad + 4.0) {
        cell *= 1.25;
        gx = static_cast<int>(w / cell) + 1;
        gy = static_cast<int>(h / cell) + 1;
    }
    const std::size_t cells = static_cast<std::size_t>(gx) * gy;
    s.start.assign(cells + 1, 0);
    s.cell.resize(n);
    s.order.resize(n);
    s.sx.resize(n);
    s.sy.resize(n);
    s.best.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cx = std::min(gx - 1, static_cast<int>((xs[i] - x0) / cell));
        const int cy = std::min(gy - 1, static_cast<int>((ys[i] - y0) / cell));
        s.cell[i] = static_cast<std::uint32_t>(static_cast<std::size_t>(cy) * gx + cx);
        ++s.start[s.cell[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) {
        s.start[c + 1] += s.start[c];
    }
    s.fill.assign(s.start.begin(), s.start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t at = s.fill[s.cell[i]]++;
        s.order[at] = static_cast<std::uint32_t>(i);
        s.sx[at] = xs[i];
        s.sy[at] = ys[i];
    }

    const int max_ring = std::max(gx, gy);
    for (int cy = 0; cy < gy; ++cy) {
        for (int cx = 0; cx < gx; ++cx) {
            const std::size_t c = static_cast<std::size_t>(cy) * gx + cx;
            for (std::uint32_t k = s.start[c]; k < s.start[c + 1]; ++k) {
                const double px = s.sx[k];
                const double py = s.sy[k];
                double best = std::numeric_limits<double>::infinity();
                auto visit = [&](int x, int y) {
                    const std::size_t cc = static_cast<std::size_t>(y) * gx + x;
                    for (std::uint32_t j = s.start[cc]; j < s.start[cc + 1]; ++j) {
                        if (j == k) {
                            continue;
                        }
                        const double dx = px - s.sx[j];
                        const double dy = py - s.sy[j];
                        best = std::min(best, dx * dx + dy * dy);
                    }
                };
                for (int r = 0; r <= max_ring; ++r) {
                    const int xa = cx - r, xb = cx + r, ya = cy - r, yb = cy + r;
                    if (r == 0) {
                        visit(cx, cy);
                    } else {
                        for (int x = std::max(xa, 0); x <= std::min(xb, gx - 1); ++x) {
                            if (ya >= 0) visit(x, ya);
                            if (yb < gy) visit(x, yb);
                        }
                        for (int y = std::max(ya + 1, 0); y <= std::min(yb - 1, gy - 1); ++y) {
                            if (xa >= 0) visit(xa, y);
                            if (xb < gx) visit(xb, y);
                        }
                    }
                    // Unvisited stars lie outside the (2r+1)^2 block of cells;
                    // sides on the grid border have nothing beyond them.
                    constexpr double inf = std::numeric_limits<double>::infinity();
                    const double left = xa > 0 ? px - (x0 + xa * cell) : inf;
                    const double right = xb < gx - 1 ? (x0 + (xb + 1) * cell) - px : inf;
                    const double top = ya > 0 ? py - (y0 + ya * cell) : inf;
                    const double bottom = yb < gy - 1 ? (y0 + (yb + 1) * cell) - py : inf;
                    const double reach = std::min(std::min(left, right), std::min(top, bottom)) - 1e-9;
                    if (reach == inf || (reach > 0.0 && best <= reach * reach)) {
                        break;
                    }
                }
                s.best[s.order[k]] = best;
            }
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += std::sqrt(s.best[i]);
    }
    return total;
}

ScoreWithGradient all_sum_dist_gradient(const simd::TrajectoryArrays& t, Point cursor) {
    const std::size_t n = t.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (t.m_xy[i] * cursor.y + t.m_xx[i] * cursor.x) + t.c_x[i];
        ys[i] = (t.m_yx[i] * cursor.x + t.m_yy[i] * cursor.y) + t.c_y[i];
    }
    ScoreWithGradient out;
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0, gx = 0.0, gy = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            const double d = std::sqrt(dx * dx + dy * dy);
            v += d;
            if (d > 0.0) {
                gx += (dx * (t.m_xx[i] - t.m_xx[j]) + dy * (t.m_yx[i] - t.m_yx[j])) / d;
                gy += (dx * (t.m_xy[i] - t.m_xy[j]) + dy * (t.m_yy[i] - t.m_yy[j])) / d;
            }
        }
        out.value += v;
        out.dx += gx;
        out.dy += gy;
    }
    out.value *= 2.0;
    out.dx *= 2.0;
    out.dy *= 2.0;
    return out;
}

double score_min_size(const State& state) {
    if (state.positions.empty()) {
        throw std::invalid_argument("MinSize needs at least one star");
    }
    std::vector<double> xs, ys;
    split(state, xs, ys);
    return simd::active_kernels().extent(xs.data(), ys.data(), xs.size());
}

double score_min_distribution(const PixelMatrix& matrix) { return distribution_score(matrix); }

double score_min_sum_dist(const State& state) {
    if (state.positions.size() < 2) {
        throw std::invalid_argument("MinSumDist needs at least two stars");
    }
    std::vector<double> xs, ys;
    split(state, xs, ys);
    std::vector<double> scratch(xs.size());
    return simd::active_kernels().nearest_sum(xs.data(), ys.data(), xs.size(), scratch.data());
}

double score_all_sum_dist(const State& state) {
    if (state.positions.empty()) {
        throw std::invalid_argument("AllSumDist needs at least one star");
    }
    std::vector<double> xs, ys;
    split(state, xs, ys);
    return simd::active_kernels().pair_sum(xs.data(), ys.data(), xs.size());
}

HeuristicResult solve(const ClientChallenge& challenge, Heuristic heuristic, const SearchGrid& grid,
                      const SolveOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const simd::KernelTable& k = options.kernels ? *options.kernels : simd::active_kernels();

    std::vector<StarTrajectory> stars = challenge.stars;
    const bool pairwise = heuristic == Heuristic::min_sum_dist || heuristic == Heuristic::all_sum_dist;
    if (pairwise && options.sample && *options.sample < stars.size()) {
        Rng rng(options.sample_seed);
        for (std::size_t i = 0; i < *options.sample; ++i) {
            std::swap(stars[i], stars[i + rng.below(stars.size() - i)]);
        }
        stars.resize(*options.sample);
    }
    const std::size_t n = stars.size();
    if (n == 0 || (heuristic == Heuristic::min_sum_dist && n < 2)) {
        throw std::invalid_argument("challenge has too few stars for " + std::string(to_string(heuristic)));
    }
    if (grid.positions.empty()) {
        throw std::invalid_argument("search grid is empty");
    }
    const simd::TrajectoryArrays arrays = to_arrays(stars);
    if (options.accelerate && heuristic == Heuristic::all_sum_dist) {
        return solve_all_sum_pruned(arrays, grid, k, start);
    }

    const unsigned workers = worker_count(options.threads);
    std::vector<Candidate> best(workers, Candidate{std::numeric_limits<double>::infinity(), {}});
    std::vector<std::size_t> counted(workers, 0);

    parallel_chunks(grid.positions.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
        std::vector<double> xs(n), ys(n), scratch(n);
        BucketScratch buckets;
        PixelMatrix matrix;
        Candidate local{std::numeric_limits<double>::infinity(), {}};
        bool have = false;
        for (std::size_t idx = begin; idx < end; ++idx) {
            const Point c = grid.positions[idx];
            k.positions(arrays, c.x, c.y, xs.data(), ys.data());
            double score = 0.0;
            switch (heuristic) {
                case Heuristic::min_size:
                    score = k.extent(xs.data(), ys.data(), n);
                    break;
                case Heuristic::min_distribution:
                    render_positions(xs, ys, matrix, options.star_side);
                    score = distribution_score(matrix);
                    break;
                case Heuristic::min_sum_dist:
                    score = options.accelerate ? nearest_sum_bucketed(xs.data(), ys.data(), n, buckets)
                                               : k.nearest_sum(xs.data(), ys.data(), n, scratch.data());
                    break;
                case Heuristic::all_sum_dist:
                    score = k.pair_sum(xs.data(), ys.data(), n);
                    break;
            }
            const Candidate cand{score, c};
            if (!have || better(cand, local)) {
                local = cand;
                have = true;
            }
        }
        best[w] = local;
        counted[w] = end - begin;
    });

    Candidate winner = best.front();
    for (const Candidate& c : best) {
        if (better(c, winner)) {
            winner = c;
        }
    }
    HeuristicResult r;
    r.best_cursor = winner.cursor;
    r.best_score = winner.score;
    r.states_evaluated = std::accumulate(counted.begin(), counted.end(), std::size_t{0});
    r.wall_time = std::chrono::steady_clock::now() - start;
    return r;
}

bool within_tolerance(Point answer, const Challenge& challenge) {
    return std::any_of(challenge.solutions.begin(), challenge.solutions.end(), [&](Point s) {
        return euclidean_distance(answer, s) < challenge.params.tolerance;
    });
}

}  // namespace captchastar
