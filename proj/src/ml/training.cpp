#include "captchastar/ml/training.hpp"

#include <algorithm>
#include <set>

#include "captchastar/generator.hpp"
#include "captchastar/kinematics.hpp"
#include "captchastar/ml/attack.hpp"
#include "captchastar/parallel.hpp"

namespace captchastar::ml {

namespace {

bool near_solution(Point p, const Challenge& c) {
    for (const Point& s : c.solutions) {
        if (euclidean_distance(p, s) < c.params.tolerance) {
            return true;
        }
    }
    return false;
}

// Draw `count` distinct entries of `from` without replacement.
std::vector<Point> draw_distinct(std::vector<Point> from, std::size_t count, Rng& rng) {
    count = std::min(count, from.size());
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(from[i], from[i + rng.below(from.size() - i)]);
    }
    from.resize(count);
    return from;
}

GenerateOptions quiet_options() {
    GenerateOptions o;
    o.id_source = [] { return std::string("training"); };
    return o;
}

}  // namespace

std::vector<Tile> sample_tile_corpus(const PicturePool& pool, const GenParams& params, int omega,
                                     std::size_t n_challenges, std::size_t n_states, Rng& rng, int lambda) {
    std::set<Tile> unique;
    if (n_challenges == 0 || n_states == 0) {
        return {};
    }
    const std::vector<Point> grid = lambda_grid(lambda);
    for (std::size_t c = 0; c < n_challenges; ++c) {
        const Challenge ch = generate_challenge(params, pool, rng, quiet_options());
        const ClientChallenge view = client_view(ch);
        const std::size_t share = n_states / n_challenges + (c < n_states % n_challenges ? 1 : 0);
        std::vector<Point> cursors;
        if (share > 0) {
            cursors.push_back(ch.solutions.front());
            const std::vector<Point> extra = draw_distinct(grid, share - 1, rng);
            cursors.insert(cursors.end(), extra.begin(), extra.end());
        }
        for (const Point& p : cursors) {
            for (Tile& t : extract_tiles(render_state(view, p), omega)) {
                unique.insert(std::move(t));
            }
        }
    }
    return {unique.begin(), unique.end()};
}

std::vector<LabeledExample> build_training_set(const PicturePool& pool, const GenParams& params,
                                               std::size_t n_challenges, std::size_t states_per_challenge,
                                               const ReferenceTiles& refs, Rng& rng,
                                               const TrainingOptions& options) {
    std::vector<LabeledExample> out;
    const std::vector<Point> grid = lambda_grid(options.lambda);
    for (std::size_t c = 0; c < n_challenges; ++c) {
        const Challenge ch = generate_challenge(params, pool, rng, quiet_options());
        const ClientChallenge view = client_view(ch);

        std::vector<LabeledExample> batch;
        std::vector<Point> negatives;
        for (const Point& s : ch.solutions) {
            batch.push_back({s, 1, c, {}});
        }
        for (const Point& p : grid) {
            if (near_solution(p, ch)) {
                if (std::find(ch.solutions.begin(), ch.solutions.end(), p) == ch.solutions.end()) {
                    batch.push_back({p, 1, c, {}});
                }
            } else {
                negatives.push_back(p);
            }
        }
        const std::size_t room = states_per_challenge > batch.size() ? states_per_challenge - batch.size() : 0;
        for (const Point& p : draw_distinct(std::move(negatives), room, rng)) {
            batch.push_back({p, 0, c, {}});
        }

        parallel_chunks(batch.size(), worker_count(options.threads), [&](unsigned, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                batch[i].features = feature_vector(render_state(view, batch[i].cursor), refs);
            }
        });
        std::move(batch.begin(), batch.end(), std::back_inserter(out));
    }
    return out;
}

Dataset to_dataset(const std::vector<LabeledExample>& examples) {
    Dataset d;
    for (const LabeledExample& e : examples) {
        d.add(e.features, e.label);
    }
    return d;
}

}  // namespace captchastar::ml
