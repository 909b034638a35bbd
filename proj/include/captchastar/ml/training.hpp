#pragma once

#include <cstddef>
#include <vector>

#include "captchastar/core.hpp"
#include "captchastar/ml/classifier.hpp"
#include "captchastar/ml/tiles.hpp"
#include "captchastar/pool.hpp"
#include "captchastar/rng.hpp"

namespace captchastar::ml {

struct LabeledExample {
    Point cursor;
    int label = 0;  // 1 = solution
    std::size_t challenge = 0;
    FeatureVector features;
};

/// Deduplicated tiles from rendered states of freshly generated challenges.
/// Each challenge contributes its solution state; the remaining states use
/// cursors drawn from the lambda grid. States are spread evenly.
std::vector<Tile> sample_tile_corpus(const PicturePool& pool, const GenParams& params, int omega,
                                     std::size_t n_challenges, std::size_t n_states, Rng& rng,
                                     int lambda = 5);

struct TrainingOptions {
    int lambda = 5;
    unsigned threads = 0;
};

/// Per challenge: the exact solution state and every lambda-grid cursor
/// within tolerance of a solution are positives; the rest of the
/// `states_per_challenge` budget is filled with distinct grid cursors drawn
/// uniformly from the non-solution remainder.
std::vector<LabeledExample> build_training_set(const PicturePool& pool, const GenParams& params,
                                               std::size_t n_challenges, std::size_t states_per_challenge,
                                               const ReferenceTiles& refs, Rng& rng,
                                               const TrainingOptions& options = {});

Dataset to_dataset(const std::vector<LabeledExample>& examples);

}  // namespace captchastar::ml
