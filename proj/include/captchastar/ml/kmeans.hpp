#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "captchastar/ml/tiles.hpp"
#include "captchastar/rng.hpp"

namespace captchastar::ml {

struct KMeansOptions {
    int max_iterations = 100;
};

struct KMeansResult {
    ReferenceTiles refs;
    std::vector<std::size_t> assignment;  // cluster index per corpus tile
    int iterations = 0;
    bool converged = false;
};

/// k-means over Boolean tiles with Hamming distance. Seeding is k-means++
/// style (distance-weighted), centroids are per-cell majority votes with ties
/// going to white, and empty or duplicated clusters are re-seeded from the
/// corpus tile farthest from its centroid. Throws std::invalid_argument if the
/// corpus holds fewer than `k` distinct tiles or the sides disagree.
KMeansResult kmeans_hamming(std::span<const Tile> corpus, std::size_t k, Rng& rng,
                            const KMeansOptions& options = {});

/// Reference tiles for side `omega`: kmeans_hamming with k = 3 * omega.
ReferenceTiles build_reference_tiles(std::span<const Tile> corpus, int omega, Rng& rng,
                                     const KMeansOptions& options = {});

}  // namespace captchastar::ml
