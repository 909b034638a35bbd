#include "captchastar/ml/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace captchastar::ml {

namespace {

std::size_t nearest(const Tile& t, const std::vector<Tile>& centroids, int* dist) {
    std::size_t best = 0;
    int best_d = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        const int d = hamming(t, centroids[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (dist != nullptr) {
        *dist = best_d;
    }
    return best;
}

std::vector<Tile> seed_centroids(std::span<const Tile> corpus, std::size_t k, Rng& rng) {
    std::vector<Tile> centroids;
    centroids.reserve(k);
    centroids.push_back(corpus[rng.below(corpus.size())]);
    std::vector<int> dist(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        dist[i] = hamming(corpus[i], centroids.front());
    }
    while (centroids.size() < k) {
        std::uint64_t total = 0;
        for (int d : dist) {
            total += static_cast<std::uint64_t>(d);
        }
        // total > 0 because the corpus has at least k distinct tiles.
        std::uint64_t pick = rng.below(total);
        std::size_t chosen = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto d = static_cast<std::uint64_t>(dist[i]);
            if (pick < d) {
                chosen = i;
                break;
            }
            pick -= d;
        }
        centroids.push_back(corpus[chosen]);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            dist[i] = std::min(dist[i], hamming(corpus[i], centroids.back()));
        }
    }
    return centroids;
}

Tile majority(std::span<const Tile> corpus, const std::vector<std::size_t>& members, int side) {
    std::vector<int> white(static_cast<std::size_t>(side) * side, 0);
    for (std::size_t m : members) {
        const Tile& t = corpus[m];
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                white[static_cast<std::size_t>(y) * side + x] += t.get(x, y) ? 1 : 0;
            }
        }
    }
    Tile out(side);
    const int n = static_cast<int>(members.size());
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            out.set(x, y, 2 * white[static_cast<std::size_t>(y) * side + x] >= n);
        }
    }
    return out;
}

}  // namespace

KMeansResult kmeans_hamming(std::span<const Tile> corpus, std::size_t k, Rng& rng,
                            const KMeansOptions& options) {
    if (k == 0) {
        throw std::invalid_argument("k-means needs at least one cluster");
    }
    if (corpus.empty()) {
        throw std::invalid_argument("k-means corpus is empty");
    }
    const int side = corpus.front().side();
    for (const Tile& t : corpus) {
        if (t.side() != side) {
            throw std::invalid_argument("k-means corpus mixes tile sides");
        }
    }
    {
        std::set<Tile> distinct(corpus.begin(), corpus.end());
        if (distinct.size() < k) {
            throw std::invalid_argument("k-means corpus has " + std::to_string(distinct.size()) +
                                        " distinct tiles, need " + std::to_string(k));
        }
    }

    KMeansResult result;
    std::vector<Tile> centroids = seed_centroids(corpus, k, rng);
    std::vector<std::size_t> assign(corpus.size(), 0);
    std::vector<int> dist(corpus.size(), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        assign[i] = nearest(corpus[i], centroids, &dist[i]);
    }

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            members[assign[i]].push_back(i);
        }
        std::set<Tile> used;
        std::vector<bool> taken(corpus.size(), false);
        bool repaired = false;
        for (std::size_t c = 0; c < k; ++c) {
            Tile next = members[c].empty() ? centroids[c] : majority(corpus, members[c], side);
            if (members[c].empty() || used.count(next) != 0) {
                // Re-seed from the worst-fitting corpus tile not already a centroid.
                std::size_t far = corpus.size();
                for (std::size_t i = 0; i < corpus.size(); ++i) {
                    if (taken[i] || used.count(corpus[i]) != 0) {
                        continue;
                    }
                    if (far == corpus.size() || dist[i] > dist[far]) {
                        far = i;
                    }
                }
                taken[far] = true;
                next = corpus[far];
                repaired = true;
            }
            used.insert(next);
            centroids[c] = std::move(next);
        }
        bool changed = repaired;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const std::size_t a = nearest(corpus[i], centroids, &dist[i]);
            if (a != assign[i]) {
                assign[i] = a;
                changed = true;
            }
        }
        if (!changed) {
            result.converged = true;
            break;
        }
    }

    result.refs.omega = side;
    result.refs.tiles = std::move(centroids);
    result.assignment = std::move(assign);
    return result;
}

ReferenceTiles build_reference_tiles(std::span<const Tile> corpus, int omega, Rng& rng,
                                     const KMeansOptions& options) {
    if (!valid_omega(omega)) {
        throw std::invalid_argument("tile side " + std::to_string(omega) + " does not divide 300");
    }
    for (const Tile& t : corpus) {
        if (t.side() != omega) {
            throw std::invalid_argument("corpus tile side differs from omega");
        }
    }
    return kmeans_hamming(corpus, reference_count(omega), rng, options).refs;
}

}  // namespace captchastar::ml
