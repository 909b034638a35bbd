#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "captchastar/pixel_matrix.hpp"

namespace captchastar::ml {

/// Square Boolean sub-matrix; bit y * side + x is set for a white pixel.
class Tile {
public:
    Tile() = default;
    explicit Tile(int side);

    int side() const { return side_; }
    bool get(int x, int y) const;
    void set(int x, int y, bool white);
    int white_count() const;

    std::span<const std::uint64_t> words() const { return bits_; }
    std::span<std::uint64_t> words() { return bits_; }

    friend bool operator==(const Tile&, const Tile&) = default;
    friend bool operator<(const Tile& a, const Tile& b) { return a.bits_ < b.bits_; }

private:
    int side_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Number of differing cells. Throws std::invalid_argument on a side mismatch.
int hamming(const Tile& a, const Tile& b);

/// Tile sides accepted by the feature extractor: divisors of 300.
bool valid_omega(int omega);

/// (300 / omega)^2 non-overlapping tiles, row-major.
std::vector<Tile> extract_tiles(const PixelMatrix& matrix, int omega);

/// The k-means centroids used as a feature basis; 3 * omega of them.
struct ReferenceTiles {
    int omega = 0;
    std::vector<Tile> tiles;
};

inline std::size_t reference_count(int omega) { return static_cast<std::size_t>(3 * omega); }

/// Index of the Hamming-nearest reference, lowest index on ties.
std::size_t nearest_reference(const Tile& tile, const ReferenceTiles& refs);

using FeatureVector = std::vector<double>;

/// Histogram of nearest references over all tiles of the matrix, divided by
/// the tile count so the entries sum to one.
FeatureVector feature_vector(const PixelMatrix& matrix, const ReferenceTiles& refs);

}  // namespace captchastar::ml
