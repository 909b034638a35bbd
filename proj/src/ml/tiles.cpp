#include "captchastar/ml/tiles.hpp"

#include <bit>
#include <limits>
#include <string>

namespace captchastar::ml {

namespace {

std::size_t word_count(int side) { return (static_cast<std::size_t>(side) * side + 63) / 64; }

// `len` bits of a packed matrix row starting at column `start`, len <= 64.
std::uint64_t row_bits(const std::uint64_t* row, int start, int len) {
    const int word = start / 64;
    const int shift = start % 64;
    std::uint64_t v = row[word] >> shift;
    if (shift + len > 64) {
        v |= row[word + 1] << (64 - shift);
    }
    return len == 64 ? v : v & ((std::uint64_t{1} << len) - 1);
}

}  // namespace

Tile::Tile(int side) : side_(side), bits_(word_count(side), 0) {}

bool Tile::get(int x, int y) const {
    const std::size_t bit = static_cast<std::size_t>(y) * side_ + x;
    return (bits_[bit / 64] >> (bit % 64)) & 1U;
}

void Tile::set(int x, int y, bool white) {
    const std::size_t bit = static_cast<std::size_t>(y) * side_ + x;
    const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
    if (white) {
        bits_[bit / 64] |= mask;
    } else {
        bits_[bit / 64] &= ~mask;
    }
}

int Tile::white_count() const {
    int n = 0;
    for (std::uint64_t w : bits_) {
        n += std::popcount(w);
    }
    return n;
}

int hamming(const Tile& a, const Tile& b) {
    if (a.side() != b.side()) {
        throw std::invalid_argument("hamming distance needs tiles of equal side");
    }
    const auto wa = a.words();
    const auto wb = b.words();
    int d = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) {
        d += std::popcount(wa[i] ^ wb[i]);
    }
    return d;
}

bool valid_omega(int omega) { return omega > 0 && omega <= PixelMatrix::side && PixelMatrix::side % omega == 0; }

std::vector<Tile> extract_tiles(const PixelMatrix& matrix, int omega) {
    if (!valid_omega(omega)) {
        throw std::invalid_argument("tile side " + std::to_string(omega) + " does not divide 300");
    }
    if (omega > 64) {
        throw std::invalid_argument("tile side must not exceed 64");
    }
    const int per_axis = PixelMatrix::side / omega;
    std::vector<Tile> tiles(static_cast<std::size_t>(per_axis) * per_axis, Tile(omega));
    for (int ty = 0; ty < per_axis; ++ty) {
        for (int tx = 0; tx < per_axis; ++tx) {
            Tile& t = tiles[static_cast<std::size_t>(ty) * per_axis + tx];
            auto words = t.words();
            for (int r = 0; r < omega; ++r) {
                const std::uint64_t bits = row_bits(matrix.row(ty * omega + r), tx * omega, omega);
                if (bits == 0) {
                    continue;
                }
                const std::size_t at = static_cast<std::size_t>(r) * omega;
                const std::size_t word = at / 64;
                const int shift = static_cast<int>(at % 64);
                words[word] |= bits << shift;
                if (shift + omega > 64) {
                    words[word + 1] |= bits >> (64 - shift);
                }
            }
        }
    }
    return tiles;
}

std::size_t nearest_reference(const Tile& tile, const ReferenceTiles& refs) {
    std::size_t best = 0;
    int best_d = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < refs.tiles.size(); ++i) {
        const int d = hamming(tile, refs.tiles[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

FeatureVector feature_vector(const PixelMatrix& matrix, const ReferenceTiles& refs) {
    const std::vector<Tile> tiles = extract_tiles(matrix, refs.omega);
    FeatureVector d(refs.tiles.size(), 0.0);
    for (const Tile& t : tiles) {
        d[nearest_reference(t, refs)] += 1.0;
    }
    const double total = static_cast<double>(tiles.size());
    for (double& v : d) {
        v /= total;
    }
    return d;
}

}  // namespace captchastar::ml
