#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>

#include "captchastar/core.hpp"

namespace captchastar {

/// Boolean raster of the drawable space; a set bit is a white pixel.
/// Each row is packed into five 64-bit words, column c at bit c % 64 of
/// word c / 64.
class PixelMatrix {
public:
    static constexpr int side = DrawableSpace::side;
    static constexpr int words_per_row = (side + 63) / 64;

    bool white(int x, int y) const {
        return (rows_[index(y, x / 64)] >> (x % 64)) & 1U;
    }

    void set_white(int x, int y) { rows_[index(y, x / 64)] |= std::uint64_t{1} << (x % 64); }

    void clear() { rows_.fill(0); }

    const std::uint64_t* row(int y) const { return &rows_[index(y, 0)]; }

    /// Set columns [x0, x1) of row y. Requires 0 <= x0 <= x1 <= side.
    void fill_span(int y, int x0, int x1);

    /// White pixels in the rectangle [x0, x0 + w) x [y0, y0 + h).
    int count_white(int x0, int y0, int w, int h) const;

    int white_count() const;

    friend bool operator==(const PixelMatrix&, const PixelMatrix&) = default;

private:
    static constexpr std::size_t index(int y, int word) {
        return static_cast<std::size_t>(y) * words_per_row + word;
    }

    std::array<std::uint64_t, static_cast<std::size_t>(side) * words_per_row> rows_{};
};

/// Mask selecting bits [lo, hi) of a word, 0 <= lo <= hi <= 64.
constexpr std::uint64_t bit_range(int lo, int hi) {
    const std::uint64_t upper = hi >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << hi) - 1);
    const std::uint64_t lower = (std::uint64_t{1} << lo) - 1;
    return upper & ~lower;
}

inline void PixelMatrix::fill_span(int y, int x0, int x1) {
    for (int w = x0 / 64; w * 64 < x1; ++w) {
        const int lo = std::max(x0 - w * 64, 0);
        const int hi = std::min(x1 - w * 64, 64);
        rows_[index(y, w)] |= bit_range(lo, hi);
    }
}

inline int PixelMatrix::count_white(int x0, int y0, int w, int h) const {
    const int x1 = x0 + w;
    int total = 0;
    for (int y = y0; y < y0 + h; ++y) {
        const std::uint64_t* r = row(y);
        for (int word = x0 / 64; word * 64 < x1; ++word) {
            const int lo = std::max(x0 - word * 64, 0);
            const int hi = std::min(x1 - word * 64, 64);
            total += std::popcount(r[word] & bit_range(lo, hi));
        }
    }
    return total;
}

inline int PixelMatrix::white_count() const {
    int total = 0;
    for (std::uint64_t word : rows_) {
        total += std::popcount(word);
    }
    return total;
}

}  // namespace captchastar
