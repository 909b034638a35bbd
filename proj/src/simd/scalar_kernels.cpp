#include <algorithm>
#include <cmath>
#include <limits>

#include "captchastar/simd/kernels.hpp"

namespace captchastar::simd {

namespace {

void positions(const TrajectoryArrays& t, double cx, double cy, double* xs, double* ys) {
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (t.m_xy[i] * cy + t.m_xx[i] * cx) + t.c_x[i];
        ys[i] = (t.m_yx[i] * cx + t.m_yy[i] * cy) + t.c_y[i];
    }
}

double extent(const double* xs, const double* ys, std::size_t n) {
    double min_x = xs[0], max_x = xs[0], min_y = ys[0], max_y = ys[0];
    for (std::size_t i = 1; i < n; ++i) {
        min_x = std::min(min_x, xs[i]);
        max_x = std::max(max_x, xs[i]);
        min_y = std::min(min_y, ys[i]);
        max_y = std::max(max_y, ys[i]);
    }
    return (max_x - min_x) + (max_y - min_y);
}

double nearest_sum(const double* xs, const double* ys, std::size_t n, double* best) {
    std::fill(best, best + n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        double bi = best[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            const double d2 = dx * dx + dy * dy;
            bi = std::min(bi, d2);
            best[j] = std::min(best[j], d2);
        }
        best[i] = bi;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += std::sqrt(best[i]);
    }
    return total;
}

double pair_sum(const double* xs, const double* ys, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            row += std::sqrt(dx * dx + dy * dy);
        }
        total += row;
    }
    return 2.0 * total;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", &positions, &extent, &nearest_sum, &pair_sum};
    return table;
}

}  // namespace captchastar::simd
