// Compiled with -mavx2 and no FP contraction so products and sums round
// exactly as in the scalar table.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "captchastar/simd/kernels.hpp"

namespace captchastar::simd {

namespace {

void positions(const TrajectoryArrays& t, double cx, double cy, double* xs, double* ys) {
    const std::size_t n = t.size();
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(&t.m_xy[i]), vcy), _mm256_mul_pd(_mm256_loadu_pd(&t.m_xx[i]), vcx)),
            _mm256_loadu_pd(&t.c_x[i]));
        const __m256d y = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(&t.m_yx[i]), vcx), _mm256_mul_pd(_mm256_loadu_pd(&t.m_yy[i]), vcy)),
            _mm256_loadu_pd(&t.c_y[i]));
        _mm256_storeu_pd(xs + i, x);
        _mm256_storeu_pd(ys + i, y);
    }
    for (; i < n; ++i) {
        xs[i] = (t.m_xy[i] * cy + t.m_xx[i] * cx) + t.c_x[i];
        ys[i] = (t.m_yx[i] * cx + t.m_yy[i] * cy) + t.c_y[i];
    }
}

double hmin(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_min_pd(lo, hi);
    return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double extent(const double* xs, const double* ys, std::size_t n) {
    double min_x = xs[0], max_x = xs[0], min_y = ys[0], max_y = ys[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vmin_x = _mm256_loadu_pd(xs), vmax_x = vmin_x;
        __m256d vmin_y = _mm256_loadu_pd(ys), vmax_y = vmin_y;
        for (i = 4; i + 4 <= n; i += 4) {
            const __m256d x = _mm256_loadu_pd(xs + i);
            const __m256d y = _mm256_loadu_pd(ys + i);
            vmin_x = _mm256_min_pd(vmin_x, x);
            vmax_x = _mm256_max_pd(vmax_x, x);
            vmin_y = _mm256_min_pd(vmin_y, y);
            vmax_y = _mm256_max_pd(vmax_y, y);
        }
        min_x = hmin(vmin_x);
        max_x = hmax(vmax_x);
        min_y = hmin(vmin_y);
        max_y = hmax(vmax_y);
    }
    for (; i < n; ++i) {
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
        const __m256d xi = _mm256_set1_pd(xs[i]);
        const __m256d yi = _mm256_set1_pd(ys[i]);
        __m256d bi = _mm256_set1_pd(best[i]);
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
            const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
            bi = _mm256_min_pd(bi, d2);
            _mm256_storeu_pd(best + j, _mm256_min_pd(_mm256_loadu_pd(best + j), d2));
        }
        double b = hmin(bi);
        for (; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            const double d2 = dx * dx + dy * dy;
            b = std::min(b, d2);
            best[j] = std::min(best[j], d2);
        }
        best[i] = b;
    }
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_loadu_pd(best + i)));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += std::sqrt(best[i]);
    }
    return total;
}

double pair_sum(const double* xs, const double* ys, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(xs[i]);
        const __m256d yi = _mm256_set1_pd(ys[i]);
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
            acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy))));
        }
        for (; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            tail += std::sqrt(dx * dx + dy * dy);
        }
    }
    return 2.0 * (hsum(acc) + tail);
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{"avx2", &positions, &extent, &nearest_sum, &pair_sum};
    return &table;
}

}  // namespace captchastar::simd
