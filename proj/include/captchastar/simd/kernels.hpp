#pragma once

#include <cstddef>
#include <vector>

namespace captchastar::simd {

/// Structure-of-arrays view of a star list.
struct TrajectoryArrays {
    std::vector<double> m_xx, m_xy, c_x, m_yx, m_yy, c_y;

    std::size_t size() const { return m_xx.size(); }
};

/// Data-parallel inner loops of the motion model and the dispersion scores.
/// Every implementation must agree with the scalar table: bit-exactly for
/// `positions` and `extent`, to rounding of the summation order for the sums.
struct KernelTable {
    const char* name;

    /// xs[i] = m_xy[i]*cy + m_xx[i]*cx + c_x[i]; ys[i] = m_yx[i]*cx + m_yy[i]*cy + c_y[i]
    void (*positions)(const TrajectoryArrays& t, double cx, double cy, double* xs, double* ys);

    /// (max x - min x) + (max y - min y). Requires n >= 1.
    double (*extent)(const double* xs, const double* ys, std::size_t n);

    /// Sum over i of the distance to the nearest j != i. Requires n >= 2 and
    /// `scratch` of n doubles.
    double (*nearest_sum)(const double* xs, const double* ys, std::size_t n, double* scratch);

    /// Sum over ordered pairs (i, j) of the distance between i and j.
    double (*pair_sum)(const double* xs, const double* ys, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 table was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Best table for this CPU, unless CAPTCHASTAR_SIMD=scalar forces the
/// reference implementation. Chosen once per process.
const KernelTable& active_kernels();

}  // namespace captchastar::simd
