#include "captchastar/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace captchastar {

Point star_position(const StarTrajectory& s, Point cursor) {
    return {(s.m_xy * cursor.y + s.m_xx * cursor.x) + s.c_x, (s.m_yx * cursor.x + s.m_yy * cursor.y) + s.c_y};
}

State state_at(std::span<const StarTrajectory> stars, Point cursor) {
    State st{cursor, {}};
    st.positions.reserve(stars.size());
    for (const auto& s : stars) {
        st.positions.push_back(star_position(s, cursor));
    }
    return st;
}

simd::TrajectoryArrays to_arrays(std::span<const StarTrajectory> stars) {
    simd::TrajectoryArrays t;
    for (auto* v : {&t.m_xx, &t.m_xy, &t.c_x, &t.m_yx, &t.m_yy, &t.c_y}) {
        v->reserve(stars.size());
    }
    for (const auto& s : stars) {
        t.m_xx.push_back(s.m_xx);
        t.m_xy.push_back(s.m_xy);
        t.c_x.push_back(s.c_x);
        t.m_yx.push_back(s.m_yx);
        t.m_yy.push_back(s.m_yy);
        t.c_y.push_back(s.c_y);
    }
    return t;
}

int pixel_of(double coordinate) {
    const double r = std::round(coordinate);
    // Far off-screen positions only need to stay off-screen.
    return static_cast<int>(std::clamp(r, -1.0e6, 1.0e6));
}

void render_positions(std::span<const double> xs, std::span<const double> ys, PixelMatrix& matrix, int star_side) {
    matrix.clear();
    const int lo_off = -(star_side - 1) / 2;
    const int hi_off = lo_off + star_side;  // exclusive
    constexpr int side = PixelMatrix::side;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const int px = pixel_of(xs[i]);
        const int py = pixel_of(ys[i]);
        const int x0 = std::max(px + lo_off, 0);
        const int x1 = std::min(px + hi_off, side);
        if (x0 >= x1) {
            continue;
        }
        const int y0 = std::max(py + lo_off, 0);
        const int y1 = std::min(py + hi_off, side);
        for (int y = y0; y < y1; ++y) {
            matrix.fill_span(y, x0, x1);
        }
    }
}

PixelMatrix render_state(const State& state, int star_side) {
    std::vector<double> xs, ys;
    xs.reserve(state.positions.size());
    ys.reserve(state.positions.size());
    for (const Point& p : state.positions) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    PixelMatrix m;
    render_positions(xs, ys, m, star_side);
    return m;
}

PixelMatrix render_state(const ClientChallenge& challenge, Point cursor, int star_side) {
    return render_state(state_at(challenge.stars, cursor), star_side);
}

VerifyOutcome verify(Point answer, const Challenge& challenge, VerifyProgress& progress) {
    constexpr double side = DrawableSpace::side;
    if (!(answer.x >= 0.0 && answer.x <= side && answer.y >= 0.0 && answer.y <= side)) {
        throw MalformedAnswer("answer outside the drawable space");
    }
    const auto& sols = challenge.solutions;
    if (progress.matched.size() != sols.size()) {
        progress.matched.assign(sols.size(), false);
    }
    const double tolerance = challenge.params.tolerance;

    VerifyOutcome out;
    out.delta = std::numeric_limits<double>::infinity();
    std::size_t nearest = sols.size();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        if (progress.matched[i]) {
            continue;
        }
        const double d = euclidean_distance(answer, sols[i]);
        if (d < out.delta) {
            out.delta = d;
            nearest = i;
        }
    }
    out.matched = nearest < sols.size() && out.delta < tolerance;

    if (challenge.params.solution_policy == SolutionPolicy::any_of) {
        out.passed = out.matched;
        out.solutions_remaining = out.passed ? 0 : 1;
        return out;
    }
    if (out.matched) {
        progress.matched[nearest] = true;
    }
    out.solutions_remaining =
        static_cast<int>(std::count(progress.matched.begin(), progress.matched.end(), false));
    out.passed = out.matched && out.solutions_remaining == 0;
    return out;
}

}  // namespace captchastar
