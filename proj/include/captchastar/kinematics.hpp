#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "captchastar/core.hpp"
#include "captchastar/generator.hpp"
#include "captchastar/pixel_matrix.hpp"
#include "captchastar/simd/kernels.hpp"

namespace captchastar {

/// Side of the white square drawn for each star.
inline constexpr int kStarSide = 3;

/// Snapshot of every star's position for one cursor position.
struct State {
    Point cursor;
    std::vector<Point> positions;
};

Point star_position(const StarTrajectory& star, Point cursor);

State state_at(std::span<const StarTrajectory> stars, Point cursor);

simd::TrajectoryArrays to_arrays(std::span<const StarTrajectory> stars);

/// Round half away from zero to the pixel grid.
int pixel_of(double coordinate);

/// Stamp a star_side x star_side white square at each rounded position,
/// clipped to the drawable space. `matrix` is cleared first.
void render_positions(std::span<const double> xs, std::span<const double> ys, PixelMatrix& matrix,
                      int star_side = kStarSide);

PixelMatrix render_state(const ClientChallenge& challenge, Point cursor, int star_side = kStarSide);
PixelMatrix render_state(const State& state, int star_side = kStarSide);

class MalformedAnswer : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Which solutions of a challenge have been found so far (all-of policy).
struct VerifyProgress {
    std::vector<bool> matched;
};

struct VerifyOutcome {
    bool passed = false;     ///< the challenge as a whole is now solved
    bool matched = false;    ///< this answer hit an unmatched solution
    double delta = 0.0;      ///< distance to the nearest unmatched solution
    int solutions_remaining = 0;
};

/// Check one answer. Under all-of, a hit marks that solution in `progress`
/// and the challenge passes once every solution is marked.
/// Throws MalformedAnswer when the answer lies outside [0,300]^2.
VerifyOutcome verify(Point answer, const Challenge& challenge, VerifyProgress& progress);

}  // namespace captchastar
