#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "captchastar/core.hpp"
#include "captchastar/image.hpp"
#include "captchastar/pool.hpp"
#include "captchastar/rng.hpp"

namespace captchastar {

/// Minimum original stars a picture must yield to be usable as a shape.
inline constexpr std::size_t kMinStars = 20;

/// The six per-star motion parameters, stored in wire order. This is all a
/// client ever learns about a star.
struct StarTrajectory {
    double m_xx = 0.0;
    double m_xy = 0.0;
    double c_x = 0.0;
    double m_yx = 0.0;
    double m_yy = 0.0;
    double c_y = 0.0;

    friend bool operator==(const StarTrajectory&, const StarTrajectory&) = default;
};

/// Positions the original stars of one shape take at that shape's solution.
struct AnchorSet {
    std::vector<Point> anchors;
};

/// Server-side bookkeeping for one entry of the star list. Never serialized
/// to clients.
struct StarOrigin {
    int shape = -1;  ///< index into Challenge::solutions, -1 for noise
    Point anchor;    ///< position at the owning solution (noise: at its pseudo-solution)
};

struct Challenge {
    std::string id;
    std::vector<StarTrajectory> stars;
    std::vector<Point> solutions;
    std::vector<StarOrigin> origins;  ///< parallel to stars
    GenParams params;
    std::chrono::steady_clock::time_point created_at;

    std::size_t original_count() const;
};

/// What a client receives: the id and the star list, nothing else.
struct ClientChallenge {
    std::string id;
    std::vector<StarTrajectory> stars;
};

ClientChallenge client_view(const Challenge& challenge);

class DegeneratePictureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wall time per pipeline phase, accumulated over all shapes of a challenge.
struct GenerationTimings {
    double preprocess_s = 0.0;
    double decompose_s = 0.0;
    double trajectory_s = 0.0;
};

using IdSource = std::function<std::string()>;

struct GenerateOptions {
    /// Replaces round(psi/100 * originals) when set.
    std::optional<std::size_t> fixed_noise_count;
    /// Defaults to random_challenge_id().
    IdSource id_source;
    GenerationTimings* timings = nullptr;
};

/// 128 bits from the operating system's entropy source, hex encoded.
std::string random_challenge_id();

BinaryImage preprocess_picture(std::span<const std::uint8_t> encoded, const GenParams& params, Rng& rng);

/// Sample a binarized picture into anchor positions on 5x5 tiles and place
/// the result at a random offset inside the drawable space.
AnchorSet decompose(const BinaryImage& img, Rng& rng);

/// Anchors before the random placement offset, in picture coordinates.
std::vector<Point> sample_anchors(const BinaryImage& img);

/// Build one trajectory that passes through `anchor` when the cursor is at `sol`.
StarTrajectory trajectory_through(Point anchor, Point sol, double m_xx, double m_xy, double m_yx, double m_yy);

std::vector<StarTrajectory> compute_trajectories(const AnchorSet& anchors, Point sol, double delta, Rng& rng);

/// Decoys built like original stars, with random anchors over [0,300)^2 and a
/// fresh integer pseudo-solution per star.
std::vector<StarTrajectory> generate_noise_stars(std::size_t count, double delta, Rng& rng,
                                                 std::vector<StarOrigin>* origins = nullptr);

/// round-half-up(psi / 100 * originals)
std::size_t noise_count(double psi, std::size_t originals);

Point random_solution(Rng& rng);

Challenge generate_challenge(const GenParams& params, const PicturePool& pool, Rng& rng,
                             const GenerateOptions& options = {});

}  // namespace captchastar
