#include "captchastar/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace captchastar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void shuffle_in_place(std::vector<StarTrajectory>& stars, std::vector<StarOrigin>& origins, Rng& rng) {
    for (std::size_t i = stars.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(stars[i - 1], stars[j]);
        std::swap(origins[i - 1], origins[j]);
    }
}

}  // namespace

std::size_t Challenge::original_count() const {
    return static_cast<std::size_t>(
        std::count_if(origins.begin(), origins.end(), [](const StarOrigin& o) { return o.shape >= 0; }));
}

ClientChallenge client_view(const Challenge& challenge) { return {challenge.id, challenge.stars}; }

std::string random_challenge_id() {
    static thread_local std::random_device device;
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    id.reserve(32);
    for (int word = 0; word < 4; ++word) {
        std::uint32_t bits = device();
        for (int nibble = 0; nibble < 8; ++nibble) {
            id.push_back(hex[bits & 0xF]);
            bits >>= 4;
        }
    }
    return id;
}

BinaryImage preprocess_picture(std::span<const std::uint8_t> encoded, const GenParams& params, Rng& rng) {
    const RgbaImage raw = decode_png(encoded);
    GrayImage gray = resize_to_fit(composite_luminance(raw), params.pic_size);
    if (params.rotation) {
        const double angle = rng.uniform(0.0, 360.0);
        gray = rotate(gray, angle);
        if (std::max(gray.width, gray.height) != params.pic_size) {
            gray = resize_to_fit(gray, params.pic_size);
        }
    }
    return binarize(gray);
}

std::vector<Point> sample_anchors(const BinaryImage& img) {
    constexpr int tile = 5;
    std::vector<Point> anchors;
    for (int ty = 0; ty < img.height; ty += tile) {
        for (int tx = 0; tx < img.width; tx += tile) {
            int count = 0;
            long sum_x = 0;
            long sum_y = 0;
            for (int y = ty; y < std::min(ty + tile, img.height); ++y) {
                for (int x = tx; x < std::min(tx + tile, img.width); ++x) {
                    if (img.at(x, y)) {
                        ++count;
                        sum_x += x;
                        sum_y += y;
                    }
                }
            }
            if (count == tile * tile) {
                anchors.push_back({static_cast<double>(tx + 2), static_cast<double>(ty + 2)});
            } else if (count >= 9) {
                anchors.push_back({std::round(static_cast<double>(sum_x) / count),
                                   std::round(static_cast<double>(sum_y) / count)});
            }
        }
    }
    return anchors;
}

AnchorSet decompose(const BinaryImage& img, Rng& rng) {
    std::vector<Point> anchors = sample_anchors(img);
    if (anchors.size() < kMinStars) {
        throw DegeneratePictureError("picture yields only " + std::to_string(anchors.size()) + " stars");
    }
    double min_x = anchors.front().x, max_x = min_x;
    double min_y = anchors.front().y, max_y = min_y;
    for (const Point& p : anchors) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    constexpr int last = DrawableSpace::side - 1;
    if (max_x - min_x > last || max_y - min_y > last) {
        throw DegeneratePictureError("picture does not fit in the drawable space");
    }
    const auto off_x = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(-min_x),
                                                           static_cast<std::int64_t>(last - max_x)));
    const auto off_y = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(-min_y),
                                                           static_cast<std::int64_t>(last - max_y)));
    for (Point& p : anchors) {
        p.x += off_x;
        p.y += off_y;
    }
    return {std::move(anchors)};
}

StarTrajectory trajectory_through(Point anchor, Point sol, double m_xx, double m_xy, double m_yx, double m_yy) {
    StarTrajectory s;
    s.m_xx = m_xx;
    s.m_xy = m_xy;
    s.m_yx = m_yx;
    s.m_yy = m_yy;
    s.c_x = anchor.x - sol.y * m_xy - sol.x * m_xx;
    s.c_y = anchor.y - sol.y * m_yy - sol.x * m_yx;
    return s;
}

namespace {

StarTrajectory random_trajectory(Point anchor, Point sol, double delta, Rng& rng) {
    const double bound = delta / 10.0;
    const double m_xx = rng.uniform(-bound, bound);
    const double m_xy = rng.uniform(-bound, bound);
    const double m_yx = rng.uniform(-bound, bound);
    const double m_yy = rng.uniform(-bound, bound);
    return trajectory_through(anchor, sol, m_xx, m_xy, m_yx, m_yy);
}

}  // namespace

std::vector<StarTrajectory> compute_trajectories(const AnchorSet& anchors, Point sol, double delta, Rng& rng) {
    std::vector<StarTrajectory> out;
    out.reserve(anchors.anchors.size());
    for (const Point& p : anchors.anchors) {
        out.push_back(random_trajectory(p, sol, delta, rng));
    }
    return out;
}

Point random_solution(Rng& rng) {
    return {static_cast<double>(rng.uniform_int(DrawableSpace::solution_min, DrawableSpace::solution_max)),
            static_cast<double>(rng.uniform_int(DrawableSpace::solution_min, DrawableSpace::solution_max))};
}

std::vector<StarTrajectory> generate_noise_stars(std::size_t count, double delta, Rng& rng,
                                                 std::vector<StarOrigin>* origins) {
    std::vector<StarTrajectory> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Point anchor{rng.uniform(0.0, DrawableSpace::side), rng.uniform(0.0, DrawableSpace::side)};
        const Point pseudo_solution = random_solution(rng);
        out.push_back(random_trajectory(anchor, pseudo_solution, delta, rng));
        if (origins) {
            origins->push_back({-1, anchor});
        }
    }
    return out;
}

std::size_t noise_count(double psi, std::size_t originals) {
    return static_cast<std::size_t>(std::floor(psi * static_cast<double>(originals) / 100.0 + 0.5));
}

Challenge generate_challenge(const GenParams& params, const PicturePool& pool, Rng& rng,
                             const GenerateOptions& options) {
    if (pool.size() == 0) {
        throw GenerationError("picture pool is empty");
    }
    Challenge ch;
    ch.params = params;
    GenerationTimings local;
    GenerationTimings& timings = options.timings ? *options.timings : local;

    const std::size_t max_attempts = std::max<std::size_t>(64, pool.size() * 4);
    std::size_t attempts = 0;
    for (int shape = 0; shape < params.nsol; ++shape) {
        AnchorSet anchors;
        for (;;) {
            if (attempts++ >= max_attempts) {
                throw GenerationError("picture pool exhausted of usable pictures");
            }
            auto start = Clock::now();
            try {
                const std::size_t pick = rng.below(pool.size());
                const std::vector<std::uint8_t> bytes = pool.bytes(pick);
                const BinaryImage img = preprocess_picture(bytes, params, rng);
                timings.preprocess_s += seconds_since(start);
                start = Clock::now();
                anchors = decompose(img, rng);
                timings.decompose_s += seconds_since(start);
                break;
            } catch (const ImageError&) {
                timings.preprocess_s += seconds_since(start);
            } catch (const DegeneratePictureError&) {
                timings.decompose_s += seconds_since(start);
            }
        }
        const auto start = Clock::now();
        const Point sol = random_solution(rng);
        std::vector<StarTrajectory> stars = compute_trajectories(anchors, sol, params.delta, rng);
        ch.solutions.push_back(sol);
        for (std::size_t i = 0; i < stars.size(); ++i) {
            ch.stars.push_back(stars[i]);
            ch.origins.push_back({shape, anchors.anchors[i]});
        }
        timings.trajectory_s += seconds_since(start);
    }

    const auto start = Clock::now();
    const std::size_t originals = ch.stars.size();
    const std::size_t noisy = options.fixed_noise_count.value_or(noise_count(params.psi, originals));
    auto noise = generate_noise_stars(noisy, params.delta, rng, &ch.origins);
    ch.stars.insert(ch.stars.end(), noise.begin(), noise.end());
    shuffle_in_place(ch.stars, ch.origins, rng);
    timings.trajectory_s += seconds_since(start);

    ch.id = options.id_source ? options.id_source() : random_challenge_id();
    ch.created_at = Clock::now();
    return ch;
}

}  // namespace captchastar
