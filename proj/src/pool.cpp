#include "captchastar/pool.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "captchastar/rng.hpp"

namespace captchastar {

DirectoryPool::DirectoryPool(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
        throw ImageError("picture pool is not a directory: " + dir_.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") {
            files_.push_back(entry.path());
        }
    }
    // Directory iteration order is unspecified; sort so seeds are portable.
    std::sort(files_.begin(), files_.end());
}

std::string DirectoryPool::name(std::size_t index) const { return files_.at(index).filename().string(); }

std::vector<std::uint8_t> DirectoryPool::bytes(std::size_t index) const { return read_file_bytes(files_.at(index)); }

void MemoryPool::add(std::string name, std::vector<std::uint8_t> bytes) {
    entries_.push_back({std::move(name), std::move(bytes)});
}

namespace {

using Shape = std::function<bool(double, double)>;

Shape ellipse(double cx, double cy, double rx, double ry, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return [=](double x, double y) {
        const double u = (c * (x - cx) + s * (y - cy)) / rx;
        const double v = (-s * (x - cx) + c * (y - cy)) / ry;
        return u * u + v * v <= 1.0;
    };
}

Shape rectangle(double cx, double cy, double hw, double hh, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return [=](double x, double y) {
        const double u = c * (x - cx) + s * (y - cy);
        const double v = -s * (x - cx) + c * (y - cy);
        return std::abs(u) <= hw && std::abs(v) <= hh;
    };
}

// Star polygon with `points` tips; inner == outer gives a regular polygon.
Shape star(double cx, double cy, double outer, double inner, int points, double angle) {
    std::vector<std::array<double, 2>> poly;
    const int n = inner == outer ? points : points * 2;
    for (int i = 0; i < n; ++i) {
        const double r = (inner == outer || i % 2 == 0) ? outer : inner;
        const double t = angle + 2.0 * std::numbers::pi * i / n;
        poly.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
    }
    return [poly](double x, double y) {
        bool inside = false;
        for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
            const auto& a = poly[i];
            const auto& b = poly[j];
            if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) {
                inside = !inside;
            }
        }
        return inside;
    };
}

Shape heart(double cx, double cy, double r) {
    return [=](double x, double y) {
        const double u = (x - cx) / r;
        const double v = -(y - cy) / r + 0.25;
        const double t = u * u + v * v - 1.0;
        return t * t * t - u * u * v * v * v <= 0.0;
    };
}

Shape random_body(Rng& rng, double canvas) {
    const double mid = canvas / 2.0;
    const double cx = mid + rng.uniform(-0.12, 0.12) * canvas;
    const double cy = mid + rng.uniform(-0.12, 0.12) * canvas;
    const double r = rng.uniform(0.22, 0.40) * canvas;
    // Icons are drawn upright.
    const double quarter = 0.5 * std::numbers::pi * static_cast<double>(rng.below(4));
    const std::uint64_t kind = rng.below(20);
    if (kind < 6) {
        return ellipse(cx, cy, r, r * rng.uniform(0.45, 1.0), quarter);
    }
    if (kind < 12) {
        return rectangle(cx, cy, r, r * rng.uniform(0.3, 1.0), quarter);
    }
    if (kind < 15) {
        // regular polygon resting on a flat edge
        const int sides = 3 + static_cast<int>(rng.below(6));
        return star(cx, cy, r, r, sides, std::numbers::pi / 2 + std::numbers::pi / sides);
    }
    if (kind < 17) {
        return heart(cx, cy, r * 0.85);
    }
    auto bar1 = rectangle(cx, cy, r, r * 0.28, 0.0);
    auto bar2 = rectangle(cx, cy, r * 0.28, r, 0.0);
    return [=](double x, double y) { return bar1(x, y) || bar2(x, y); };
}

Shape random_detail(Rng& rng, double canvas, double scale_lo, double scale_hi) {
    const double cx = rng.uniform(0.2, 0.8) * canvas;
    const double cy = rng.uniform(0.2, 0.8) * canvas;
    const double r = rng.uniform(scale_lo, scale_hi) * canvas;
    const double angle = 0.25 * std::numbers::pi * static_cast<double>(rng.below(4));
    switch (rng.below(4)) {
        case 0: return ellipse(cx, cy, r, r * rng.uniform(0.5, 1.0), angle);
        case 1: return rectangle(cx, cy, r, r * rng.uniform(0.25, 1.0), angle);
        case 2: return star(cx, cy, r, r * rng.uniform(0.4, 0.65), 5, angle);
        default: return star(cx, cy, r, r, 3 + static_cast<int>(rng.below(4)), angle);
    }
}

}  // namespace

RgbaImage render_icon(std::uint64_t seed, int canvas) {
    Rng rng(seed);
    const double size = canvas;
    std::vector<Shape> ink;
    std::vector<Shape> holes;
    ink.push_back(random_body(rng, size));
    if (rng.uniform01() < 0.5) {
        ink.push_back(random_body(rng, size));
    }
    const auto details = rng.below(3);
    for (std::uint64_t i = 0; i < details; ++i) {
        ink.push_back(random_detail(rng, size, 0.06, 0.14));
    }
    const auto cutouts = rng.below(3);
    for (std::uint64_t i = 0; i < cutouts; ++i) {
        holes.push_back(random_detail(rng, size, 0.04, 0.10));
    }
    if (rng.uniform01() < 0.3) {
        // ring-like icon
        const double r = rng.uniform(0.08, 0.16) * size;
        holes.push_back(ellipse(size / 2, size / 2, r, r, 0.0));
    }

    RgbaImage img(canvas, canvas);
    constexpr std::array<double, 2> offsets{0.25, 0.75};
    for (int y = 0; y < canvas; ++y) {
        for (int x = 0; x < canvas; ++x) {
            int covered = 0;
            for (double oy : offsets) {
                for (double ox : offsets) {
                    const double px = x + ox;
                    const double py = y + oy;
                    bool on = std::any_of(ink.begin(), ink.end(), [&](const Shape& s) { return s(px, py); });
                    if (on && std::any_of(holes.begin(), holes.end(), [&](const Shape& s) { return s(px, py); })) {
                        on = false;
                    }
                    covered += on ? 1 : 0;
                }
            }
            std::uint8_t* px = &img.pixels[(static_cast<std::size_t>(y) * canvas + x) * 4];
            px[0] = px[1] = px[2] = 0;
            px[3] = static_cast<std::uint8_t>(covered * 255 / 4);
        }
    }
    return img;
}

std::shared_ptr<MemoryPool> make_synthetic_pool(std::size_t count, std::uint64_t seed, int canvas) {
    auto pool = std::make_shared<MemoryPool>();
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "icon_%04zu.png", i);
        pool->add(name, encode_png(render_icon(derive_seed(seed, i), canvas)));
    }
    return pool;
}

void write_synthetic_pool(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed, int canvas) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "icon_%04zu.png", i);
        write_file_bytes(dir / name, encode_png(render_icon(derive_seed(seed, i), canvas)));
    }
}

}  // namespace captchastar
