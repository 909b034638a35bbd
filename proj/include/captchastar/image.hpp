#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace captchastar {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit straight-alpha RGBA raster, row-major.
struct RgbaImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // 4 * width * height

    RgbaImage() = default;
    RgbaImage(int w, int h);
};

/// Luminance raster in [0, 255], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 255.0f);

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Two-level picture; true marks an ink (black) pixel.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> black;

    BinaryImage() = default;
    BinaryImage(int w, int h);

    bool at(int x, int y) const { return black[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { black[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t black_count() const;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

RgbaImage decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const RgbaImage& image);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Rec.601 luminance after compositing over a white background.
GrayImage composite_luminance(const RgbaImage& image);

/// Aspect-preserving resize so that max(width, height) == max_side.
/// Area averaging when shrinking, bilinear when enlarging.
GrayImage resize_to_fit(const GrayImage& image, int max_side);

/// Rotate about the image centre onto a canvas large enough to hold the
/// whole rotated picture, filling uncovered area with white.
GrayImage rotate(const GrayImage& image, double degrees);

/// Black iff luminance < threshold.
BinaryImage binarize(const GrayImage& image, float threshold = 128.0f);

}  // namespace captchastar
