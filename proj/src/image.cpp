#include "captchastar/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

namespace captchastar {

RgbaImage::RgbaImage(int w, int h)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4, 0) {}

GrayImage::GrayImage(int w, int h, float fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

BinaryImage::BinaryImage(int w, int h)
    : width(w), height(h), black(static_cast<std::size_t>(w) * h, 0) {}

std::size_t BinaryImage::black_count() const {
    return static_cast<std::size_t>(std::count(black.begin(), black.end(), std::uint8_t{1}));
}

RgbaImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()) == 0) {
        throw ImageError(std::string("png decode failed: ") + img.message);
    }
    img.format = PNG_FORMAT_RGBA;
    RgbaImage out(static_cast<int>(img.width), static_cast<int>(img.height));
    if (png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr) == 0) {
        std::string msg = img.message;
        png_image_free(&img);
        throw ImageError("png decode failed: " + msg);
    }
    if (out.width == 0 || out.height == 0) {
        throw ImageError("png has zero extent");
    }
    return out;
}

std::vector<std::uint8_t> encode_png(const RgbaImage& image) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (png_image_write_get_memory_size(img, size, 0, image.pixels.data(), 0, nullptr) == 0) {
        throw ImageError(std::string("png encode failed: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr) == 0) {
        throw ImageError(std::string("png encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ImageError("cannot write " + path.string());
    }
}

GrayImage composite_luminance(const RgbaImage& image) {
    GrayImage out(image.width, image.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::uint8_t* px = &image.pixels[i * 4];
        const float a = px[3] / 255.0f;
        const float lum = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
        out.values[i] = lum * a + 255.0f * (1.0f - a);
    }
    return out;
}

namespace {

// Area-average weights for shrinking one axis from `src` to `dst` samples.
struct AxisWeights {
    std::vector<int> first;
    std::vector<std::vector<float>> weights;
};

AxisWeights area_weights(int src, int dst) {
    AxisWeights w;
    w.first.resize(dst);
    w.weights.resize(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int o = 0; o < dst; ++o) {
        const double lo = o * scale;
        const double hi = (o + 1) * scale;
        const int i0 = static_cast<int>(std::floor(lo));
        const int i1 = std::min(src, static_cast<int>(std::ceil(hi)));
        w.first[o] = i0;
        for (int i = i0; i < i1; ++i) {
            const double cover = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
            w.weights[o].push_back(static_cast<float>(cover / scale));
        }
    }
    return w;
}

float bilinear(const GrayImage& img, double x, double y, float fill) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto sample = [&](int sx, int sy) -> float {
        if (sx < 0 || sy < 0 || sx >= img.width || sy >= img.height) {
            return fill;
        }
        return img.at(sx, sy);
    };
    const double top = sample(x0, y0) * (1 - fx) + sample(x0 + 1, y0) * fx;
    const double bottom = sample(x0, y0 + 1) * (1 - fx) + sample(x0 + 1, y0 + 1) * fx;
    return static_cast<float>(top * (1 - fy) + bottom * fy);
}

GrayImage resize_bilinear(const GrayImage& image, int w, int h) {
    GrayImage out(w, h);
    const double sx = static_cast<double>(image.width) / w;
    const double sy = static_cast<double>(image.height) / h;
    for (int y = 0; y < h; ++y) {
        const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
        for (int x = 0; x < w; ++x) {
            const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
            out.at(x, y) = bilinear(image, src_x, src_y, 255.0f);
        }
    }
    return out;
}

GrayImage resize_area(const GrayImage& image, int w, int h) {
    const AxisWeights wx = area_weights(image.width, w);
    const AxisWeights wy = area_weights(image.height, h);
    GrayImage horizontal(w, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            const auto& ws = wx.weights[x];
            for (std::size_t k = 0; k < ws.size(); ++k) {
                acc += ws[k] * image.at(wx.first[x] + static_cast<int>(k), y);
            }
            horizontal.at(x, y) = acc;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const auto& ws = wy.weights[y];
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (std::size_t k = 0; k < ws.size(); ++k) {
                acc += ws[k] * horizontal.at(x, wy.first[y] + static_cast<int>(k));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

}  // namespace

GrayImage resize_to_fit(const GrayImage& image, int max_side) {
    if (image.width <= 0 || image.height <= 0) {
        throw ImageError("cannot resize an empty image");
    }
    const int longest = std::max(image.width, image.height);
    auto scaled = [&](int v) {
        return std::max(1, static_cast<int>(std::lround(static_cast<double>(v) * max_side / longest)));
    };
    const int w = image.width >= image.height ? max_side : scaled(image.width);
    const int h = image.height >= image.width ? max_side : scaled(image.height);
    if (w == image.width && h == image.height) {
        return image;
    }
    if (w <= image.width && h <= image.height) {
        return resize_area(image, w, h);
    }
    return resize_bilinear(image, w, h);
}

GrayImage rotate(const GrayImage& image, double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const int w = std::max(1, static_cast<int>(std::ceil(std::abs(image.width * c) + std::abs(image.height * s) - 1e-9)));
    const int h = std::max(1, static_cast<int>(std::ceil(std::abs(image.width * s) + std::abs(image.height * c) - 1e-9)));
    GrayImage out(w, h);
    const double cx_src = image.width / 2.0;
    const double cy_src = image.height / 2.0;
    const double cx_dst = w / 2.0;
    const double cy_dst = h / 2.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Inverse mapping from destination pixel centre back into the source.
            const double dx = x + 0.5 - cx_dst;
            const double dy = y + 0.5 - cy_dst;
            const double sx = c * dx + s * dy + cx_src - 0.5;
            const double sy = -s * dx + c * dy + cy_src - 0.5;
            out.at(x, y) = bilinear(image, sx, sy, 255.0f);
        }
    }
    return out;
}

BinaryImage binarize(const GrayImage& image, float threshold) {
    BinaryImage out(image.width, image.height);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        out.black[i] = image.values[i] < threshold ? 1 : 0;
    }
    return out;
}

}  // namespace captchastar
