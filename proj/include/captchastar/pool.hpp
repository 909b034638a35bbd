#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "captchastar/image.hpp"

namespace captchastar {

/// Read-only collection of candidate pictures. Implementations must be safe
/// to read from many threads at once.
class PicturePool {
public:
    virtual ~PicturePool() = default;
    virtual std::size_t size() const = 0;
    virtual std::string name(std::size_t index) const = 0;
    /// Encoded image bytes of one picture.
    virtual std::vector<std::uint8_t> bytes(std::size_t index) const = 0;
};

/// Directory of .png files, enumerated once at construction.
class DirectoryPool final : public PicturePool {
public:
    explicit DirectoryPool(std::filesystem::path dir);

    std::size_t size() const override { return files_.size(); }
    std::string name(std::size_t index) const override;
    std::vector<std::uint8_t> bytes(std::size_t index) const override;

    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

/// Pictures already held in memory, e.g. generated icons or test fixtures.
class MemoryPool final : public PicturePool {
public:
    struct Entry {
        std::string name;
        std::vector<std::uint8_t> bytes;
    };

    MemoryPool() = default;
    explicit MemoryPool(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    void add(std::string name, std::vector<std::uint8_t> bytes);

    std::size_t size() const override { return entries_.size(); }
    std::string name(std::size_t index) const override { return entries_.at(index).name; }
    std::vector<std::uint8_t> bytes(std::size_t index) const override { return entries_.at(index).bytes; }

private:
    std::vector<Entry> entries_;
};

/// Procedural two-colour icon: black ink on a transparent background built
/// from unions and cut-outs of simple primitives.
RgbaImage render_icon(std::uint64_t seed, int canvas = 256);

/// In-memory pool of `count` PNG-encoded procedural icons.
std::shared_ptr<MemoryPool> make_synthetic_pool(std::size_t count, std::uint64_t seed, int canvas = 256);

/// Write `count` procedural icons as icon_NNNN.png into `dir`.
void write_synthetic_pool(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed,
                          int canvas = 256);

}  // namespace captchastar
