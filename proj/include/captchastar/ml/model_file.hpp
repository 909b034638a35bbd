#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "captchastar/ml/classifier.hpp"
#include "captchastar/ml/tiles.hpp"

namespace captchastar::ml {

inline constexpr char kModelMagic[8] = {'C', 'S', 'T', 'R', 'M', 'O', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

/// A trained attack: reference tiles plus classifier, with free-form
/// metadata (JSON text describing the training corpus).
struct Model {
    ReferenceTiles refs;
    std::unique_ptr<Classifier> classifier;
    std::string metadata;
};

/// Layout, little-endian: magic[8], u32 version, u32 omega, u32 tile count,
/// tile words (u64 each), string kind, string metadata, u64 blob size, blob.
/// Strings are u32 length + bytes.
void save_model(const Model& model, std::ostream& os);
Model load_model(std::istream& is);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace captchastar::ml
