#include "captchastar/ml/model_file.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "captchastar/ml/binary_io.hpp"

namespace captchastar::ml {

void save_model(const Model& model, std::ostream& os) {
    if (!model.classifier) {
        throw std::invalid_argument("model has no classifier");
    }
    os.write(kModelMagic, sizeof kModelMagic);
    io::put_u32(os, kModelVersion);
    io::put_u32(os, static_cast<std::uint32_t>(model.refs.omega));
    io::put_u32(os, static_cast<std::uint32_t>(model.refs.tiles.size()));
    for (const Tile& t : model.refs.tiles) {
        for (std::uint64_t w : t.words()) {
            io::put_u64(os, w);
        }
    }
    io::put_string(os, model.classifier->kind());
    io::put_string(os, model.metadata);
    std::ostringstream blob;
    model.classifier->save(blob);
    const std::string bytes = blob.str();
    io::put_u64(os, bytes.size());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
        throw std::runtime_error("failed to write model");
    }
}

Model load_model(std::istream& is) {
    char magic[sizeof kModelMagic];
    io::read_exact(is, magic, sizeof magic);
    if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
        throw io::FormatError("not a model file");
    }
    const std::uint32_t version = io::get_u32(is);
    if (version != kModelVersion) {
        throw io::FormatError("unsupported model version " + std::to_string(version));
    }
    Model m;
    m.refs.omega = static_cast<int>(io::get_u32(is));
    if (!valid_omega(m.refs.omega) || m.refs.omega > 64) {
        throw io::FormatError("invalid tile side in model");
    }
    const std::uint32_t count = io::get_u32(is);
    if (count == 0 || count > 100000) {
        throw io::FormatError("implausible reference tile count");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        Tile t(m.refs.omega);
        for (std::uint64_t& w : t.words()) {
            w = io::get_u64(is);
        }
        m.refs.tiles.push_back(std::move(t));
    }
    const std::string kind = io::get_string(is, 64);
    m.metadata = io::get_string(is);
    m.classifier = make_classifier(kind);
    if (!m.classifier) {
        throw io::FormatError("unknown classifier kind '" + kind + "'");
    }
    const std::uint64_t size = io::get_u64(is);
    if (size > (std::uint64_t{1} << 32)) {
        throw io::FormatError("implausible classifier blob size");
    }
    std::string bytes(size, '\0');
    io::read_exact(is, bytes.data(), bytes.size());
    std::istringstream blob(bytes);
    m.classifier->load(blob);
    return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    save_model(model, os);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return load_model(is);
}

}  // namespace captchastar::ml
