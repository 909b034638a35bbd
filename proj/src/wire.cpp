#include "captchastar/wire.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "json.hpp"

namespace captchastar::wire {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'S', 'T', 'R'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::array<std::uint8_t, 16> id_bytes(const std::string& id) {
    if (id.size() != 32) {
        throw WireError("challenge id must be 32 hex digits");
    }
    std::array<std::uint8_t, 16> out{};
    for (std::size_t i = 0; i < 16; ++i) {
        const int hi = hex_value(id[2 * i]);
        const int lo = hex_value(id[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw WireError("challenge id must be 32 hex digits");
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string id_string(const std::uint8_t* p) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (int i = 0; i < 16; ++i) {
        s.push_back(hex[p[i] >> 4]);
        s.push_back(hex[p[i] & 0xF]);
    }
    return s;
}

double round32(double v) { return static_cast<float>(v); }

}  // namespace

std::string_view to_string(Encoding e) { return e == Encoding::binary ? "binary" : "json"; }

Encoding parse_encoding(std::string_view text) {
    if (text == "binary") return Encoding::binary;
    if (text == "json") return Encoding::json;
    throw WireError("encoding must be 'binary' or 'json'");
}

std::vector<std::uint8_t> encode_binary(const ClientChallenge& ch) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + kStarRecordSize * ch.stars.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kVersion);
    out.insert(out.end(), 3, 0);
    put_u32(out, static_cast<std::uint32_t>(ch.stars.size()));
    const auto id = id_bytes(ch.id);
    out.insert(out.end(), id.begin(), id.end());
    for (const StarTrajectory& s : ch.stars) {
        put_f32(out, s.m_xx);
        put_f32(out, s.m_xy);
        put_f32(out, s.c_x);
        put_f32(out, s.m_yx);
        put_f32(out, s.m_yy);
        put_f32(out, s.c_y);
    }
    return out;
}

ClientChallenge decode_binary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
        throw WireError("not a challenge payload");
    }
    if (bytes[4] != kVersion) {
        throw WireError("unsupported payload version");
    }
    const std::uint32_t n = get_u32(bytes.data() + 8);
    if (bytes.size() != kHeaderSize + kStarRecordSize * static_cast<std::size_t>(n)) {
        throw WireError("payload size does not match star count");
    }
    ClientChallenge ch;
    ch.id = id_string(bytes.data() + 12);
    ch.stars.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint8_t* p = bytes.data() + kHeaderSize + kStarRecordSize * i;
        ch.stars.push_back({get_f32(p), get_f32(p + 4), get_f32(p + 8), get_f32(p + 12), get_f32(p + 16),
                            get_f32(p + 20)});
    }
    return ch;
}

std::string encode_json(const ClientChallenge& ch) {
    nlohmann::json stars = nlohmann::json::array();
    for (const StarTrajectory& s : ch.stars) {
        stars.push_back({{"m_xx", round32(s.m_xx)},
                         {"m_xy", round32(s.m_xy)},
                         {"c_x", round32(s.c_x)},
                         {"m_yx", round32(s.m_yx)},
                         {"m_yy", round32(s.m_yy)},
                         {"c_y", round32(s.c_y)}});
    }
    return nlohmann::json{{"id", ch.id}, {"encoding", "json"}, {"stars", std::move(stars)}}.dump();
}

ClientChallenge decode_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ClientChallenge ch;
        ch.id = j.at("id").get<std::string>();
        for (const auto& s : j.at("stars")) {
            if (s.size() != 6) {
                throw WireError("star record must have exactly six fields");
            }
            ch.stars.push_back({s.at("m_xx").get<double>(), s.at("m_xy").get<double>(), s.at("c_x").get<double>(),
                                s.at("m_yx").get<double>(), s.at("m_yy").get<double>(), s.at("c_y").get<double>()});
        }
        return ch;
    } catch (const nlohmann::json::exception& e) {
        throw WireError(std::string("malformed challenge json: ") + e.what());
    }
}

ClientChallenge as_received(const ClientChallenge& ch) {
    ClientChallenge out{ch.id, ch.stars};
    for (StarTrajectory& s : out.stars) {
        s = {round32(s.m_xx), round32(s.m_xy), round32(s.c_x), round32(s.m_yx), round32(s.m_yy), round32(s.c_y)};
    }
    return out;
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back(kB64[v & 63]);
    }
    if (const std::size_t rest = bytes.size() - i; rest > 0) {
        std::uint32_t v = bytes[i] << 16;
        if (rest == 2) v |= bytes[i + 1] << 8;
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(rest == 2 ? kB64[(v >> 6) & 63] : '=');
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) {
        throw WireError("base64 length must be a multiple of 4");
    }
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t v = 0;
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                ++pad;
                v <<= 6;
                continue;
            }
            const int d = value(c);
            if (d < 0 || pad > 0) {
                throw WireError("invalid base64");
            }
            v = (v << 6) | static_cast<std::uint32_t>(d);
        }
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

}  // namespace captchastar::wire
