#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace captchastar::ml::io {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
    }
    os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
    }
    os.write(b, 8);
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_f64s(std::ostream& os, const std::vector<double>& v) {
    put_u64(os, v.size());
    for (double d : v) {
        put_f64(os, d);
    }
}

inline void read_exact(std::istream& is, char* out, std::size_t n) {
    is.read(out, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw FormatError("unexpected end of model data");
    }
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    read_exact(is, reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    read_exact(is, reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }
inline std::int32_t get_i32(std::istream& is) { return static_cast<std::int32_t>(get_u32(is)); }

inline std::string get_string(std::istream& is, std::size_t limit = 1U << 24) {
    const std::uint32_t n = get_u32(is);
    if (n > limit) {
        throw FormatError("string field too long");
    }
    std::string s(n, '\0');
    read_exact(is, s.data(), n);
    return s;
}

inline std::vector<double> get_f64s(std::istream& is, std::size_t limit = 1U << 26) {
    const std::uint64_t n = get_u64(is);
    if (n > limit) {
        throw FormatError("array field too long");
    }
    std::vector<double> v(n);
    for (double& d : v) {
        d = get_f64(is);
    }
    return v;
}

}  // namespace captchastar::ml::io
