#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "captchastar/generator.hpp"

namespace captchastar::wire {

/// Binary challenge layout, all integers and floats little-endian:
///
///   offset  size  field
///   0       4     magic "CSTR"
///   4       1     version (1)
///   5       3     reserved, zero
///   8       4     star count n (uint32)
///   12      16    challenge id (raw 128 bits)
///   28      24*n  stars: m_xx m_xy c_x m_yx m_yy c_y as IEEE-754 binary32
inline constexpr std::size_t kHeaderSize = 28;
inline constexpr std::size_t kStarRecordSize = 24;
inline constexpr std::uint8_t kVersion = 1;

enum class Encoding { binary, json };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view text);

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_binary(const ClientChallenge& challenge);
ClientChallenge decode_binary(std::span<const std::uint8_t> bytes);

/// JSON object {"id", "encoding":"json", "stars":[{m_xx,m_xy,c_x,m_yx,m_yy,c_y}...]}
/// carrying the same binary32-rounded values as the binary form.
std::string encode_json(const ClientChallenge& challenge);
ClientChallenge decode_json(std::string_view text);

/// The challenge exactly as a client reconstructs it from the wire: every
/// parameter rounded to binary32.
ClientChallenge as_received(const ClientChallenge& challenge);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace captchastar::wire
