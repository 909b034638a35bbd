#pragma once

#include <cstdint>
#include <string>

#include "captchastar/pool.hpp"

namespace captchastar {

struct GoldenOptions {
    std::uint64_t seed = 2024;
    std::size_t challenges = 10;
    std::size_t cursors_per_challenge = 10;
    int pic_size = 60;
};

/// Reference star positions for client parity tests, as JSON:
/// {"version", "star_side", "cases": [{"challenge": <wire JSON>, "binary_b64",
///   "states": [{"cursor": [x, y], "positions": [[x, y], ...]}]}]}.
/// Positions are computed from the binary32-rounded parameters a client
/// receives. Cursors are integers in [0, 300].
std::string golden_vectors(const PicturePool& pool, const GoldenOptions& options = {});

}  // namespace captchastar
