#pragma once

#include <array>
#include <cstdint>

namespace captchastar {

/// Portable seedable generator: xoshiro256** with splitmix64 state expansion.
/// All distributions are implemented here rather than through <random> so
/// that a seed produces the same challenge on every platform and library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer on [lo, hi] inclusive. Requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Unbiased integer on [0, bound). Requires bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Derive an independent stream seed from a master seed and an index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace captchastar
