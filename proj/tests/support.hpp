#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "captchastar/generator.hpp"
#include "captchastar/pool.hpp"
#include "captchastar/rng.hpp"

namespace testing {

/// Small procedural pool shared by the unit tests.
inline std::shared_ptr<const captchastar::MemoryPool> shared_small_pool() {
    static const std::shared_ptr<const captchastar::MemoryPool> pool = captchastar::make_synthetic_pool(24, 42, 128);
    return pool;
}

inline const captchastar::MemoryPool& small_pool() { return *shared_small_pool(); }

/// Params with a small picture so generation and solving stay fast.
inline captchastar::GenParams small_params(double psi = 70.0, double delta = 7.0, int pic_size = 60) {
    captchastar::GenParams p;
    p.psi = psi;
    p.delta = delta;
    p.pic_size = pic_size;
    return p;
}

inline captchastar::GenerateOptions fixed_id(const std::string& id = "00000000000000000000000000000001") {
    captchastar::GenerateOptions o;
    o.id_source = [id] { return id; };
    return o;
}

inline captchastar::StarTrajectory random_star(captchastar::Rng& rng, double bound = 0.7) {
    captchastar::StarTrajectory s;
    s.m_xx = rng.uniform(-bound, bound);
    s.m_xy = rng.uniform(-bound, bound);
    s.m_yx = rng.uniform(-bound, bound);
    s.m_yy = rng.uniform(-bound, bound);
    s.c_x = rng.uniform(-100.0, 400.0);
    s.c_y = rng.uniform(-100.0, 400.0);
    return s;
}

}  // namespace testing
