#include "captchastar/core.hpp"

#include <cmath>

namespace captchastar {

double euclidean_distance(Point a, Point b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

std::string_view to_string(SolutionPolicy policy) {
    return policy == SolutionPolicy::all_of ? "all-of" : "any-of";
}

SolutionPolicy parse_solution_policy(std::string_view text) {
    if (text == "any-of") {
        return SolutionPolicy::any_of;
    }
    if (text == "all-of") {
        return SolutionPolicy::all_of;
    }
    throw ParamError("solution_policy", "solution_policy must be 'any-of' or 'all-of'");
}

GenParams validate_params(const GenParamsInput& raw, const GenParams& base) {
    GenParams p = base;
    if (raw.psi) p.psi = *raw.psi;
    if (raw.delta) p.delta = *raw.delta;
    if (raw.nsol) p.nsol = *raw.nsol;
    if (raw.pic_size) p.pic_size = *raw.pic_size;
    if (raw.rotation) p.rotation = *raw.rotation;
    if (raw.tolerance) p.tolerance = *raw.tolerance;
    if (raw.solution_policy) p.solution_policy = *raw.solution_policy;
    return validate_params(p);
}

GenParams validate_params(const GenParams& p) {
    if (!std::isfinite(p.psi) || p.psi < 0.0) {
        throw ParamError("psi", "psi must be non-negative");
    }
    if (!std::isfinite(p.delta) || p.delta <= 0.0) {
        throw ParamError("delta", "delta must be positive");
    }
    if (p.nsol < 1) {
        throw ParamError("nsol", "nsol must be at least 1");
    }
    if (p.pic_size < GenParams::min_pic_size || p.pic_size > GenParams::max_pic_size) {
        throw ParamError("pic_size", "pic_size must lie in [16, 290]");
    }
    if (!std::isfinite(p.tolerance) || p.tolerance <= 0.0) {
        throw ParamError("tolerance", "tolerance must be positive");
    }
    return p;
}

}  // namespace captchastar
