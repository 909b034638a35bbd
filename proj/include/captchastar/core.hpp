#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace captchastar {

/// Drawable-space coordinates in pixels, origin at the top-left corner.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double euclidean_distance(Point a, Point b);

/// The fixed 300x300 surface stars are drawn on.
struct DrawableSpace {
    static constexpr int side = 300;
    /// Solutions are drawn from [margin, side - margin] on both axes.
    static constexpr int solution_margin = 5;
    static constexpr int solution_min = solution_margin;
    static constexpr int solution_max = side - solution_margin;
};

enum class SolutionPolicy { any_of, all_of };

std::string_view to_string(SolutionPolicy policy);
SolutionPolicy parse_solution_policy(std::string_view text);

/// Generation knobs. Defaults are the hardened T2 configuration.
struct GenParams {
    double psi = 70.0;       ///< noisy stars, percent of original stars
    double delta = 7.0;      ///< sensitivity; coefficients lie in [-delta/10, delta/10]
    int nsol = 1;
    int pic_size = 210;      ///< max(width, height) of the picture after resize
    bool rotation = false;
    double tolerance = 5.0;  ///< pass iff distance to a solution < tolerance
    SolutionPolicy solution_policy = SolutionPolicy::any_of;

    static constexpr int min_pic_size = 16;
    static constexpr int max_pic_size = 290;

    friend bool operator==(const GenParams&, const GenParams&) = default;
};

/// Raised for out-of-range or malformed generation parameters.
class ParamError : public std::invalid_argument {
public:
    ParamError(std::string field, const std::string& message)
        : std::invalid_argument(message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Partially specified parameters, e.g. an API request body. Missing fields
/// take the value of `base`.
struct GenParamsInput {
    std::optional<double> psi;
    std::optional<double> delta;
    std::optional<int> nsol;
    std::optional<int> pic_size;
    std::optional<bool> rotation;
    std::optional<double> tolerance;
    std::optional<SolutionPolicy> solution_policy;
};

GenParams validate_params(const GenParamsInput& raw, const GenParams& base = {});
GenParams validate_params(const GenParams& params);

}  // namespace captchastar
