#pragma once

#include <chrono>
#include <functional>
#include <vector>

#include "captchastar/core.hpp"
#include "captchastar/generator.hpp"
#include "captchastar/ml/classifier.hpp"
#include "captchastar/ml/tiles.hpp"

namespace captchastar::ml {

inline constexpr int kDefaultLambda = 5;

/// {(lambda*i, lambda*j) : 0 <= i, j <= 300/lambda}, y-major with x fastest.
/// Includes coordinate 300.
std::vector<Point> lambda_grid(int lambda = kDefaultLambda);

/// Score of one state, given its cursor and feature vector.
using StateScorer = std::function<double(Point cursor, const FeatureVector& features)>;

struct MlSolveOptions {
    int lambda = kDefaultLambda;
    unsigned threads = 0;
    int star_side = 3;
};

struct MlResult {
    Point cursor;
    double score = 0.0;
    std::size_t states_evaluated = 0;
    std::chrono::duration<double> wall_time{};
};

/// Render and featurize every grid state and return the highest-scoring
/// cursor; ties go to the lexicographically smallest (x, then y).
MlResult ml_solve(const ClientChallenge& challenge, const StateScorer& scorer, const ReferenceTiles& refs,
                  const MlSolveOptions& options = {});

MlResult ml_solve(const ClientChallenge& challenge, const Classifier& model, const ReferenceTiles& refs,
                  const MlSolveOptions& options = {});

}  // namespace captchastar::ml
