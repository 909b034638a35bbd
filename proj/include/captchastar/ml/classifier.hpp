#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace captchastar::ml {

/// Row-major feature matrix with binary labels (1 = solution).
struct Dataset {
    std::size_t dim = 0;
    std::vector<double> x;
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
    void add(std::span<const double> features, int label);
};

/// Probabilistic binary classifier. Trained instances are immutable and may
/// be shared across threads.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string kind() const = 0;
    virtual void fit(const Dataset& data) = 0;
    /// Probability of the solution class, in [0, 1].
    virtual double predict(std::span<const double> features) const = 0;
    virtual void save(std::ostream& os) const = 0;
    virtual void load(std::istream& is) = 0;
};

/// Inverse-frequency weights so both classes carry equal total weight.
std::vector<double> balanced_weights(const std::vector<int>& labels);

struct LogisticOptions {
    double l2 = 1e-3;
    int max_iterations = 50;
    double tolerance = 1e-8;
};

/// L2-regularized logistic regression on standardized features, fitted by
/// Newton's method with balanced class weights.
class LogisticRegression final : public Classifier {
public:
    explicit LogisticRegression(LogisticOptions options = {}) : options_(options) {}
    std::string kind() const override { return "logistic"; }
    void fit(const Dataset& data) override;
    double predict(std::span<const double> features) const override;
    void save(std::ostream& os) const override;
    void load(std::istream& is) override;

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

private:
    LogisticOptions options_;
    std::vector<double> mean_;
    std::vector<double> scale_;
    std::vector<double> weights_;
    double bias_ = 0.0;
};

struct ForestOptions {
    int trees = 60;
    int max_depth = 24;
    int min_leaf = 1;
    int max_features = 0;  // 0 selects round(sqrt(dim))
    std::uint64_t seed = 1;
};

/// Bagged CART ensemble with weighted Gini splits; the score is the mean of
/// the per-tree weighted positive fractions at the reached leaves.
class RandomForest final : public Classifier {
public:
    explicit RandomForest(ForestOptions options = {}) : options_(options) {}
    std::string kind() const override { return "forest"; }
    void fit(const Dataset& data) override;
    double predict(std::span<const double> features) const override;
    void save(std::ostream& os) const override;
    void load(std::istream& is) override;

    std::size_t tree_count() const { return trees_.size(); }

    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;     // go left when x[feature] <= threshold
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };

private:
    ForestOptions options_;
    std::size_t dim_ = 0;
    std::vector<std::vector<Node>> trees_;
};

/// "logistic" or "forest"; nullptr for an unknown kind.
std::unique_ptr<Classifier> make_classifier(const std::string& kind, std::uint64_t seed = 1);

/// Area under the ROC curve, ties counted as one half. Throws if either class
/// is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace captchastar::ml
