#include "captchastar/ml/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "captchastar/ml/binary_io.hpp"
#include "captchastar/rng.hpp"

namespace captchastar::ml {

void Dataset::add(std::span<const double> features, int label) {
    if (dim == 0 && y.empty()) {
        dim = features.size();
    }
    if (features.size() != dim) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label != 0 ? 1 : 0);
}

std::vector<double> balanced_weights(const std::vector<int>& labels) {
    std::size_t pos = 0;
    for (int l : labels) {
        pos += l != 0 ? 1U : 0U;
    }
    const std::size_t neg = labels.size() - pos;
    const double n = static_cast<double>(labels.size());
    const double wp = pos > 0 ? n / (2.0 * static_cast<double>(pos)) : 0.0;
    const double wn = neg > 0 ? n / (2.0 * static_cast<double>(neg)) : 0.0;
    std::vector<double> w(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        w[i] = labels[i] != 0 ? wp : wn;
    }
    return w;
}

namespace {

void require_trainable(const Dataset& data) {
    if (data.size() == 0 || data.dim == 0) {
        throw std::invalid_argument("cannot fit a classifier on an empty dataset");
    }
    if (data.x.size() != data.size() * data.dim) {
        throw std::invalid_argument("dataset matrix has the wrong size");
    }
    const auto positives = std::count(data.y.begin(), data.y.end(), 1);
    if (positives == 0 || static_cast<std::size_t>(positives) == data.size()) {
        throw std::invalid_argument("training data needs both classes");
    }
}

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- logistic

void LogisticRegression::fit(const Dataset& data) {
    require_trainable(data);
    const std::size_t n = data.size();
    const std::size_t d = data.dim;
    mean_.assign(d, 0.0);
    scale_.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mean_[j] += data.x[i * d + j];
        }
    }
    for (double& m : mean_) {
        m /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = data.x[i * d + j] - mean_[j];
            scale_[j] += c * c;
        }
    }
    for (double& s : scale_) {
        s = std::sqrt(s / static_cast<double>(n));
        if (s < 1e-12) {
            s = 1.0;
        }
    }

    // Column 0 is the intercept.
    Eigen::MatrixXd X(n, d + 1);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            X(i, j + 1) = (data.x[i * d + j] - mean_[j]) / scale_[j];
        }
        y(i) = data.y[i];
    }
    const std::vector<double> cw = balanced_weights(data.y);
    Eigen::VectorXd w = Eigen::VectorXd::Map(cw.data(), static_cast<Eigen::Index>(n));
    const double total_w = w.sum();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
    Eigen::MatrixXd reg = Eigen::MatrixXd::Identity(d + 1, d + 1) * options_.l2 * total_w;
    reg(0, 0) = 0.0;
    for (int iter = 0; iter < options_.max_iterations; ++iter) {
        const Eigen::VectorXd z = X * beta;
        Eigen::VectorXd p(n);
        Eigen::VectorXd s(n);
        for (std::size_t i = 0; i < n; ++i) {
            p(i) = sigmoid(z(i));
            s(i) = w(i) * std::max(p(i) * (1.0 - p(i)), 1e-10);
        }
        const Eigen::VectorXd grad = X.transpose() * (w.cwiseProduct(p - y)) + reg * beta;
        const Eigen::MatrixXd hess = X.transpose() * s.asDiagonal() * X + reg +
                                     Eigen::MatrixXd::Identity(d + 1, d + 1) * 1e-9 * total_w;
        const Eigen::VectorXd step = hess.ldlt().solve(grad);
        beta -= step;
        if (step.lpNorm<Eigen::Infinity>() < options_.tolerance) {
            break;
        }
    }
    bias_ = beta(0);
    weights_.assign(beta.data() + 1, beta.data() + 1 + d);
}

double LogisticRegression::predict(std::span<const double> features) const {
    if (features.size() != weights_.size()) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    double z = bias_;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        z += weights_[j] * (features[j] - mean_[j]) / scale_[j];
    }
    return sigmoid(z);
}

void LogisticRegression::save(std::ostream& os) const {
    io::put_f64(os, options_.l2);
    io::put_f64s(os, mean_);
    io::put_f64s(os, scale_);
    io::put_f64s(os, weights_);
    io::put_f64(os, bias_);
}

void LogisticRegression::load(std::istream& is) {
    options_.l2 = io::get_f64(is);
    mean_ = io::get_f64s(is);
    scale_ = io::get_f64s(is);
    weights_ = io::get_f64s(is);
    bias_ = io::get_f64(is);
    if (mean_.size() != weights_.size() || scale_.size() != weights_.size()) {
        throw io::FormatError("logistic model arrays disagree in length");
    }
}

// ------------------------------------------------------------------ forest

namespace {

struct TreeBuilder {
    const Dataset& data;
    const std::vector<double>& weight;  // per sample, includes bootstrap multiplicity
    const ForestOptions& opt;
    int max_features;
    Rng& rng;
    std::vector<RandomForest::Node> nodes;
    std::vector<std::size_t> feature_order;

    double feature(std::size_t i, std::size_t f) const { return data.x[i * data.dim + f]; }

    std::int32_t build(std::vector<std::size_t>& idx, int depth) {
        double wp = 0.0;
        double wt = 0.0;
        for (std::size_t i : idx) {
            wt += weight[i];
            wp += data.y[i] != 0 ? weight[i] : 0.0;
        }
        const auto self = static_cast<std::int32_t>(nodes.size());
        nodes.push_back({});
        nodes[self].value = wt > 0 ? wp / wt : 0.0;
        const bool pure = wp <= 0.0 || wp >= wt;
        if (pure || depth >= opt.max_depth || idx.size() < 2 * static_cast<std::size_t>(opt.min_leaf)) {
            return self;
        }

        const double parent = wt - (wp * wp + (wt - wp) * (wt - wp)) / wt;
        double best_gain = 1e-12;
        std::int32_t best_f = -1;
        double best_thr = 0.0;

        // Partial Fisher-Yates for the candidate features.
        for (int k = 0; k < max_features; ++k) {
            const std::size_t j = k + rng.below(feature_order.size() - k);
            std::swap(feature_order[k], feature_order[j]);
        }
        std::vector<std::size_t> sorted = idx;
        for (int k = 0; k < max_features; ++k) {
            const std::size_t f = feature_order[k];
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return feature(a, f) < feature(b, f);
            });
            double lw = 0.0;
            double lp = 0.0;
            std::size_t lcount = 0;
            for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
                const std::size_t i = sorted[s];
                lw += weight[i];
                lp += data.y[i] != 0 ? weight[i] : 0.0;
                ++lcount;
                const double v = feature(i, f);
                const double next = feature(sorted[s + 1], f);
                if (v == next) {
                    continue;
                }
                if (lcount < static_cast<std::size_t>(opt.min_leaf) ||
                    sorted.size() - lcount < static_cast<std::size_t>(opt.min_leaf)) {
                    continue;
                }
                const double rw = wt - lw;
                const double rp = wp - lp;
                if (lw <= 0.0 || rw <= 0.0) {
                    continue;
                }
                const double gl = lw - (lp * lp + (lw - lp) * (lw - lp)) / lw;
                const double gr = rw - (rp * rp + (rw - rp) * (rw - rp)) / rw;
                const double gain = parent - gl - gr;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = static_cast<std::int32_t>(f);
                    best_thr = 0.5 * (v + next);
                }
            }
        }
        if (best_f < 0) {
            return self;
        }
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : idx) {
            (feature(i, static_cast<std::size_t>(best_f)) <= best_thr ? left : right).push_back(i);
        }
        std::vector<std::size_t>().swap(idx);
        std::vector<std::size_t>().swap(sorted);
        const std::int32_t l = build(left, depth + 1);
        const std::int32_t r = build(right, depth + 1);
        nodes[self].feature = best_f;
        nodes[self].threshold = best_thr;
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }
};

}  // namespace

void RandomForest::fit(const Dataset& data) {
    require_trainable(data);
    if (options_.trees <= 0) {
        throw std::invalid_argument("forest needs at least one tree");
    }
    dim_ = data.dim;
    const std::size_t n = data.size();
    int mtry = options_.max_features;
    if (mtry <= 0) {
        mtry = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim_))));
    }
    mtry = std::clamp(mtry, 1, static_cast<int>(dim_));
    const std::vector<double> cw = balanced_weights(data.y);

    Rng rng(options_.seed);
    trees_.clear();
    for (int t = 0; t < options_.trees; ++t) {
        std::vector<double> weight(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            weight[rng.below(n)] += 1.0;
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (weight[i] > 0.0) {
                weight[i] *= cw[i];
                idx.push_back(i);
            }
        }
        TreeBuilder b{data, weight, options_, mtry, rng, {}, {}};
        b.feature_order.resize(dim_);
        std::iota(b.feature_order.begin(), b.feature_order.end(), std::size_t{0});
        b.build(idx, 0);
        trees_.push_back(std::move(b.nodes));
    }
}

double RandomForest::predict(std::span<const double> features) const {
    if (features.size() != dim_) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    if (trees_.empty()) {
        throw std::logic_error("forest has not been fitted");
    }
    double sum = 0.0;
    for (const auto& tree : trees_) {
        std::int32_t at = 0;
        while (tree[static_cast<std::size_t>(at)].feature >= 0) {
            const Node& nd = tree[static_cast<std::size_t>(at)];
            at = features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        sum += tree[static_cast<std::size_t>(at)].value;
    }
    return sum / static_cast<double>(trees_.size());
}

void RandomForest::save(std::ostream& os) const {
    io::put_u64(os, dim_);
    io::put_u32(os, static_cast<std::uint32_t>(trees_.size()));
    for (const auto& tree : trees_) {
        io::put_u32(os, static_cast<std::uint32_t>(tree.size()));
        for (const Node& nd : tree) {
            io::put_i32(os, nd.feature);
            io::put_f64(os, nd.threshold);
            io::put_i32(os, nd.left);
            io::put_i32(os, nd.right);
            io::put_f64(os, nd.value);
        }
    }
}

void RandomForest::load(std::istream& is) {
    dim_ = io::get_u64(is);
    const std::uint32_t count = io::get_u32(is);
    if (count == 0 || count > 100000) {
        throw io::FormatError("implausible tree count");
    }
    trees_.assign(count, {});
    for (auto& tree : trees_) {
        const std::uint32_t size = io::get_u32(is);
        if (size == 0 || size > (1U << 26)) {
            throw io::FormatError("implausible tree size");
        }
        tree.resize(size);
        for (Node& nd : tree) {
            nd.feature = io::get_i32(is);
            nd.threshold = io::get_f64(is);
            nd.left = io::get_i32(is);
            nd.right = io::get_i32(is);
            nd.value = io::get_f64(is);
        }
        for (const Node& nd : tree) {
            if (nd.feature < 0) {
                continue;
            }
            if (static_cast<std::size_t>(nd.feature) >= dim_ || nd.left <= 0 || nd.right <= 0 ||
                static_cast<std::uint32_t>(nd.left) >= size || static_cast<std::uint32_t>(nd.right) >= size) {
                throw io::FormatError("corrupt tree node");
            }
        }
    }
}

std::unique_ptr<Classifier> make_classifier(const std::string& kind, std::uint64_t seed) {
    if (kind == "logistic") {
        return std::make_unique<LogisticRegression>();
    }
    if (kind == "forest") {
        ForestOptions o;
        o.seed = seed;
        return std::make_unique<RandomForest>(o);
    }
    return nullptr;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores and labels differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Mann-Whitney U with mid-ranks.
    double rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] != 0) {
                rank_sum += mid;
                ++pos;
            }
        }
        i = j;
    }
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("AUC needs both classes");
    }
    const double np = static_cast<double>(pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(neg));
}

}  // namespace captchastar::ml
