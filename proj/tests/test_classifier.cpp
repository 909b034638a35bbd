#include <cmath>
#include <sstream>

#include "captchastar/ml/classifier.hpp"
#include "captchastar/ml/binary_io.hpp"
#include "captchastar/ml/model_file.hpp"
#include "captchastar/rng.hpp"
#include "doctest.h"

using namespace captchastar;
using namespace captchastar::ml;

namespace {

// Two Gaussian-ish blobs in `dim` dimensions; positives are rarer.
Dataset blobs(Rng& rng, std::size_t n, std::size_t dim, double separation) {
    Dataset d;
    d.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = rng.uniform01() < 0.2 ? 1 : 0;
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            double g = 0;
            for (int s = 0; s < 6; ++s) {
                g += rng.uniform01();
            }
            x[k] = (g - 3.0) + (label && k < 3 ? separation : 0.0);
        }
        d.add(x, label);
    }
    return d;
}

// Positive iff exactly one of the first two features is above 0.5.
Dataset xor_data(Rng& rng, std::size_t n) {
    Dataset d;
    d.dim = 4;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x{rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
        d.add(x, ((x[0] > 0.5) != (x[1] > 0.5)) ? 1 : 0);
    }
    return d;
}

double auc_on(const Classifier& c, const Dataset& d) {
    std::vector<double> s;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s.push_back(c.predict(d.row(i)));
    }
    return roc_auc(s, d.y);
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("roc_auc examples") {
    const std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> labels{0, 0, 1, 1};
    CHECK(roc_auc(perfect, labels) == 1.0);
    const std::vector<double> reversed{0.9, 0.8, 0.2, 0.1};
    CHECK(roc_auc(reversed, labels) == 0.0);
    const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
    CHECK(roc_auc(flat, labels) == 0.5);
    // One inversion out of four positive/negative pairs.
    const std::vector<double> one_swap{0.1, 0.6, 0.5, 0.9};
    CHECK(roc_auc(one_swap, labels) == 0.75);
    const std::vector<int> single_class{1, 1, 1, 1};
    CHECK_THROWS_AS(roc_auc(perfect, single_class), std::invalid_argument);
}

TEST_CASE("roc_auc equals the pairwise definition") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s;
        std::vector<int> l;
        const int n = static_cast<int>(rng.uniform_int(2, 80));
        for (int i = 0; i < n; ++i) {
            s.push_back(std::floor(rng.uniform(0, 10)));  // plenty of ties
            l.push_back(i < 1 ? 0 : (i < 2 ? 1 : static_cast<int>(rng.below(2))));
        }
        double wins = 0, pairs = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (l[static_cast<std::size_t>(i)] == 1 && l[static_cast<std::size_t>(j)] == 0) {
                    pairs += 1;
                    wins += s[static_cast<std::size_t>(i)] > s[static_cast<std::size_t>(j)]   ? 1.0
                            : s[static_cast<std::size_t>(i)] == s[static_cast<std::size_t>(j)] ? 0.5
                                                                                                : 0.0;
                }
            }
        }
        CHECK(roc_auc(s, l) == doctest::Approx(wins / pairs).epsilon(1e-12));
    }
}

TEST_CASE("balanced weights equalize class mass") {
    const std::vector<int> labels{1, 0, 0, 0, 0, 0, 0, 0};
    const auto w = balanced_weights(labels);
    double pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] ? pos : neg) += w[i];
    }
    CHECK(pos == doctest::Approx(neg));
    CHECK(pos + neg == doctest::Approx(8.0));
}

TEST_CASE("dataset rows") {
    Dataset d;
    d.dim = 2;
    const std::vector<double> a{1, 2}, b{3, 4};
    d.add(a, 0);
    d.add(b, 1);
    CHECK(d.size() == 2);
    CHECK(d.row(1)[0] == 3);
    const std::vector<double> wrong{1};
    CHECK_THROWS_AS(d.add(wrong, 0), std::invalid_argument);
}

TEST_CASE("logistic regression separates blobs") {
    Rng rng(2);
    const Dataset train = blobs(rng, 2000, 10, 1.5);
    const Dataset test = blobs(rng, 1000, 10, 1.5);
    LogisticRegression lr;
    lr.fit(train);
    CHECK(auc_on(lr, test) > 0.97);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double p = lr.predict(test.row(i));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    // Informative features carry the larger weights.
    CHECK(lr.weights()[0] > 0.5);
    CHECK(std::abs(lr.weights()[9]) < lr.weights()[0]);
}

TEST_CASE("logistic regression copes with constant features") {
    Dataset d;
    d.dim = 3;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const int y = i % 2;
        const std::vector<double> x{0.25, y + rng.uniform(-0.4, 0.4), 0.0};
        d.add(x, y);
    }
    LogisticRegression lr;
    lr.fit(d);
    const std::vector<double> pos{0.25, 1.0, 0.0}, neg{0.25, 0.0, 0.0};
    CHECK(lr.predict(pos) > 0.9);
    CHECK(lr.predict(neg) < 0.1);
}

TEST_CASE("random forest learns an interaction") {
    Rng rng(4);
    const Dataset train = xor_data(rng, 3000);
    const Dataset test = xor_data(rng, 1000);
    ForestOptions o;
    o.trees = 30;
    o.max_features = 2;
    RandomForest rf(o);
    rf.fit(train);
    CHECK(rf.tree_count() == 30);
    CHECK(auc_on(rf, test) > 0.95);
    LogisticRegression lr;
    lr.fit(train);
    CHECK(auc_on(lr, test) < 0.7);
}

TEST_CASE("forest training is deterministic per seed") {
    Rng rng(5);
    const Dataset d = blobs(rng, 500, 6, 1.0);
    ForestOptions o;
    o.trees = 10;
    o.seed = 77;
    RandomForest a(o), b(o);
    a.fit(d);
    b.fit(d);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(a.predict(d.row(i)) == b.predict(d.row(i)));
    }
}

TEST_CASE("classifiers refuse degenerate training data") {
    Dataset empty;
    empty.dim = 2;
    LogisticRegression lr;
    RandomForest rf;
    CHECK_THROWS(lr.fit(empty));
    CHECK_THROWS(rf.fit(empty));
    Dataset one_class;
    one_class.dim = 1;
    const std::vector<double> x{1.0};
    one_class.add(x, 0);
    one_class.add(x, 0);
    CHECK_THROWS(lr.fit(one_class));
    CHECK_THROWS(rf.fit(one_class));
}

TEST_CASE("classifier factory") {
    CHECK(make_classifier("logistic")->kind() == "logistic");
    CHECK(make_classifier("forest")->kind() == "forest");
    CHECK(make_classifier("svm") == nullptr);
}

TEST_CASE("classifiers roundtrip through save and load") {
    Rng rng(6);
    const Dataset d = blobs(rng, 600, 8, 1.2);
    for (const char* kind : {"logistic", "forest"}) {
        auto a = make_classifier(kind, 9);
        a->fit(d);
        std::stringstream ss;
        a->save(ss);
        auto b = make_classifier(kind);
        b->load(ss);
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(a->predict(d.row(i)) == b->predict(d.row(i)));
        }
        std::stringstream cut(ss.str().substr(0, 10));
        auto c = make_classifier(kind);
        CHECK_THROWS_AS(c->load(cut), io::FormatError);
    }
}

TEST_CASE("model files roundtrip and validate") {
    Rng rng(7);
    const Dataset d = blobs(rng, 300, 45, 1.0);
    Model m;
    m.refs.omega = 15;
    for (int i = 0; i < 45; ++i) {
        Tile t(15);
        for (int k = 0; k < 40; ++k) {
            t.set(static_cast<int>(rng.below(15)), static_cast<int>(rng.below(15)), true);
        }
        m.refs.tiles.push_back(t);
    }
    m.classifier = make_classifier("logistic");
    m.classifier->fit(d);
    m.metadata = R"({"challenges":60})";

    std::stringstream ss;
    save_model(m, ss);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 8) == "CSTRMODL");
    std::stringstream in(bytes);
    const Model back = load_model(in);
    CHECK(back.refs.omega == 15);
    CHECK(back.refs.tiles == m.refs.tiles);
    CHECK(back.metadata == m.metadata);
    CHECK(back.classifier->kind() == "logistic");
    CHECK(back.classifier->predict(d.row(3)) == m.classifier->predict(d.row(3)));

    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream bad_magic(bad);
    CHECK_THROWS_AS(load_model(bad_magic), io::FormatError);
    std::string bad_version = bytes;
    bad_version[8] = 9;
    std::stringstream bv(bad_version);
    CHECK_THROWS_AS(load_model(bv), io::FormatError);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_model(truncated), io::FormatError);

    const auto path = std::filesystem::temp_directory_path() / "captchastar_model_test.bin";
    save_model(m, path);
    CHECK(load_model(path).refs.tiles == m.refs.tiles);
    std::filesystem::remove(path);
    CHECK_THROWS(load_model(path));
}

}  // TEST_SUITE
