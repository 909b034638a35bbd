#include <set>

#include "captchastar/heuristics.hpp"
#include "captchastar/ml/attack.hpp"
#include "captchastar/ml/kmeans.hpp"
#include "captchastar/ml/training.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace captchastar;
using namespace captchastar::ml;

namespace {

ReferenceTiles trivial_refs(int omega) {
    ReferenceTiles refs{omega, {}};
    for (std::size_t i = 0; i < reference_count(omega); ++i) {
        Tile t(omega);
        for (std::size_t k = 0; k <= i && k < static_cast<std::size_t>(omega * omega); ++k) {
            t.set(static_cast<int>(k) % omega, static_cast<int>(k) / omega, true);
        }
        refs.tiles.push_back(t);
    }
    return refs;
}

Point nearest_grid_point(Point p, int lambda) {
    Point best;
    double bd = 1e300;
    for (const Point& g : lambda_grid(lambda)) {
        const double d = euclidean_distance(g, p);
        if (d < bd) {
            bd = d;
            best = g;
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("ml_attack") {

TEST_CASE("lambda grid shape") {
    const auto g = lambda_grid(5);
    CHECK(g.size() == 3721);
    CHECK(g.front() == Point{0, 0});
    CHECK(g[1] == Point{5, 0});
    CHECK(g.back() == Point{300, 300});
    CHECK(lambda_grid(300).size() == 4);
    CHECK(lambda_grid(7).size() == 43 * 43);
    CHECK_THROWS_AS(lambda_grid(0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_grid(301), std::invalid_argument);
}

TEST_CASE("an indicator scorer leads ml_solve to the grid point nearest the solution") {
    const ReferenceTiles refs = trivial_refs(15);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const Challenge ch = generate_challenge(testing::small_params(), testing::small_pool(), rng);
        const Point target = nearest_grid_point(ch.solutions[0], kDefaultLambda);
        const StateScorer oracle = [target](Point c, const FeatureVector&) { return c == target ? 1.0 : 0.0; };
        const MlResult r = ml_solve(client_view(ch), oracle, refs);
        CHECK(r.cursor == target);
        CHECK(r.score == 1.0);
        CHECK(r.states_evaluated == 3721);
        CHECK(within_tolerance(r.cursor, ch));
    }
}

TEST_CASE("a constant scorer returns the origin") {
    Rng rng(1);
    const Challenge ch = generate_challenge(testing::small_params(), testing::small_pool(), rng);
    const StateScorer flat = [](Point, const FeatureVector&) { return 0.25; };
    for (unsigned threads : {1U, 3U}) {
        MlSolveOptions o;
        o.threads = threads;
        CHECK(ml_solve(client_view(ch), flat, trivial_refs(15), o).cursor == Point{0, 0});
    }
}

TEST_CASE("scorers receive the feature vector of the rendered state") {
    Rng rng(2);
    const Challenge ch = generate_challenge(testing::small_params(), testing::small_pool(), rng);
    const ReferenceTiles refs = trivial_refs(10);
    const ClientChallenge view = client_view(ch);
    const StateScorer check = [&](Point c, const FeatureVector& f) {
        return f == feature_vector(render_state(view, c), refs) ? 1.0 : -1.0;
    };
    MlSolveOptions o;
    o.lambda = 30;
    const MlResult r = ml_solve(view, check, refs, o);
    CHECK(r.score == 1.0);
    CHECK(r.states_evaluated == 121);
}

TEST_CASE("zero training challenges give an empty set") {
    Rng rng(3);
    CHECK(build_training_set(testing::small_pool(), testing::small_params(), 0, 400, trivial_refs(15), rng).empty());
    CHECK(sample_tile_corpus(testing::small_pool(), testing::small_params(), 15, 0, 10, rng).empty());
}

TEST_CASE("training labels are sound and budgets respected") {
    Rng rng(4);
    const GenParams p = testing::small_params();
    const ReferenceTiles refs = trivial_refs(15);
    const auto examples = build_training_set(testing::small_pool(), p, 4, 100, refs, rng);
    REQUIRE(examples.size() == 400);

    // The first challenge is drawn from the untouched stream, so it can be replayed.
    Rng replay(4);
    GenerateOptions o;
    o.id_source = [] { return std::string("training"); };
    const Challenge first = generate_challenge(p, testing::small_pool(), replay, o);
    std::size_t positives = 0;
    std::set<std::pair<std::size_t, std::pair<double, double>>> seen;
    for (const LabeledExample& e : examples) {
        CHECK(e.features.size() == 45);
        CHECK(seen.insert({e.challenge, {e.cursor.x, e.cursor.y}}).second);
        if (e.challenge == 0) {
            CHECK(within_tolerance(e.cursor, first) == (e.label == 1));
        }
        positives += static_cast<std::size_t>(e.label);
    }
    // Each challenge: its solution plus a handful of grid points inside the disc.
    CHECK(positives >= 4);
    CHECK(positives <= 4 * 6);
    const Dataset d = to_dataset(examples);
    CHECK(d.size() == 400);
    CHECK(d.dim == 45);
}

TEST_CASE("a small trained pipeline beats chance") {
    Rng rng(5);
    const GenParams p = testing::small_params(70, 7, 120);
    const auto corpus = sample_tile_corpus(testing::small_pool(), p, 15, 6, 60, rng);
    const ReferenceTiles refs = build_reference_tiles(corpus, 15, rng);
    const auto train = build_training_set(testing::small_pool(), p, 12, 200, refs, rng);
    const auto test = build_training_set(testing::small_pool(), p, 6, 200, refs, rng);
    auto model = make_classifier("logistic");
    model->fit(to_dataset(train));
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& e : test) {
        scores.push_back(model->predict(e.features));
        labels.push_back(e.label);
    }
    CHECK(roc_auc(scores, labels) > 0.8);
}

}  // TEST_SUITE
