#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "carton/learning.hpp"
#include "carton/synth.hpp"

using namespace carton;

namespace {

FeatureVector random_features(Rng& rng) {
    FeatureVector fv;
    for (int t = 0; t < kTermCount; ++t) fv[t] = rng.uniform(-2.0, 2.0);
    return fv;
}

std::vector<TrainingExample> linear_examples(const WeightVector& truth, std::size_t m,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < m; ++i) {
        TrainingExample ex;
        ex.features = random_features(rng);
        ex.target = score(ex.features, truth);
        out.push_back(ex);
    }
    return out;
}

double weight_norm(const WeightVector& w) {
    double s = 0.0;
    for (int t = 0; t < kTermCount; ++t) s += w[t] * w[t];
    return std::sqrt(s);
}

TrainingScene perfect_box_scene(std::uint64_t seed) {
    BoxSpec spec;
    auto [cloud, labels] = synth_box(spec, seed);
    TrainingScene scene;
    scene.labels = labels;
    for (const auto& f : labels.faces) scene.segments.push_back(segment_from_corners(f.corners));
    return scene;
}

}  // namespace

TEST_CASE("an exactly linear target is recovered with zero regularization") {
    WeightVector truth;
    for (int t = 0; t < kTermCount; ++t) truth[t] = 0.3 * t - 1.1;
    auto examples = linear_examples(truth, 40, 3);
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    RidgeFit fit = fit_weights(examples, cfg);
    CHECK_FALSE(fit.rank_warning);
    for (int t = 0; t < kTermCount; ++t) {
        CHECK(fit.weights[t] == Catch::Approx(truth[t]).margin(1e-9));
    }
}

TEST_CASE("the ridge solution matches an independent dense solve") {
    WeightVector truth;
    for (int t = 0; t < kTermCount; ++t) truth[t] = 1.0 - 0.2 * t;
    auto examples = linear_examples(truth, 30, 7);
    // corrupt targets a little so regularization matters
    Rng rng(11);
    for (auto& ex : examples) ex.target += rng.normal(0.05);

    RidgeConfig cfg;
    cfg.lambda = 0.37;
    RidgeFit fit = fit_weights(examples, cfg);

    const auto m = static_cast<Eigen::Index>(examples.size());
    Eigen::MatrixXd x(m, kTermCount);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int t = 0; t < kTermCount; ++t) x(i, t) = examples[static_cast<std::size_t>(i)].features[t];
        y(i) = examples[static_cast<std::size_t>(i)].target;
    }
    Eigen::MatrixXd gram = x.transpose() * x +
                           cfg.lambda * Eigen::MatrixXd::Identity(kTermCount, kTermCount);
    Eigen::VectorXd want = gram.fullPivLu().solve(x.transpose() * y);
    for (int t = 0; t < kTermCount; ++t) {
        CHECK(fit.weights[t] == Catch::Approx(want(t)).margin(1e-9));
    }
}

TEST_CASE("growing lambda monotonically shrinks the solution") {
    WeightVector truth;
    for (int t = 0; t < kTermCount; ++t) truth[t] = 0.8;
    auto examples = linear_examples(truth, 25, 19);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-6, 1e-3, 1e-1, 10.0, 1e4, 1e6}) {
        RidgeConfig cfg;
        cfg.lambda = lambda;
        double norm = weight_norm(fit_weights(examples, cfg).weights);
        CHECK(norm <= prev + 1e-12);
        prev = norm;
    }
    CHECK(prev < 1e-2);  // huge lambda crushes the weights
}

TEST_CASE("the fit does not depend on example order") {
    WeightVector truth;
    for (int t = 0; t < kTermCount; ++t) truth[t] = std::sin(1.0 + t);
    auto examples = linear_examples(truth, 30, 23);
    Rng rng(29);
    for (auto& ex : examples) ex.target += rng.normal(0.02);

    auto shuffled = examples;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
    }
    RidgeConfig cfg;
    cfg.lambda = 0.01;
    RidgeFit a = fit_weights(examples, cfg);
    RidgeFit b = fit_weights(shuffled, cfg);
    for (int t = 0; t < kTermCount; ++t) {
        CHECK(a.weights[t] == Catch::Approx(b.weights[t]).margin(1e-10));
    }
}

TEST_CASE("rank deficiency is flagged and solved minimum-norm at lambda zero") {
    // every example lives in the span of two feature directions
    std::vector<TrainingExample> examples;
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
        double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        TrainingExample ex;
        ex.features[kPhi1] = a;
        ex.features[kGamma3] = b;
        ex.target = 2.0 * a - 0.5 * b;
        examples.push_back(ex);
    }
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    RidgeFit fit = fit_weights(examples, cfg);
    CHECK(fit.rank_warning);
    CHECK(fit.rank == 2);
    CHECK(fit.weights[kPhi1] == Catch::Approx(2.0).margin(1e-9));
    CHECK(fit.weights[kGamma3] == Catch::Approx(-0.5).margin(1e-9));
    // untouched directions stay at zero in the minimum-norm solution
    for (int t : {kPhi2, kPhi3, kGamma1, kGamma2, kGamma4, kGamma5}) {
        CHECK(fit.weights[t] == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("fit_weights validates its inputs") {
    CHECK_THROWS_AS(fit_weights({}), ConfigError);
    RidgeConfig bad;
    bad.lambda = -1.0;
    std::vector<TrainingExample> one(1);
    CHECK_THROWS_AS(fit_weights(one, bad), ConfigError);
    one[0].features[kPhi1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_weights(one), ConfigError);
    one[0].features[kPhi1] = 0.0;
    one[0].target = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_weights(one), ConfigError);
}

TEST_CASE("the scaler standardizes each varying column") {
    std::vector<TrainingExample> examples;
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
        TrainingExample ex;
        ex.features[kPhi1] = rng.uniform(3.0, 9.0);
        ex.features[kPhi2] = rng.normal(2.0);
        ex.features[kPhi3] = 4.0;  // constant column
        examples.push_back(ex);
    }
    StandardScaler sc = fit_scaler(examples);
    CHECK(sc.mean[kPhi3] == Catch::Approx(4.0).margin(1e-12));
    CHECK(sc.scale[kPhi3] == 1.0);  // constant columns are left alone

    double mean = 0.0, var = 0.0;
    for (const auto& ex : examples) mean += sc.apply(ex.features)[kPhi1];
    mean /= static_cast<double>(examples.size());
    for (const auto& ex : examples) {
        double d = sc.apply(ex.features)[kPhi1] - mean;
        var += d * d;
    }
    var /= static_cast<double>(examples.size());
    CHECK(mean == Catch::Approx(0.0).margin(1e-9));
    CHECK(var == Catch::Approx(1.0).margin(1e-9));
    CHECK(sc.apply(examples[0].features)[kPhi3] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("effective weights rank assignments exactly like the standardized fit") {
    WeightVector truth;
    for (int t = 0; t < kTermCount; ++t) truth[t] = 0.4 * t - 1.3;
    auto examples = linear_examples(truth, 60, 41);
    LearnedModel model = fit_standardized(examples);
    WeightVector eff = model.effective();

    Rng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        FeatureVector a = random_features(rng);
        FeatureVector b = random_features(rng);
        double margin_raw = score(a, eff) - score(b, eff);
        double margin_std = score(model.scaler.apply(a), model.weights) -
                            score(model.scaler.apply(b), model.weights);
        CHECK(margin_raw == Catch::Approx(margin_std).margin(1e-9));
    }
}

TEST_CASE("fit_standardized centers targets and forwards the rank warning") {
    std::vector<TrainingExample> degenerate;
    Rng rng(47);
    for (int i = 0; i < 15; ++i) {
        TrainingExample ex;
        double a = rng.uniform(-1.0, 1.0);
        ex.features[kGamma1] = a;
        ex.target = 3.0 * a + 10.0;  // big constant offset
        degenerate.push_back(ex);
    }
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    LearnedModel model = fit_standardized(degenerate, cfg);
    CHECK(model.rank_warning);
    CHECK(model.target_mean == Catch::Approx(10.0).margin(0.5));
}

TEST_CASE("training sets carry the ground truth at quality one") {
    std::vector<TrainingScene> scenes = {perfect_box_scene(1), perfect_box_scene(2)};
    TemplateGraph graph = box_template(true);
    FeatureConfig fcfg;
    PerturbationConfig pcfg;
    pcfg.per_scene = 12;
    pcfg.seed = 5;

    auto examples = make_training_set(scenes, graph, fcfg, pcfg);
    REQUIRE(examples.size() == 2 * (1 + 12));
    CHECK(examples[0].target == 1.0);
    CHECK(examples[13].target == 1.0);  // second scene's ground truth
    bool any_below = false;
    for (const auto& ex : examples) {
        CHECK(ex.target >= 0.0);
        CHECK(ex.target <= 1.0);
        // with all nine faces present the quality is always a ninth multiple
        double scaled = ex.target * 9.0;
        CHECK(scaled == Catch::Approx(std::round(scaled)).margin(1e-9));
        any_below = any_below || ex.target < 1.0;
    }
    CHECK(any_below);  // perturbations actually perturb
}

TEST_CASE("training set generation is seed-deterministic") {
    std::vector<TrainingScene> scenes = {perfect_box_scene(3)};
    TemplateGraph graph = box_template(true);
    FeatureConfig fcfg;
    PerturbationConfig pcfg;
    pcfg.per_scene = 8;
    pcfg.seed = 77;
    auto a = make_training_set(scenes, graph, fcfg, pcfg);
    auto b = make_training_set(scenes, graph, fcfg, pcfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].target == b[i].target);
        for (int t = 0; t < kTermCount; ++t) CHECK(a[i].features[t] == b[i].features[t]);
    }
    pcfg.seed = 78;
    auto c = make_training_set(scenes, graph, fcfg, pcfg);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs = differs || !(a[i].target == c[i].target);
    CHECK(differs);
}

TEST_CASE("unmatchable scenes are skipped and reported") {
    TrainingScene good = perfect_box_scene(4);
    TrainingScene bad;  // labels present but nothing to match them to
    bad.labels = good.labels;

    std::vector<TrainingScene> scenes = {bad, good};
    TemplateGraph graph = box_template(true);
    FeatureConfig fcfg;
    PerturbationConfig pcfg;
    pcfg.per_scene = 3;
    std::vector<std::size_t> skipped;
    auto examples = make_training_set(scenes, graph, fcfg, pcfg, MatchThresholds{}, &skipped);
    CHECK(examples.size() == 1 + 3);
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0] == 0);

    std::vector<TrainingScene> all_bad = {bad};
    CHECK_THROWS_WITH(make_training_set(all_bad, graph, fcfg, pcfg),
                      Catch::Matchers::ContainsSubstring("no usable training scenes"));
}
