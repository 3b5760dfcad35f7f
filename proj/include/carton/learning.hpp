#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "carton/matching.hpp"
#include "carton/model.hpp"

namespace carton {

struct TrainingExample {
    FeatureVector features;
    double target = 0.0;
};

struct RidgeConfig {
    double lambda = 1e-3;

    void validate() const {
        if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    }
};

struct RidgeFit {
    WeightVector weights;
    bool rank_warning = false;  // design matrix rank-deficient at lambda == 0
    Eigen::Index rank = kTermCount;
};

namespace detail {

inline void build_design(const std::vector<TrainingExample>& examples, Eigen::MatrixXd& x,
                         Eigen::VectorXd& y) {
    const auto m = static_cast<Eigen::Index>(examples.size());
    x.resize(m, kTermCount);
    y.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& ex = examples[static_cast<std::size_t>(i)];
        for (int t = 0; t < kTermCount; ++t) {
            const double v = ex.features[static_cast<FeatureTerm>(t)];
            if (!std::isfinite(v)) throw ConfigError("non-finite feature value in training set");
            x(i, t) = v;
        }
        if (!std::isfinite(ex.target)) throw ConfigError("non-finite target in training set");
        y(i) = ex.target;
    }
}

}  // namespace detail

// Least-squares fit of the scoring weights to scalar quality targets.
// lambda > 0 solves the ridge normal equations (X^T X + lambda I) w = X^T y;
// lambda == 0 falls back to the minimum-norm least-squares solution and flags
// rank deficiency instead of failing.
inline RidgeFit fit_weights(const std::vector<TrainingExample>& examples,
                            const RidgeConfig& cfg = {}) {
    cfg.validate();
    if (examples.empty()) throw ConfigError("training set is empty");

    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    detail::build_design(examples, x, y);

    Eigen::VectorXd w(kTermCount);
    RidgeFit out;
    if (cfg.lambda > 0.0) {
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += cfg.lambda;
        w = gram.ldlt().solve(x.transpose() * y);
    } else {
        auto cod = x.completeOrthogonalDecomposition();
        out.rank = cod.rank();
        out.rank_warning = out.rank < kTermCount;
        w = cod.solve(y);
    }
    for (int t = 0; t < kTermCount; ++t) out.weights[static_cast<FeatureTerm>(t)] = w(t);
    return out;
}

// Per-term affine transform fitted on a training set and replayed at
// prediction time.
struct StandardScaler {
    std::array<double, kTermCount> mean{};
    std::array<double, kTermCount> scale{};

    StandardScaler() { scale.fill(1.0); }

    FeatureVector apply(const FeatureVector& fv) const {
        FeatureVector out;
        for (int t = 0; t < kTermCount; ++t)
            out.terms[static_cast<std::size_t>(t)] =
                (fv.terms[static_cast<std::size_t>(t)] - mean[static_cast<std::size_t>(t)]) /
                scale[static_cast<std::size_t>(t)];
        return out;
    }
};

inline StandardScaler fit_scaler(const std::vector<TrainingExample>& examples) {
    if (examples.empty()) throw ConfigError("training set is empty");
    StandardScaler sc;
    sc.scale.fill(0.0);
    const double m = static_cast<double>(examples.size());
    for (const auto& ex : examples)
        for (int t = 0; t < kTermCount; ++t)
            sc.mean[static_cast<std::size_t>(t)] += ex.features.terms[static_cast<std::size_t>(t)];
    for (double& v : sc.mean) v /= m;
    for (const auto& ex : examples)
        for (int t = 0; t < kTermCount; ++t) {
            const double d =
                ex.features.terms[static_cast<std::size_t>(t)] - sc.mean[static_cast<std::size_t>(t)];
            sc.scale[static_cast<std::size_t>(t)] += d * d;
        }
    for (double& v : sc.scale) {
        v = std::sqrt(v / m);
        if (v < 1e-12) v = 1.0;  // constant column: leave it untouched
    }
    return sc;
}

// Weights learned on standardized features, bundled with the scaler that
// produced them.  effective() folds the per-term 1/sigma into the weights so
// the result scores raw feature vectors directly; the mean offset only shifts
// every assignment's score by the same constant and never changes the argmax.
struct LearnedModel {
    WeightVector weights;  // valid on scaler.apply()'d features
    StandardScaler scaler;
    double target_mean = 0.0;
    bool rank_warning = false;

    WeightVector effective() const {
        WeightVector w = weights;
        for (int t = 0; t < kTermCount; ++t)
            w[static_cast<FeatureTerm>(t)] /= scaler.scale[static_cast<std::size_t>(t)];
        return w;
    }
};

inline LearnedModel fit_standardized(const std::vector<TrainingExample>& examples,
                                     const RidgeConfig& cfg = {}) {
    cfg.validate();
    LearnedModel model;
    model.scaler = fit_scaler(examples);
    for (const auto& ex : examples) model.target_mean += ex.target;
    model.target_mean /= static_cast<double>(examples.size());

    std::vector<TrainingExample> transformed;
    transformed.reserve(examples.size());
    for (const auto& ex : examples)
        transformed.push_back({model.scaler.apply(ex.features), ex.target - model.target_mean});
    RidgeFit fit = fit_weights(transformed, cfg);
    model.weights = fit.weights;
    model.rank_warning = fit.rank_warning;
    return model;
}

struct PerturbationConfig {
    std::size_t per_scene = 20;
    std::uint64_t seed = 0;
};

struct TrainingScene {
    std::vector<Segment> segments;
    GroundTruthLabels labels;
};

// Builds (feature vector, quality) pairs from labeled scenes.  Each scene
// contributes its ground-truth assignment at quality 1.0 plus randomly
// perturbed assignments whose quality is the fraction of present faces still
// mapped to the right segment.  Scenes whose labels cannot all be matched to a
// segment are skipped and reported through skipped_scenes.
inline std::vector<TrainingExample> make_training_set(
    const std::vector<TrainingScene>& scenes, const TemplateGraph& graph,
    const FeatureConfig& base_cfg, const PerturbationConfig& pcfg,
    const MatchThresholds& thr = {}, std::vector<std::size_t>* skipped_scenes = nullptr) {
    std::vector<TrainingExample> out;
    for (std::size_t scene_idx = 0; scene_idx < scenes.size(); ++scene_idx) {
        const TrainingScene& scene = scenes[scene_idx];
        GroundTruthMatch gt = match_ground_truth(scene.labels, scene.segments, thr);
        const int present = static_cast<int>(scene.labels.present_count());
        if (!gt.complete || present == 0) {
            if (skipped_scenes) skipped_scenes->push_back(scene_idx);
            continue;
        }

        FeatureConfig cfg = base_cfg;
        cfg.l_ref = scene_reference_point(scene.segments);

        const auto quality = [&](const Assignment& a) {
            int correct = 0;
            for (int r = 0; r < kRoleCount; ++r)
                if (scene.labels.faces[static_cast<std::size_t>(r)].present && a[r] == gt.assignment[r])
                    ++correct;
            return static_cast<double>(correct) / static_cast<double>(present);
        };
        const auto emit = [&](const Assignment& a) {
            out.push_back({featurize(a, scene.segments, graph, cfg, DegeneratePolicy::Penalize),
                           quality(a)});
        };

        emit(gt.assignment);

        const int n = static_cast<int>(scene.segments.size());
        Rng rng = Rng::substream(pcfg.seed, scene_idx);
        for (std::size_t k = 0; k < pcfg.per_scene; ++k) {
            Assignment a = gt.assignment;
            const std::size_t ops = 1 + rng.index(4);
            for (std::size_t op = 0; op < ops; ++op) {
                switch (rng.index(3)) {
                    case 0: {  // swap two roles
                        const auto r1 = static_cast<int>(rng.index(kRoleCount));
                        const auto r2 = static_cast<int>(rng.index(kRoleCount));
                        std::swap(a[r1], a[r2]);
                        break;
                    }
                    case 1:  // drop a role
                        a[static_cast<int>(rng.index(kRoleCount))] = kEmpty;
                        break;
                    default: {  // point a role at an unused segment
                        std::vector<int> unused;
                        for (int s = 0; s < n; ++s) {
                            bool taken = false;
                            for (int r = 0; r < kRoleCount; ++r) taken |= a[r] == s;
                            if (!taken) unused.push_back(s);
                        }
                        const auto role = static_cast<int>(rng.index(kRoleCount));
                        if (unused.empty())
                            a[role] = kEmpty;
                        else
                            a[role] = unused[rng.index(unused.size())];
                        break;
                    }
                }
            }
            emit(a);
        }
    }
    if (out.empty()) throw ConfigError("no usable training scenes");
    return out;
}

}  // namespace carton
