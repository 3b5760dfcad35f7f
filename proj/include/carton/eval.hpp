#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "carton/pipeline.hpp"

namespace carton {

struct AccuracyBreakdown {
    double primary = 0.0;  // 100 * (correct - wrong) / present, best over the 4 rotations
    double simple = 0.0;   // 100 * correct / present at that same rotation
    int correct = 0;
    int wrong = 0;
    int present = 0;
    int rotation = 0;
};

namespace detail {

// Scores one rotation of the prediction against the labels over a role subset.
template <typename RolePredicate>
inline void count_matches(const Assignment& pred, const GroundTruthLabels& labels,
                          const std::vector<Segment>& segments, const MatchThresholds& thr,
                          RolePredicate&& in_scope, int& correct, int& wrong) {
    correct = 0;
    wrong = 0;
    for (int role = 0; role < kRoleCount; ++role) {
        if (!in_scope(role)) continue;
        const int seg = pred[role];
        if (seg == kEmpty) continue;
        const FaceLabel& lbl = labels.faces[static_cast<std::size_t>(role)];
        if (lbl.present && segment_matches_label(segments[static_cast<std::size_t>(seg)], lbl, thr))
            ++correct;
        else
            ++wrong;
    }
}

template <typename RolePredicate>
inline AccuracyBreakdown assignment_accuracy(const Assignment& pred,
                                             const GroundTruthLabels& labels,
                                             const std::vector<Segment>& segments,
                                             const MatchThresholds& thr,
                                             RolePredicate&& in_scope) {
    int present = 0;
    for (int role = 0; role < kRoleCount; ++role)
        if (in_scope(role) && labels.faces[static_cast<std::size_t>(role)].present) ++present;
    if (present == 0) throw UndefinedMetric("no matching faces present in ground truth");

    AccuracyBreakdown best;
    bool first = true;
    for (int r = 0; r < 4; ++r) {
        const Assignment rotated = rotate_assignment(pred, r);
        int correct = 0, wrong = 0;
        count_matches(rotated, labels, segments, thr, in_scope, correct, wrong);
        const double primary = 100.0 * static_cast<double>(correct - wrong) / present;
        if (first || primary > best.primary) {
            best = {primary, 100.0 * correct / present, correct, wrong, present, r};
            first = false;
        }
    }
    return best;
}

}  // namespace detail

// Flap identification quality: (correct - wrong) / flaps present, in percent,
// evaluated at whichever of the four box rotations scores best.  Negative
// values mean more wrong identifications than right ones.
inline AccuracyBreakdown flap_accuracy_detail(const Assignment& pred,
                                              const GroundTruthLabels& labels,
                                              const std::vector<Segment>& segments,
                                              const MatchThresholds& thr = {}) {
    return detail::assignment_accuracy(pred, labels, segments, thr,
                                       [](int role) { return is_flap(role); });
}

inline double flap_accuracy(const Assignment& pred, const GroundTruthLabels& labels,
                            const std::vector<Segment>& segments,
                            const MatchThresholds& thr = {}) {
    return flap_accuracy_detail(pred, labels, segments, thr).primary;
}

// Same formula over all nine roles.
inline AccuracyBreakdown full_model_accuracy_detail(const Assignment& pred,
                                                    const GroundTruthLabels& labels,
                                                    const std::vector<Segment>& segments,
                                                    const MatchThresholds& thr = {}) {
    return detail::assignment_accuracy(pred, labels, segments, thr, [](int) { return true; });
}

inline double full_model_accuracy(const Assignment& pred, const GroundTruthLabels& labels,
                                  const std::vector<Segment>& segments,
                                  const MatchThresholds& thr = {}) {
    return full_model_accuracy_detail(pred, labels, segments, thr).primary;
}

struct BenchmarkScene {
    PointCloud cloud;
    GroundTruthLabels labels;
    std::string category = "default";
    std::string name;
};

struct SceneEval {
    std::size_t index = 0;
    std::string name;
    std::string category;
    bool pipeline_ok = true;
    std::string error;  // set when the pipeline threw; the scene scores as all-Empty
    std::size_t segment_count = 0;
    Assignment prediction;
    bool flap_defined = false;
    bool full_defined = false;
    AccuracyBreakdown flap;
    AccuracyBreakdown full;
    double seconds = 0.0;
};

struct CategorySummary {
    std::string category;
    std::size_t scenes = 0;
    std::size_t failures = 0;
    std::size_t flap_defined = 0;
    std::size_t full_defined = 0;
    double flap_mean = 0.0;  // over scenes where the metric is defined
    double full_mean = 0.0;
    double flap_simple_mean = 0.0;
    double full_simple_mean = 0.0;
    double seconds_total = 0.0;
};

struct EvalReport {
    std::vector<SceneEval> scenes;
    std::vector<CategorySummary> categories;  // first-appearance order
    CategorySummary overall;
};

namespace detail {

inline void fold_scene(CategorySummary& agg, const SceneEval& s) {
    ++agg.scenes;
    if (!s.pipeline_ok) ++agg.failures;
    agg.seconds_total += s.seconds;
    if (s.flap_defined) {
        ++agg.flap_defined;
        agg.flap_mean += s.flap.primary;
        agg.flap_simple_mean += s.flap.simple;
    }
    if (s.full_defined) {
        ++agg.full_defined;
        agg.full_mean += s.full.primary;
        agg.full_simple_mean += s.full.simple;
    }
}

inline void finish_summary(CategorySummary& agg) {
    if (agg.flap_defined > 0) {
        agg.flap_mean /= static_cast<double>(agg.flap_defined);
        agg.flap_simple_mean /= static_cast<double>(agg.flap_defined);
    }
    if (agg.full_defined > 0) {
        agg.full_mean /= static_cast<double>(agg.full_defined);
        agg.full_simple_mean /= static_cast<double>(agg.full_defined);
    }
}

}  // namespace detail

// Runs the full pipeline on every scene and aggregates unweighted per-scene
// accuracy means per category and overall.  A scene whose pipeline throws is
// scored as an all-Empty prediction and recorded, not fatal.
inline EvalReport run_benchmark(const std::vector<BenchmarkScene>& dataset,
                                const WeightVector& weights, const PipelineSettings& settings,
                                const MatchThresholds& thr = {}) {
    if (dataset.empty()) throw ConfigError("benchmark dataset is empty");
    EvalReport report;
    report.overall.category = "overall";

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const BenchmarkScene& scene = dataset[i];
        SceneEval row;
        row.index = i;
        row.name = scene.name.empty() ? "scene_" + std::to_string(i) : scene.name;
        row.category = scene.category;

        std::vector<Segment> segments;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            PipelineResult pr = run_pipeline(scene.cloud, weights, settings);
            segments = std::move(pr.segments);
            row.prediction = pr.inference.assignment;
            row.segment_count = segments.size();
        } catch (const Error& e) {
            row.pipeline_ok = false;
            row.error = e.what();
            row.prediction = Assignment{};  // all Empty
            segments.clear();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        try {
            row.flap = flap_accuracy_detail(row.prediction, scene.labels, segments, thr);
            row.flap_defined = true;
        } catch (const UndefinedMetric&) {
        }
        try {
            row.full = full_model_accuracy_detail(row.prediction, scene.labels, segments, thr);
            row.full_defined = true;
        } catch (const UndefinedMetric&) {
        }
        report.scenes.push_back(std::move(row));
    }

    std::vector<std::string> order;
    std::map<std::string, CategorySummary> by_cat;
    for (const SceneEval& s : report.scenes) {
        auto it = by_cat.find(s.category);
        if (it == by_cat.end()) {
            order.push_back(s.category);
            it = by_cat.emplace(s.category, CategorySummary{}).first;
            it->second.category = s.category;
        }
        detail::fold_scene(it->second, s);
        detail::fold_scene(report.overall, s);
    }
    for (const std::string& cat : order) {
        CategorySummary agg = by_cat[cat];
        detail::finish_summary(agg);
        report.categories.push_back(std::move(agg));
    }
    detail::finish_summary(report.overall);
    return report;
}

}  // namespace carton
