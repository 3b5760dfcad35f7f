#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "carton/inference.hpp"
#include "carton/matching.hpp"
#include "carton/pointcloud.hpp"
#include "carton/segmentation.hpp"

namespace carton {

struct PipelineSettings {
    bool remove_ground = false;
    double ground_tol = 0.02;
    double cluster_tol = 0.02;
    std::size_t cluster_min_size = 200;
    SegmentationConfig segmentation;
    FeatureConfig features;  // l_ref is recomputed per scene
    InferenceConfig inference;

    void validate() const {
        if (!(ground_tol > 0.0)) throw ConfigError("ground_tol must be > 0");
        if (!(cluster_tol > 0.0)) throw ConfigError("cluster_tol must be > 0");
        if (cluster_min_size == 0) throw ConfigError("cluster_min_size must be >= 1");
        segmentation.validate();
        features.validate();
        inference.validate();
    }
};

// Everything upstream of inference: optional ground removal, largest
// Euclidean cluster, iterative plane extraction.
struct ScenePrep {
    bool ground_removed = false;
    std::size_t ground_points = 0;
    std::size_t cluster_points = 0;
    std::vector<Segment> segments;
    Vec3 l_ref = Vec3::Zero();
};

inline ScenePrep prepare_scene(const PointCloud& cloud, const PipelineSettings& settings) {
    settings.validate();
    ScenePrep prep;

    PointCloud working = cloud;
    if (settings.remove_ground && !cloud.empty()) {
        GroundRemovalResult gr = remove_ground(cloud, settings.ground_tol,
                                               splitmix64(settings.segmentation.seed ^ 0x67726e64ULL));
        prep.ground_removed = gr.ground_found;
        prep.ground_points = gr.ground.size();
        if (gr.ground_found) working = std::move(gr.rest);
    }

    std::vector<PointCloud> clusters =
        euclidean_cluster(working, settings.cluster_tol, settings.cluster_min_size);
    if (clusters.empty()) throw Error("no cluster of at least " +
                                      std::to_string(settings.cluster_min_size) + " points");
    prep.cluster_points = clusters.front().size();

    prep.segments = extract_segments(clusters.front(), settings.segmentation);
    prep.l_ref = scene_reference_point(prep.segments);
    return prep;
}

struct PipelineResult {
    bool ground_removed = false;
    std::size_t ground_points = 0;
    std::size_t cluster_points = 0;
    std::vector<Segment> segments;
    Vec3 l_ref = Vec3::Zero();
    InferenceResult inference;
};

// Cloud in, articulated model out: scene preparation followed by the
// two-stage search over the full template graph.
inline PipelineResult run_pipeline(const PointCloud& cloud, const WeightVector& weights,
                                   const PipelineSettings& settings) {
    ScenePrep prep = prepare_scene(cloud, settings);
    PipelineResult out;
    out.ground_removed = prep.ground_removed;
    out.ground_points = prep.ground_points;
    out.cluster_points = prep.cluster_points;
    out.segments = std::move(prep.segments);
    out.l_ref = prep.l_ref;

    FeatureConfig fcfg = settings.features;
    fcfg.l_ref = out.l_ref;
    const TemplateGraph graph = box_template(true);
    out.inference = infer_two_stage(out.segments, graph, weights, fcfg, settings.inference);
    return out;
}

}  // namespace carton
