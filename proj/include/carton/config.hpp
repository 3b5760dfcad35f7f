#pragma once

#include <string>

#include "carton/io.hpp"
#include "carton/pipeline.hpp"
#include "carton/planner.hpp"
#include "carton/scenario.hpp"

namespace carton {

// Every tunable in one document.  All fields default; a config file overrides
// only what it names, unknown keys are rejected by name, and every module's
// invariants are revalidated after the merge.
struct AppConfig {
    PipelineSettings pipeline;
    PlannerConfig planner;
    RidgeConfig ridge;
    PerturbationConfig perturbation;
    MatchThresholds thresholds;
    ScenarioConfig scenario;

    void validate() const {
        pipeline.validate();
        planner.validate();
        ridge.validate();
        scenario.validate();
        if (!(thresholds.normal_angle > 0.0))
            throw ConfigError("thresholds.normal_angle must be > 0");
        if (!(thresholds.centroid_dist > 0.0))
            throw ConfigError("thresholds.centroid_dist must be > 0");
    }
};

namespace detail {

inline void parse_pipeline_section(const Json& j, PipelineSettings& s) {
    const std::string w = "pipeline";
    require_keys(j, w, {"remove_ground", "ground_tol", "cluster_tol", "cluster_min_size"});
    s.remove_ground = get_bool(j, w, "remove_ground", s.remove_ground);
    s.ground_tol = get_num(j, w, "ground_tol", s.ground_tol);
    s.cluster_tol = get_num(j, w, "cluster_tol", s.cluster_tol);
    s.cluster_min_size = get_size(j, w, "cluster_min_size", s.cluster_min_size);
}

inline void parse_segmentation_section(const Json& j, SegmentationConfig& s) {
    const std::string w = "segmentation";
    require_keys(j, w, {"inlier_tol", "iterations", "min_inliers", "error_limit", "max_segments",
                        "cluster_tol", "seed", "use_normals", "normal_radius", "normal_tol",
                        "min_density_fraction"});
    s.inlier_tol = get_num(j, w, "inlier_tol", s.inlier_tol);
    s.iterations = get_size(j, w, "iterations", s.iterations);
    s.min_inliers = get_size(j, w, "min_inliers", s.min_inliers);
    s.error_limit = get_num(j, w, "error_limit", s.error_limit);
    s.max_segments = get_size(j, w, "max_segments", s.max_segments);
    s.cluster_tol = get_num(j, w, "cluster_tol", s.cluster_tol);
    s.seed = get_size(j, w, "seed", s.seed);
    s.use_normals = get_bool(j, w, "use_normals", s.use_normals);
    s.normal_radius = get_num(j, w, "normal_radius", s.normal_radius);
    s.normal_tol = get_num(j, w, "normal_tol", s.normal_tol);
    s.min_density_fraction = get_num(j, w, "min_density_fraction", s.min_density_fraction);
}

inline void parse_features_section(const Json& j, FeatureConfig& f) {
    const std::string w = "features";
    require_keys(j, w, {"tau_phi1", "tau_phi2", "tau_gamma1", "tau_gamma2", "tau_gamma3",
                        "tau_gamma4", "tau_gamma5", "existence_reward", "alpha", "u_up"});
    f.tau_phi1 = get_num(j, w, "tau_phi1", f.tau_phi1);
    f.tau_phi2 = get_num(j, w, "tau_phi2", f.tau_phi2);
    f.tau_gamma1 = get_num(j, w, "tau_gamma1", f.tau_gamma1);
    f.tau_gamma2 = get_num(j, w, "tau_gamma2", f.tau_gamma2);
    f.tau_gamma3 = get_num(j, w, "tau_gamma3", f.tau_gamma3);
    f.tau_gamma4 = get_num(j, w, "tau_gamma4", f.tau_gamma4);
    f.tau_gamma5 = get_num(j, w, "tau_gamma5", f.tau_gamma5);
    f.existence_reward = get_num(j, w, "existence_reward", f.existence_reward);
    f.alpha = get_num(j, w, "alpha", f.alpha);
    if (j.contains("u_up")) f.u_up = vec3_from_json(j.at("u_up"), w + ".u_up");
}

inline void parse_inference_section(const Json& j, InferenceConfig& c) {
    const std::string w = "inference";
    require_keys(j, w, {"c_fraction", "beam_limit", "allow_empty", "max_empty_sides", "prune",
                        "order_by_unary"});
    c.c_fraction = get_num(j, w, "c_fraction", c.c_fraction);
    c.beam_limit = get_size(j, w, "beam_limit", c.beam_limit);
    c.allow_empty = get_bool(j, w, "allow_empty", c.allow_empty);
    c.max_empty_sides = static_cast<int>(get_size(j, w, "max_empty_sides",
                                                  static_cast<std::size_t>(c.max_empty_sides)));
    c.prune = get_bool(j, w, "prune", c.prune);
    c.order_by_unary = get_bool(j, w, "order_by_unary", c.order_by_unary);
}

inline void parse_planner_section(const Json& j, PlannerConfig& p) {
    const std::string w = "planner";
    require_keys(j, w, {"steps", "hinge_tol", "interior_hint"});
    p.steps = get_size(j, w, "steps", p.steps);
    p.hinge_tol = get_num(j, w, "hinge_tol", p.hinge_tol);
    if (j.contains("interior_hint"))
        p.interior_hint = vec3_from_json(j.at("interior_hint"), w + ".interior_hint");
}

inline void parse_scenario_section(const Json& j, ScenarioConfig& s) {
    const std::string w = "scenario";
    require_keys(j, w, {"count", "width_min", "width_max", "depth_min", "depth_max", "height_min",
                        "height_max", "flap_min", "flap_max", "flap_guard", "yaw_min", "yaw_max",
                        "offset_xy", "density", "noise_sigma", "occluded_flaps",
                        "clutter_fraction", "clutter_margin"});
    s.count = get_size(j, w, "count", s.count);
    s.width_min = get_num(j, w, "width_min", s.width_min);
    s.width_max = get_num(j, w, "width_max", s.width_max);
    s.depth_min = get_num(j, w, "depth_min", s.depth_min);
    s.depth_max = get_num(j, w, "depth_max", s.depth_max);
    s.height_min = get_num(j, w, "height_min", s.height_min);
    s.height_max = get_num(j, w, "height_max", s.height_max);
    s.flap_min = get_num(j, w, "flap_min", s.flap_min);
    s.flap_max = get_num(j, w, "flap_max", s.flap_max);
    s.flap_guard = get_num(j, w, "flap_guard", s.flap_guard);
    s.yaw_min = get_num(j, w, "yaw_min", s.yaw_min);
    s.yaw_max = get_num(j, w, "yaw_max", s.yaw_max);
    s.offset_xy = get_num(j, w, "offset_xy", s.offset_xy);
    s.density = get_num(j, w, "density", s.density);
    s.noise_sigma = get_num(j, w, "noise_sigma", s.noise_sigma);
    s.occluded_flaps = get_size(j, w, "occluded_flaps", s.occluded_flaps);
    s.clutter_fraction = get_num(j, w, "clutter_fraction", s.clutter_fraction);
    s.clutter_margin = get_num(j, w, "clutter_margin", s.clutter_margin);
}

}  // namespace detail

inline AppConfig app_config_from_json(const Json& j) {
    detail::require_keys(j, "config", {"pipeline", "segmentation", "features", "inference",
                                       "planner", "ridge", "perturbation", "thresholds",
                                       "scenario"});
    AppConfig cfg;
    if (j.contains("pipeline")) detail::parse_pipeline_section(j.at("pipeline"), cfg.pipeline);
    if (j.contains("segmentation"))
        detail::parse_segmentation_section(j.at("segmentation"), cfg.pipeline.segmentation);
    if (j.contains("features"))
        detail::parse_features_section(j.at("features"), cfg.pipeline.features);
    if (j.contains("inference"))
        detail::parse_inference_section(j.at("inference"), cfg.pipeline.inference);
    if (j.contains("planner")) detail::parse_planner_section(j.at("planner"), cfg.planner);
    if (j.contains("ridge")) {
        detail::require_keys(j.at("ridge"), "ridge", {"lambda"});
        cfg.ridge.lambda = detail::get_num(j.at("ridge"), "ridge", "lambda", cfg.ridge.lambda);
    }
    if (j.contains("perturbation")) {
        detail::require_keys(j.at("perturbation"), "perturbation", {"per_scene", "seed"});
        cfg.perturbation.per_scene = detail::get_size(j.at("perturbation"), "perturbation",
                                                      "per_scene", cfg.perturbation.per_scene);
        cfg.perturbation.seed =
            detail::get_size(j.at("perturbation"), "perturbation", "seed", cfg.perturbation.seed);
    }
    if (j.contains("thresholds")) {
        detail::require_keys(j.at("thresholds"), "thresholds", {"normal_angle", "centroid_dist"});
        cfg.thresholds.normal_angle = detail::get_num(j.at("thresholds"), "thresholds",
                                                      "normal_angle", cfg.thresholds.normal_angle);
        cfg.thresholds.centroid_dist = detail::get_num(
            j.at("thresholds"), "thresholds", "centroid_dist", cfg.thresholds.centroid_dist);
    }
    if (j.contains("scenario")) detail::parse_scenario_section(j.at("scenario"), cfg.scenario);
    cfg.validate();
    return cfg;
}

inline AppConfig load_app_config(const std::string& path) {
    return app_config_from_json(load_json(path));
}

inline Json app_config_to_json(const AppConfig& cfg) {
    Json j;
    j["pipeline"] = Json{{"remove_ground", cfg.pipeline.remove_ground},
                         {"ground_tol", cfg.pipeline.ground_tol},
                         {"cluster_tol", cfg.pipeline.cluster_tol},
                         {"cluster_min_size", cfg.pipeline.cluster_min_size}};
    const SegmentationConfig& sg = cfg.pipeline.segmentation;
    j["segmentation"] = Json{{"inlier_tol", sg.inlier_tol},   {"iterations", sg.iterations},
                             {"min_inliers", sg.min_inliers}, {"error_limit", sg.error_limit},
                             {"max_segments", sg.max_segments}, {"cluster_tol", sg.cluster_tol},
                             {"seed", sg.seed},               {"use_normals", sg.use_normals},
                             {"normal_radius", sg.normal_radius}, {"normal_tol", sg.normal_tol},
                             {"min_density_fraction", sg.min_density_fraction}};
    const FeatureConfig& f = cfg.pipeline.features;
    j["features"] = Json{{"tau_phi1", f.tau_phi1},
                         {"tau_phi2", f.tau_phi2},
                         {"tau_gamma1", f.tau_gamma1},
                         {"tau_gamma2", f.tau_gamma2},
                         {"tau_gamma3", f.tau_gamma3},
                         {"tau_gamma4", f.tau_gamma4},
                         {"tau_gamma5", f.tau_gamma5},
                         {"existence_reward", f.existence_reward},
                         {"alpha", f.alpha},
                         {"u_up", vec3_to_json(f.u_up)}};
    const InferenceConfig& ic = cfg.pipeline.inference;
    j["inference"] = Json{{"c_fraction", ic.c_fraction},
                          {"beam_limit", ic.beam_limit},
                          {"allow_empty", ic.allow_empty},
                          {"max_empty_sides", ic.max_empty_sides},
                          {"prune", ic.prune},
                          {"order_by_unary", ic.order_by_unary}};
    j["planner"] = Json{{"steps", cfg.planner.steps}, {"hinge_tol", cfg.planner.hinge_tol}};
    if (cfg.planner.interior_hint)
        j["planner"]["interior_hint"] = vec3_to_json(*cfg.planner.interior_hint);
    j["ridge"] = Json{{"lambda", cfg.ridge.lambda}};
    j["perturbation"] =
        Json{{"per_scene", cfg.perturbation.per_scene}, {"seed", cfg.perturbation.seed}};
    j["thresholds"] = Json{{"normal_angle", cfg.thresholds.normal_angle},
                           {"centroid_dist", cfg.thresholds.centroid_dist}};
    const ScenarioConfig& sc = cfg.scenario;
    j["scenario"] = Json{{"count", sc.count},
                         {"width_min", sc.width_min},
                         {"width_max", sc.width_max},
                         {"depth_min", sc.depth_min},
                         {"depth_max", sc.depth_max},
                         {"height_min", sc.height_min},
                         {"height_max", sc.height_max},
                         {"flap_min", sc.flap_min},
                         {"flap_max", sc.flap_max},
                         {"flap_guard", sc.flap_guard},
                         {"yaw_min", sc.yaw_min},
                         {"yaw_max", sc.yaw_max},
                         {"offset_xy", sc.offset_xy},
                         {"density", sc.density},
                         {"noise_sigma", sc.noise_sigma},
                         {"occluded_flaps", sc.occluded_flaps},
                         {"clutter_fraction", sc.clutter_fraction},
                         {"clutter_margin", sc.clutter_margin}};
    return j;
}

}  // namespace carton
