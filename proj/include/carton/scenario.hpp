#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "carton/pointcloud.hpp"
#include "carton/synth.hpp"

namespace carton {

// Randomized box-scene generator: dimensions, pose, and flap angles drawn
// uniformly from the ranges below, with optional occlusion, noise, and
// clutter.  Flap angles default well away from 0 so flaps never merge into
// their side's plane, and a guard band around pi/2 keeps a flap from lying
// in one plane with the box's top rim, where plane segmentation cannot
// separate it from the neighboring faces.
struct ScenarioConfig {
    std::size_t count = 20;
    double width_min = 0.2, width_max = 0.4;
    double depth_min = 0.15, depth_max = 0.35;
    double height_min = 0.1, height_max = 0.3;
    double flap_min = kPi / 3.0, flap_max = 2.0 * kPi / 3.0;
    double flap_guard = 0.15;  // radians kept clear on each side of pi/2
    double yaw_min = 0.0, yaw_max = 2.0 * kPi;
    double offset_xy = 0.3;  // translation drawn from [-offset_xy, offset_xy] in x and y
    double density = 20000.0;
    double noise_sigma = 0.0;
    std::size_t occluded_flaps = 0;  // flaps dropped at random per scene
    double clutter_fraction = 0.0;
    double clutter_margin = 0.1;

    void validate() const {
        if (count == 0) throw ConfigError("count must be >= 1");
        const auto range = [](double lo, double hi, const char* what) {
            if (!(lo <= hi)) throw ConfigError(std::string(what) + ": min exceeds max");
            if (!(lo > 0.0)) throw ConfigError(std::string(what) + ": must be positive");
        };
        range(width_min, width_max, "width");
        range(depth_min, depth_max, "depth");
        range(height_min, height_max, "height");
        if (!(flap_min <= flap_max)) throw ConfigError("flap angle: min exceeds max");
        if (!(flap_guard >= 0.0)) throw ConfigError("flap_guard must be >= 0");
        if (!(yaw_min <= yaw_max)) throw ConfigError("yaw: min exceeds max");
        if (!(offset_xy >= 0.0)) throw ConfigError("offset_xy must be >= 0");
        if (!(density > 0.0)) throw ConfigError("density must be > 0");
        if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
        if (occluded_flaps > 4) throw ConfigError("occluded_flaps must be <= 4");
        if (!(clutter_fraction >= 0.0 && clutter_fraction < 1.0))
            throw ConfigError("clutter_fraction must be in [0, 1)");
        if (!(clutter_margin >= 0.0)) throw ConfigError("clutter_margin must be >= 0");
    }
};

struct SyntheticScene {
    BoxSpec spec;
    PointCloud cloud;
    GroundTruthLabels labels;
};

inline SyntheticScene make_scene(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng param = Rng::substream(seed, 1);

    SyntheticScene scene;
    BoxSpec& spec = scene.spec;
    spec.width = param.uniform(cfg.width_min, cfg.width_max);
    spec.depth = param.uniform(cfg.depth_min, cfg.depth_max);
    spec.height = param.uniform(cfg.height_min, cfg.height_max);
    const auto draw_flap_angle = [&param, &cfg]() {
        const double lo = cfg.flap_min, hi = cfg.flap_max;
        const double left = std::max(0.0, std::min(hi, kPi / 2 - cfg.flap_guard) - lo);
        const double right = std::max(0.0, hi - std::max(lo, kPi / 2 + cfg.flap_guard));
        if (cfg.flap_guard <= 0.0 || left + right <= 0.0) return param.uniform(lo, hi);
        const double u = param.uniform(0.0, left + right);
        return u < left ? lo + u : std::max(lo, kPi / 2 + cfg.flap_guard) + (u - left);
    };
    for (int i = 0; i < 4; ++i) spec.flap_angles[static_cast<std::size_t>(i)] = draw_flap_angle();
    spec.pose.yaw = param.uniform(cfg.yaw_min, cfg.yaw_max);
    spec.pose.translation =
        Vec3(param.uniform(-cfg.offset_xy, cfg.offset_xy),
             param.uniform(-cfg.offset_xy, cfg.offset_xy), 0.0);
    spec.sampling_density = cfg.density;
    spec.noise_sigma = cfg.noise_sigma;

    std::array<int, 4> flap_roles = {kFlap0, kFlap1, kFlap2, kFlap3};
    for (std::size_t k = 0; k < cfg.occluded_flaps; ++k) {
        const std::size_t pick = k + param.index(4 - k);
        std::swap(flap_roles[k], flap_roles[pick]);
        spec.occluded_faces.insert(flap_roles[k]);
    }

    auto [cloud, labels] = synth_box(spec, Rng::substream(seed, 2).raw());
    scene.cloud = std::move(cloud);
    scene.labels = std::move(labels);
    if (cfg.clutter_fraction > 0.0)
        add_clutter(scene.cloud, cfg.clutter_fraction, cfg.clutter_margin,
                    Rng::substream(seed, 3).raw());
    return scene;
}

inline std::vector<SyntheticScene> make_dataset(const ScenarioConfig& cfg, std::uint64_t seed) {
    std::vector<SyntheticScene> scenes;
    scenes.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i)
        scenes.push_back(make_scene(cfg, splitmix64(seed ^ splitmix64(i + 0x5eed))));
    return scenes;
}

}  // namespace carton
