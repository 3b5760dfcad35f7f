#pragma once

#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "carton/plane.hpp"
#include "carton/pointcloud.hpp"
#include "carton/roles.hpp"

namespace carton {

struct Pose {
    double yaw = 0.0;
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return yaw_rotation(yaw) * p + translation; }
    Vec3 rotate(const Vec3& v) const { return yaw_rotation(yaw) * v; }
};

// Open carton: base on z=0, four sides rising to `height`, one flap hinged on
// each side's top edge. Flap angle 0 keeps the flap coplanar with its side
// (straight up); pi/2 folds it fully open (horizontal, pointing outward).
struct BoxSpec {
    double width = 0.3;
    double depth = 0.25;
    double height = 0.2;
    std::array<double, 4> flap_angles = {kPi / 2, kPi / 2, kPi / 2, kPi / 2};
    Pose pose;
    double sampling_density = 20000.0;
    double noise_sigma = 0.0;
    std::set<int> occluded_faces;

    void validate() const {
        if (!(width > 0.0)) throw ConfigError("BoxSpec: width must be > 0");
        if (!(depth > 0.0)) throw ConfigError("BoxSpec: depth must be > 0");
        if (!(height > 0.0)) throw ConfigError("BoxSpec: height must be > 0");
        if (!(sampling_density > 0.0)) throw ConfigError("BoxSpec: sampling_density must be > 0");
        if (!(noise_sigma >= 0.0)) throw ConfigError("BoxSpec: noise_sigma must be >= 0");
        for (double a : flap_angles) {
            if (!std::isfinite(a)) throw ConfigError("BoxSpec: flap_angles must be finite");
        }
        for (int f : occluded_faces) {
            if (f < 0 || f >= kRoleCount) throw ConfigError("BoxSpec: occluded_faces id out of range");
        }
    }
};

struct FaceLabel {
    bool present = false;
    PlaneModel plane;
    Vec3 centroid = Vec3::Zero();
    std::array<Vec3, 4> corners = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

struct GroundTruthLabels {
    std::array<FaceLabel, kRoleCount> faces;

    std::size_t present_count() const {
        std::size_t n = 0;
        for (const auto& f : faces) n += f.present ? 1 : 0;
        return n;
    }
};

namespace detail {

struct FaceRect {
    // corner + u*e1 + v*e2 for u,v in [0,1] spans the face.
    Vec3 corner;
    Vec3 e1;
    Vec3 e2;
    Vec3 normal;
};

inline FaceLabel label_from_rect(const FaceRect& r, const Pose& pose) {
    FaceLabel lbl;
    lbl.present = true;
    std::array<Vec3, 4> local = {r.corner, r.corner + r.e1, r.corner + r.e1 + r.e2,
                                 r.corner + r.e2};
    // Order corners counterclockwise about the normal.
    Vec3 n = r.e1.cross(r.e2);
    if (n.dot(r.normal) < 0.0) std::swap(local[1], local[3]);
    for (std::size_t i = 0; i < 4; ++i) lbl.corners[i] = pose.apply(local[i]);
    lbl.centroid = pose.apply(r.corner + 0.5 * r.e1 + 0.5 * r.e2);
    Vec3 wn = pose.rotate(r.normal).normalized();
    lbl.plane.normal = wn;
    lbl.plane.offset = -wn.dot(lbl.centroid);
    return lbl;
}

inline void sample_face(const FaceRect& r, double density, double sigma, const Pose& pose,
                        Rng& rng, std::vector<Vec3>& out) {
    double area = r.e1.cross(r.e2).norm();
    auto count = static_cast<std::size_t>(std::llround(density * area));
    for (std::size_t i = 0; i < count; ++i) {
        double u = rng.uniform();
        double v = rng.uniform();
        Vec3 p = r.corner + u * r.e1 + v * r.e2;
        Vec3 noise(rng.normal(), rng.normal(), rng.normal());
        out.push_back(pose.apply(p) + sigma * noise);
    }
}

}  // namespace detail

// Face rectangles of the box in its local frame (base centered at origin).
inline std::array<detail::FaceRect, kRoleCount> box_face_rects(const BoxSpec& spec) {
    const double w = spec.width, d = spec.depth, h = spec.height;
    const std::array<Vec3, 4> outward = {Vec3(0, -1, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                         Vec3(-1, 0, 0)};
    const std::array<double, 4> wall_offset = {d / 2, w / 2, d / 2, w / 2};
    const std::array<double, 4> wall_length = {w, d, w, d};
    const std::array<double, 4> flap_depth = {d / 2, w / 2, d / 2, w / 2};

    std::array<detail::FaceRect, kRoleCount> rects;
    for (int s = 0; s < kSideCount; ++s) {
        Vec3 n = outward[static_cast<std::size_t>(s)];
        Vec3 edge = Vec3::UnitZ().cross(n);
        double half = wall_length[static_cast<std::size_t>(s)] / 2;
        Vec3 base_mid = wall_offset[static_cast<std::size_t>(s)] * n;
        detail::FaceRect side;
        side.corner = base_mid - half * edge;
        side.e1 = 2 * half * edge;
        side.e2 = h * Vec3::UnitZ();
        side.normal = n;
        rects[static_cast<std::size_t>(s)] = side;

        double theta = spec.flap_angles[static_cast<std::size_t>(s)];
        Vec3 dir = std::cos(theta) * Vec3::UnitZ() + std::sin(theta) * n;
        detail::FaceRect flap;
        flap.corner = side.corner + side.e2;
        flap.e1 = side.e1;
        flap.e2 = flap_depth[static_cast<std::size_t>(s)] * dir;
        flap.normal = edge.cross(dir).normalized();
        rects[static_cast<std::size_t>(flap_of_side(s))] = flap;
    }
    detail::FaceRect base;
    base.corner = Vec3(-w / 2, -d / 2, 0);
    base.e1 = Vec3(w, 0, 0);
    base.e2 = Vec3(0, d, 0);
    base.normal = Vec3::UnitZ();
    rects[kBase] = base;
    return rects;
}

// Deterministic synthetic scene: each non-occluded face is sampled uniformly
// at sampling_density (points per square meter), perturbed by isotropic
// Gaussian noise, and posed. Labels carry the exact pre-noise geometry in the
// posed frame. Each face draws from its own seed substream, so occluding one
// face does not shift the others.
inline std::pair<PointCloud, GroundTruthLabels> synth_box(const BoxSpec& spec,
                                                          std::uint64_t seed) {
    spec.validate();
    auto rects = box_face_rects(spec);
    PointCloud cloud;
    cloud.frame_note = "synth_box";
    GroundTruthLabels labels;
    for (int face = 0; face < kRoleCount; ++face) {
        if (spec.occluded_faces.count(face)) continue;
        const auto& r = rects[static_cast<std::size_t>(face)];
        labels.faces[static_cast<std::size_t>(face)] = detail::label_from_rect(r, spec.pose);
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(face));
        detail::sample_face(r, spec.sampling_density, spec.noise_sigma, spec.pose, rng,
                            cloud.points);
    }
    return {std::move(cloud), labels};
}

// Free-floating rectangular patch, for building scenes that are not boxes.
inline PointCloud synth_rect_patch(const Vec3& corner, const Vec3& e1, const Vec3& e2,
                                   double density, double sigma, std::uint64_t seed) {
    detail::FaceRect r{corner, e1, e2, e1.cross(e2).normalized()};
    Rng rng(seed);
    PointCloud cloud;
    cloud.frame_note = "synth_rect_patch";
    detail::sample_face(r, density, sigma, Pose{}, rng, cloud.points);
    return cloud;
}

// Appends round(fraction * |cloud|) uniform points inside the cloud's axis
// bounding box grown by `margin` on every face.
inline void add_clutter(PointCloud& cloud, double fraction, double margin, std::uint64_t seed) {
    if (!(fraction >= 0.0)) throw ConfigError("add_clutter: fraction must be >= 0");
    if (cloud.empty()) return;
    Vec3 lo = cloud.points.front(), hi = cloud.points.front();
    for (const auto& p : cloud.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    lo.array() -= margin;
    hi.array() += margin;
    auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cloud.size())));
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        Vec3 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()),
               rng.uniform(lo.z(), hi.z()));
        cloud.points.push_back(p);
    }
}

}  // namespace carton
