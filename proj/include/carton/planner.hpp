#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carton/inference.hpp"
#include "carton/segmentation.hpp"

namespace carton {

struct PlannerConfig {
    std::size_t steps = 8;     // waypoints per flap, including the start and end poses
    double hinge_tol = 0.05;   // max edge-to-edge gap that still counts as a hinge
    std::optional<Vec3> interior_hint;  // a point inside the box, if the caller knows one

    void validate() const {
        if (steps < 2) throw ConfigError("steps must be >= 2");
        if (!(hinge_tol > 0.0)) throw ConfigError("hinge_tol must be > 0");
    }
};

struct FlapPlan {
    int flap_role = -1;
    int side_role = -1;
    Vec3 hinge_point = Vec3::Zero();
    Vec3 hinge_dir = Vec3::Zero();  // unit vector along the hinge line
    double angle = 0.0;             // total rotation from current to closed
    std::vector<std::array<Vec3, 4>> waypoints;  // flap corners per step
};

struct ClosingPlan {
    std::vector<FlapPlan> flaps;
    std::vector<std::pair<int, std::string>> skipped;  // (flap role, reason)
};

namespace detail {

// Closest pair of rectangle edges between flap and side; returns (flap edge
// index, gap).  The hinge line is the flap's own edge of that pair.
inline std::pair<int, double> closest_flap_edge(const Segment& flap, const Segment& side) {
    int best_edge = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        const Vec3& a0 = flap.corners[static_cast<std::size_t>(i)];
        const Vec3& a1 = flap.corners[static_cast<std::size_t>((i + 1) % 4)];
        for (int j = 0; j < 4; ++j) {
            const Vec3& b0 = side.corners[static_cast<std::size_t>(j)];
            const Vec3& b1 = side.corners[static_cast<std::size_t>((j + 1) % 4)];
            const double d = segment_segment_distance(a0, a1, b0, b1);
            if (d < best) {
                best = d;
                best_edge = i;
            }
        }
    }
    return {best_edge, best};
}

}  // namespace detail

// Rigid rotation arc that folds a flap about its shared edge with a side until
// it lies in the box-top plane (the plane through the hinge perpendicular to
// the side).  Waypoints subdivide the rotation into equal increments; the
// first waypoint is the flap as given and a closed flap yields identical
// waypoints throughout.
inline FlapPlan flap_arc(const Segment& flap, const Segment& side, std::size_t steps,
                         double hinge_tol = 0.05,
                         const std::optional<Vec3>& interior_hint = std::nullopt) {
    if (steps < 2) throw ConfigError("steps must be >= 2");
    auto [edge, gap] = detail::closest_flap_edge(flap, side);
    if (gap > hinge_tol)
        throw NoHingeError("closest flap/side edge pair is " + std::to_string(gap) +
                           " m apart (tolerance " + std::to_string(hinge_tol) + ")");

    const Vec3& anchor = flap.corners[static_cast<std::size_t>(edge)];
    Vec3 h = flap.corners[static_cast<std::size_t>((edge + 1) % 4)] - anchor;
    const double hlen = h.norm();
    if (hlen < 1e-12) throw DegenerateInput("hinge edge has zero length");
    h /= hlen;

    const Vec3& ns = side.plane.normal;
    Vec3 up = ns.cross(h);
    const double uplen = up.norm();
    if (uplen < 1e-9) throw DegenerateInput("hinge is parallel to the side normal");
    up /= uplen;
    // orient "up" away from the side's interior so the top plane is the box top
    const double toward_hinge = up.dot(anchor - side.centroid);
    if (toward_hinge < -1e-9)
        up = -up;
    else if (toward_hinge <= 1e-9 && up.z() < 0.0)
        up = -up;

    // in-plane closed direction, perpendicular to the hinge; sign = fold direction
    Vec3 w = up.cross(h);
    double sign = 0.0;
    if (interior_hint) {
        const double d = w.dot(*interior_hint - anchor);
        if (std::abs(d) > 1e-9) sign = d > 0.0 ? 1.0 : -1.0;
    }
    if (sign == 0.0) {
        // an open flap leans away from the box: fold toward the opposite half-space
        const double s = side.plane.signed_distance(flap.centroid);
        if (std::abs(s) > 1e-9) sign = s * w.dot(ns) < 0.0 ? 1.0 : -1.0;
    }
    if (sign == 0.0) sign = w.dot(ns) > 0.0 ? 1.0 : -1.0;  // canonical normal faces inward
    w *= sign;

    Vec3 v = flap.centroid - anchor;
    v -= v.dot(h) * h;
    const double vlen = v.norm();
    if (vlen < 1e-12) throw DegenerateInput("flap centroid lies on the hinge line");
    v /= vlen;

    double theta = std::atan2(h.dot(v.cross(w)), v.dot(w));
    if (std::abs(theta) > kPi - 1e-6) {
        // fully open flap: half a turn either way reaches the target, go over the top
        const double mag = std::abs(theta);
        const Vec3 mid_pos = rotate_about_line(flap.centroid, anchor, h, mag / 2.0);
        const Vec3 mid_neg = rotate_about_line(flap.centroid, anchor, h, -mag / 2.0);
        theta = (mid_pos - anchor).dot(up) >= (mid_neg - anchor).dot(up) ? mag : -mag;
    }

    FlapPlan plan;
    plan.hinge_point = anchor;
    plan.hinge_dir = h;
    plan.angle = theta;
    plan.waypoints.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double a = theta * static_cast<double>(i) / static_cast<double>(steps - 1);
        std::array<Vec3, 4> pose;
        for (std::size_t c = 0; c < 4; ++c)
            pose[c] = rotate_about_line(flap.corners[c], anchor, h, a);
        plan.waypoints.push_back(pose);
    }
    return plan;
}

// Assigned flaps in closing order: ascending area, ties by role id.
inline std::vector<int> closing_order(const Assignment& assignment,
                                      const std::vector<Segment>& segments) {
    std::vector<int> flaps;
    for (int role = kFlap0; role < kRoleCount; ++role)
        if (assignment[role] != kEmpty) flaps.push_back(role);
    std::sort(flaps.begin(), flaps.end(), [&](int a, int b) {
        const double aa = segments[static_cast<std::size_t>(assignment[a])].area;
        const double ab = segments[static_cast<std::size_t>(assignment[b])].area;
        if (aa != ab) return aa < ab;
        return a < b;
    });
    return flaps;
}

inline ClosingPlan make_closing_plan(const Assignment& assignment,
                                     const std::vector<Segment>& segments,
                                     const PlannerConfig& cfg = {}) {
    cfg.validate();
    ClosingPlan plan;

    // without an explicit hint, aim folds at the center of the assigned box body
    std::optional<Vec3> hint = cfg.interior_hint;
    if (!hint) {
        Vec3 center = Vec3::Zero();
        int count = 0;
        for (int role = 0; role <= kBase; ++role) {
            if (assignment[role] == kEmpty) continue;
            center += segments[static_cast<std::size_t>(assignment[role])].centroid;
            ++count;
        }
        if (count > 0) hint = center / static_cast<double>(count);
    }

    for (int role : closing_order(assignment, segments)) {
        const int side_role = side_of_flap(role);
        if (assignment[side_role] == kEmpty) {
            plan.skipped.emplace_back(role, "supporting side is unassigned");
            continue;
        }
        const Segment& flap = segments[static_cast<std::size_t>(assignment[role])];
        const Segment& side = segments[static_cast<std::size_t>(assignment[side_role])];
        try {
            FlapPlan fp = flap_arc(flap, side, cfg.steps, cfg.hinge_tol, hint);
            fp.flap_role = role;
            fp.side_role = side_role;
            plan.flaps.push_back(std::move(fp));
        } catch (const Error& e) {
            plan.skipped.emplace_back(role, e.what());
        }
    }
    return plan;
}

}  // namespace carton
