#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "carton/model.hpp"
#include "carton/synth.hpp"

namespace carton {

struct MatchThresholds {
    double normal_angle = 10.0 * kPi / 180.0;
    double centroid_dist = 0.05;
};

// A segment counts as the labeled face when the plane normals agree as axes
// and the centroids are close.
inline bool segment_matches_label(const Segment& seg, const FaceLabel& label,
                                  const MatchThresholds& thr = {}) {
    if (!label.present) return false;
    if (axis_angle(seg.plane.normal, label.plane.normal) > thr.normal_angle) return false;
    return (seg.centroid - label.centroid).norm() <= thr.centroid_dist;
}

struct GroundTruthMatch {
    Assignment assignment;
    bool complete = true;               // every present role found a segment
    std::vector<int> unmatched_roles;   // present roles with no candidate left
};

// Injective role -> segment matching: all qualifying (role, segment) pairs
// ranked by centroid distance, taken greedily.
inline GroundTruthMatch match_ground_truth(const GroundTruthLabels& labels,
                                           const std::vector<Segment>& segments,
                                           const MatchThresholds& thr = {}) {
    std::vector<std::tuple<double, int, int>> pairs;  // (distance, role, segment)
    for (int role = 0; role < kRoleCount; ++role) {
        const FaceLabel& lbl = labels.faces[static_cast<std::size_t>(role)];
        if (!lbl.present) continue;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if (segment_matches_label(segments[s], lbl, thr)) {
                pairs.emplace_back((segments[s].centroid - lbl.centroid).norm(), role,
                                   static_cast<int>(s));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    GroundTruthMatch out;
    std::vector<char> seg_used(segments.size(), 0);
    std::array<char, kRoleCount> role_done{};
    for (const auto& [dist, role, seg] : pairs) {
        (void)dist;
        if (role_done[static_cast<std::size_t>(role)] || seg_used[static_cast<std::size_t>(seg)])
            continue;
        out.assignment[role] = seg;
        role_done[static_cast<std::size_t>(role)] = 1;
        seg_used[static_cast<std::size_t>(seg)] = 1;
    }
    for (int role = 0; role < kRoleCount; ++role) {
        if (labels.faces[static_cast<std::size_t>(role)].present &&
            !role_done[static_cast<std::size_t>(role)]) {
            out.complete = false;
            out.unmatched_roles.push_back(role);
        }
    }
    return out;
}

// Reference point fed to the absolute-location feature: the mean of the
// segment centroids of the scene under consideration.
inline Vec3 scene_reference_point(const std::vector<Segment>& segments) {
    Vec3 c = Vec3::Zero();
    if (segments.empty()) return c;
    for (const Segment& s : segments) c += s.centroid;
    return c / static_cast<double>(segments.size());
}

}  // namespace carton
