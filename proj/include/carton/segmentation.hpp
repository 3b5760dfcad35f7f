#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <vector>

#include "carton/plane.hpp"
#include "carton/pointcloud.hpp"

namespace carton {

struct Segment {
    PlaneModel plane;
    Vec3 centroid = Vec3::Zero();
    std::array<Vec3, 4> corners = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    double area = 0.0;
    std::size_t inlier_count = 0;
    double fit_error = 0.0;
};

struct SegmentationConfig {
    double inlier_tol = 0.01;
    std::size_t iterations = 500;
    std::size_t min_inliers = 100;
    double error_limit = 0.01;
    std::size_t max_segments = 12;
    double cluster_tol = 0.02;
    std::uint64_t seed = 0;
    // Normal gating keeps a plane from absorbing points it merely grazes: an
    // inlier must also have its local surface normal aligned with the plane.
    // Without it, a plane cutting several faces at shallow angles can collect
    // more consensus than any single true face.
    bool use_normals = true;
    double normal_radius = 0.02;
    double normal_tol = 0.2;  // radians, as an axis-to-axis angle
    // A genuine face carries the scene's sampling density; a plane scraped
    // together from scattered rejects covers a large rectangle with few
    // points.  Segments below this fraction of the median points-per-area
    // are dropped.  0 disables the filter.
    double min_density_fraction = 0.2;

    void validate() const {
        if (!(inlier_tol > 0.0)) throw ConfigError("SegmentationConfig: inlier_tol must be > 0");
        if (iterations == 0) throw ConfigError("SegmentationConfig: iterations must be > 0");
        if (min_inliers == 0) throw ConfigError("SegmentationConfig: min_inliers must be > 0");
        if (!(error_limit > 0.0)) throw ConfigError("SegmentationConfig: error_limit must be > 0");
        if (max_segments == 0) throw ConfigError("SegmentationConfig: max_segments must be > 0");
        if (!(cluster_tol > 0.0)) throw ConfigError("SegmentationConfig: cluster_tol must be > 0");
        if (!(normal_radius > 0.0))
            throw ConfigError("SegmentationConfig: normal_radius must be > 0");
        if (!(normal_tol > 0.0 && normal_tol < kPi / 2))
            throw ConfigError("SegmentationConfig: normal_tol must be in (0, pi/2)");
        if (!(min_density_fraction >= 0.0 && min_density_fraction < 1.0))
            throw ConfigError("SegmentationConfig: min_density_fraction must be in [0, 1)");
    }
};

// Andrew monotone chain. Returns the hull counterclockwise with strictly
// convex turns (collinear points dropped); vertices are a subset of inputs.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
    if (pts.size() < 3) throw DegenerateInput("convex_hull_2d: need at least 3 points");
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) {
                              return a.x() == b.x() && a.y() == b.y();
                          }),
              pts.end());
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 0 ? k - 1 : 0);
    if (hull.size() < 3) throw DegenerateInput("convex_hull_2d: points are collinear");
    return hull;
}

struct BoundingRect {
    std::array<Vec2, 4> corners;
    double area = 0.0;
};

// Minimum-area enclosing rectangle. One rectangle edge is collinear with a
// hull edge, so scanning hull edges is exhaustive. Corners counterclockwise.
inline BoundingRect min_bounding_rect(const std::vector<Vec2>& hull) {
    if (hull.size() < 3) throw DegenerateInput("min_bounding_rect: need a convex polygon");
    BoundingRect best;
    best.area = std::numeric_limits<double>::infinity();
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 edge = hull[(i + 1) % n] - hull[i];
        double len = edge.norm();
        if (len < 1e-15) continue;
        Vec2 ux = edge / len;
        Vec2 uy(-ux.y(), ux.x());
        double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
        double min_y = min_x, max_y = -min_x;
        for (const auto& p : hull) {
            double x = ux.dot(p), y = uy.dot(p);
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
        double area = (max_x - min_x) * (max_y - min_y);
        if (area < best.area) {
            best.area = area;
            best.corners = {min_x * ux + min_y * uy, max_x * ux + min_y * uy,
                            max_x * ux + max_y * uy, min_x * ux + max_y * uy};
        }
    }
    if (!std::isfinite(best.area))
        throw DegenerateInput("min_bounding_rect: degenerate polygon");
    return best;
}

// Builds a Segment for a planar patch: project onto the plane, hull the
// projections, fit the minimum rectangle, lift corners back to 3D.
inline Segment build_segment(const std::vector<Vec3>& points,
                             const std::vector<std::size_t>& patch, const PlaneModel& plane) {
    if (patch.size() < 3) throw DegenerateInput("build_segment: patch too small");
    Vec3 origin = Vec3::Zero();
    for (std::size_t i : patch) origin += points[i];
    origin /= static_cast<double>(patch.size());
    Vec3 centroid = origin;
    origin = plane.project(origin);

    auto [e1, e2] = plane_basis(plane.normal);
    std::vector<Vec2> flat;
    flat.reserve(patch.size());
    for (std::size_t i : patch) {
        Vec3 d = points[i] - origin;
        flat.emplace_back(d.dot(e1), d.dot(e2));
    }
    BoundingRect rect = min_bounding_rect(convex_hull_2d(std::move(flat)));

    Segment seg;
    seg.plane = plane;
    seg.centroid = centroid;
    for (std::size_t i = 0; i < 4; ++i) {
        seg.corners[i] = origin + rect.corners[i].x() * e1 + rect.corners[i].y() * e2;
    }
    seg.area = rect.area;
    seg.inlier_count = patch.size();
    seg.fit_error = rms_plane_distance(plane, points, patch);
    return seg;
}

// Segment with known corners, for constructing scenes directly. Corners must
// be in counterclockwise rectangle order; the normal follows that order.
inline Segment segment_from_corners(const std::array<Vec3, 4>& corners) {
    Vec3 e1 = corners[1] - corners[0];
    Vec3 e2 = corners[3] - corners[0];
    Vec3 n = e1.cross(e2);
    double nn = n.norm();
    if (nn < 1e-15) throw DegenerateInput("segment_from_corners: degenerate rectangle");
    Segment seg;
    seg.plane.normal = n / nn;
    seg.corners = corners;
    seg.centroid = 0.25 * (corners[0] + corners[1] + corners[2] + corners[3]);
    seg.plane.offset = -seg.plane.normal.dot(seg.centroid);
    seg.area = e1.norm() * e2.norm();
    return seg;
}

namespace detail {

// Normal gating drops points whose neighborhoods straddle two surfaces, and
// such a band across a face can split it into pieces extracted separately.
// Reunite them: two segments on one plane merge when the dropped points on
// that plane physically bridge them; the bridge is folded into the merged
// patch. Disconnected coplanar patches with no bridge stay apart.
inline void merge_split_segments(const std::vector<Vec3>& points, const SegmentationConfig& cfg,
                                 std::vector<Segment>& segments,
                                 std::vector<std::vector<std::size_t>>& patch_ids,
                                 std::vector<std::size_t>& leftover) {
    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        for (std::size_t a = 0; a < segments.size() && !merged_any; ++a) {
            for (std::size_t b = a + 1; b < segments.size() && !merged_any; ++b) {
                const Segment& sa = segments[a];
                const Segment& sb = segments[b];
                if (axis_angle(sa.plane.normal, sb.plane.normal) > cfg.normal_tol) continue;
                if (sa.plane.distance(sb.centroid) > 2 * cfg.inlier_tol ||
                    sb.plane.distance(sa.centroid) > 2 * cfg.inlier_tol)
                    continue;

                std::vector<std::size_t> bridge;
                for (std::size_t i : leftover) {
                    if (sa.plane.distance(points[i]) <= cfg.inlier_tol ||
                        sb.plane.distance(points[i]) <= cfg.inlier_tol)
                        bridge.push_back(i);
                }

                // 0 = from a, 1 = from b, 2 = bridge candidate
                std::vector<std::size_t> ids;
                std::vector<int> tag;
                for (std::size_t i : patch_ids[a]) ids.push_back(i), tag.push_back(0);
                for (std::size_t i : patch_ids[b]) ids.push_back(i), tag.push_back(1);
                for (std::size_t i : bridge) ids.push_back(i), tag.push_back(2);
                std::vector<Vec3> pts;
                pts.reserve(ids.size());
                for (std::size_t i : ids) pts.push_back(points[i]);

                auto comps = euclidean_cluster_indices(pts, cfg.cluster_tol, 1);
                for (const auto& comp : comps) {
                    bool has_a = false, has_b = false;
                    for (std::size_t i : comp) {
                        has_a = has_a || tag[i] == 0;
                        has_b = has_b || tag[i] == 1;
                    }
                    if (!has_a || !has_b) continue;

                    std::vector<std::size_t> joined;
                    std::vector<char> absorbed(points.size(), 0);
                    joined.reserve(comp.size());
                    for (std::size_t i : comp) {
                        joined.push_back(ids[i]);
                        if (tag[i] == 2) absorbed[ids[i]] = 1;
                    }
                    PlaneModel plane;
                    Segment joined_seg;
                    try {
                        plane = fit_plane_tls(points, joined);
                        joined_seg = build_segment(points, joined, plane);
                    } catch (const DegenerateInput&) {
                        break;
                    }
                    segments[a] = joined_seg;
                    patch_ids[a] = std::move(joined);
                    segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(b));
                    patch_ids.erase(patch_ids.begin() + static_cast<std::ptrdiff_t>(b));
                    std::erase_if(leftover, [&](std::size_t i) { return absorbed[i] != 0; });
                    merged_any = true;
                    break;
                }
            }
        }
    }
}

}  // namespace detail

// Iterative plane extraction: fit the dominant RANSAC plane, keep only the
// largest connected patch of its inliers, refit on that patch, emit it if it
// is big and tight enough, remove its points, repeat. Stops at max_segments
// or at the first non-qualifying plane.
inline std::vector<Segment> extract_segments(const PointCloud& cluster,
                                             const SegmentationConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> remaining(cluster.size());
    std::iota(remaining.begin(), remaining.end(), 0);

    std::vector<Vec3> cluster_normals;
    if (cfg.use_normals)
        cluster_normals = estimate_normals(cluster.points, cfg.normal_radius);

    std::vector<Segment> segments;
    std::vector<std::vector<std::size_t>> patch_ids;  // per segment, into cluster.points
    std::uint64_t round = 0;
    while (segments.size() < cfg.max_segments &&
           remaining.size() >= std::max<std::size_t>(3, cfg.min_inliers)) {
        std::vector<Vec3> sub;
        std::vector<Vec3> sub_normals;
        sub.reserve(remaining.size());
        sub_normals.reserve(cfg.use_normals ? remaining.size() : 0);
        for (std::size_t i : remaining) {
            sub.push_back(cluster.points[i]);
            if (cfg.use_normals) sub_normals.push_back(cluster_normals[i]);
        }
        PointCloud sub_cloud{std::move(sub), cluster.frame_note};

        RansacResult fit;
        try {
            fit = ransac_plane_gated(sub_cloud.points, sub_normals, cfg.inlier_tol,
                                     cfg.normal_tol, cfg.iterations,
                                     splitmix64(cfg.seed + round));
        } catch (const DegenerateInput&) {
            break;
        }
        ++round;

        std::vector<Vec3> inlier_pts;
        inlier_pts.reserve(fit.inliers.size());
        for (std::size_t i : fit.inliers) inlier_pts.push_back(sub_cloud.points[i]);
        auto components = euclidean_cluster_indices(inlier_pts, cfg.cluster_tol, 1);
        if (components.empty()) break;
        std::vector<std::size_t> patch;
        patch.reserve(components.front().size());
        for (std::size_t i : components.front()) patch.push_back(fit.inliers[i]);

        if (patch.size() < cfg.min_inliers || patch.size() < 3) break;
        PlaneModel plane = fit_plane_tls(sub_cloud.points, patch);
        double err = rms_plane_distance(plane, sub_cloud.points, patch);
        if (err > cfg.error_limit) break;

        Segment seg;
        try {
            seg = build_segment(sub_cloud.points, patch, plane);
        } catch (const DegenerateInput&) {
            break;
        }
        segments.push_back(seg);
        patch_ids.emplace_back();
        patch_ids.back().reserve(patch.size());
        for (std::size_t i : patch) patch_ids.back().push_back(remaining[i]);

        std::vector<char> drop(remaining.size(), 0);
        for (std::size_t i : patch) drop[i] = 1;
        std::vector<std::size_t> next;
        next.reserve(remaining.size() - patch.size());
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (!drop[i]) next.push_back(remaining[i]);
        }
        remaining = std::move(next);
    }

    if (cfg.use_normals)
        detail::merge_split_segments(cluster.points, cfg, segments, patch_ids, remaining);

    // Late rounds can assemble a plane out of the stragglers earlier rounds
    // rejected (edge bands mostly), sprawling over a big rectangle with a
    // tenth of the support a sampled face carries.  The densest segments set
    // the scene's reference; anything far below the median is such a scrape.
    if (cfg.min_density_fraction > 0.0 && segments.size() > 1) {
        std::vector<double> density;
        density.reserve(segments.size());
        for (const Segment& s : segments)
            density.push_back(s.area > 0.0 ? static_cast<double>(s.inlier_count) / s.area : 0.0);
        std::vector<double> sorted = density;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double floor = cfg.min_density_fraction * sorted[sorted.size() / 2];
        std::vector<Segment> kept;
        kept.reserve(segments.size());
        for (std::size_t i = 0; i < segments.size(); ++i)
            if (density[i] >= floor) kept.push_back(segments[i]);
        segments = std::move(kept);
    }
    return segments;
}

}  // namespace carton
