#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "carton/plane.hpp"

namespace carton {

using Point3 = Vec3;

struct PointCloud {
    std::vector<Point3> points;
    std::string frame_note;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

inline Vec3 cloud_centroid(const PointCloud& cloud) {
    Vec3 c = Vec3::Zero();
    if (cloud.empty()) return c;
    for (const auto& p : cloud.points) c += p;
    return c / static_cast<double>(cloud.size());
}

namespace detail {

// Voxel hash for fixed-radius neighbor queries. Cell size equals the query
// radius, so every pair within the radius lives in adjacent cells.
class VoxelGrid {
public:
    VoxelGrid(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell) {
        buckets_.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) buckets_[key(points[i])].push_back(i);
    }

    template <typename Fn>
    void for_each_neighbor(std::size_t i, double radius, Fn&& fn) const {
        const Vec3& p = points_[i];
        std::array<std::int64_t, 3> c = cell_of(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = buckets_.find(pack(c[0] + dx, c[1] + dy, c[2] + dz));
                    if (it == buckets_.end()) continue;
                    for (std::size_t j : it->second) {
                        if (j != i && (points_[j] - p).norm() <= radius) fn(j);
                    }
                }
    }

private:
    std::array<std::int64_t, 3> cell_of(const Vec3& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
                static_cast<std::int64_t>(std::floor(p.y() / cell_)),
                static_cast<std::int64_t>(std::floor(p.z() / cell_))};
    }
    static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z) {
        auto h = static_cast<std::uint64_t>(x) * 0x8DA6B343ull;
        h ^= static_cast<std::uint64_t>(y) * 0xD8163841ull;
        h ^= static_cast<std::uint64_t>(z) * 0xCB1AB31Full;
        return h;
    }
    std::uint64_t key(const Vec3& p) const {
        auto c = cell_of(p);
        return pack(c[0], c[1], c[2]);
    }

    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace detail

// Per-point surface normals from a total-least-squares plane over the
// neighbors within `radius`. Points with fewer than three neighbors, or with
// a degenerate (collinear) neighborhood, get a zero vector. The sign of each
// normal is arbitrary; compare them as axes.
inline std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, double radius) {
    if (!(radius > 0.0)) throw ConfigError("estimate_normals: radius must be > 0");
    std::vector<Vec3> normals(points.size(), Vec3::Zero());
    if (points.empty()) return normals;

    detail::VoxelGrid grid(points, radius);
    std::vector<std::size_t> nbrs;
    for (std::size_t i = 0; i < points.size(); ++i) {
        nbrs.assign(1, i);
        grid.for_each_neighbor(i, radius, [&](std::size_t j) { nbrs.push_back(j); });
        if (nbrs.size() < 4) continue;

        Vec3 mean = Vec3::Zero();
        for (std::size_t j : nbrs) mean += points[j];
        mean /= static_cast<double>(nbrs.size());
        Mat3 scatter = Mat3::Zero();
        for (std::size_t j : nbrs) {
            Vec3 d = points[j] - mean;
            scatter += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
        if (eig.eigenvalues()(1) <= 1e-20) continue;  // neighbors are collinear
        normals[i] = eig.eigenvectors().col(0);
    }
    return normals;
}

// Connected components of the graph linking points within distance `tol`
// (exact single linkage). Components smaller than `min_size` are dropped.
// Returned clusters are index lists into `points`, largest first; equal sizes
// are ordered by smallest contained index.
inline std::vector<std::vector<std::size_t>> euclidean_cluster_indices(
    const std::vector<Vec3>& points, double tol, std::size_t min_size) {
    if (tol <= 0.0) throw ConfigError("euclidean_cluster: tol must be > 0");
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> clusters;
    if (n == 0) return clusters;

    detail::VoxelGrid grid(points, tol);
    std::vector<char> visited(n, 0);
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (visited[seed]) continue;
        std::vector<std::size_t> component;
        stack.assign(1, seed);
        visited[seed] = 1;
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            component.push_back(i);
            grid.for_each_neighbor(i, tol, [&](std::size_t j) {
                if (!visited[j]) {
                    visited[j] = 1;
                    stack.push_back(j);
                }
            });
        }
        if (component.size() >= min_size) {
            std::sort(component.begin(), component.end());
            clusters.push_back(std::move(component));
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const auto& a, const auto& b) {
                         if (a.size() != b.size()) return a.size() > b.size();
                         return a.front() < b.front();
                     });
    return clusters;
}

inline std::vector<PointCloud> euclidean_cluster(const PointCloud& cloud, double tol,
                                                 std::size_t min_size) {
    std::vector<PointCloud> out;
    for (const auto& idx : euclidean_cluster_indices(cloud.points, tol, min_size)) {
        PointCloud c;
        c.frame_note = cloud.frame_note;
        c.points.reserve(idx.size());
        for (std::size_t i : idx) c.points.push_back(cloud.points[i]);
        out.push_back(std::move(c));
    }
    return out;
}

inline RansacResult ransac_plane(const PointCloud& cloud, double inlier_tol,
                                 std::size_t iterations, std::uint64_t seed) {
    return ransac_plane(cloud.points, inlier_tol, iterations, seed);
}

struct GroundRemovalResult {
    PointCloud ground;
    PointCloud rest;
    bool ground_found = false;
};

// Splits off the single largest RANSAC plane whose normal lies within 15 deg
// of vertical and which holds at least 10% of the points. When no such plane
// exists, returns (empty, cloud) with ground_found == false.
inline GroundRemovalResult remove_ground(const PointCloud& cloud, double inlier_tol,
                                         std::uint64_t seed = 0,
                                         std::size_t iterations = 500) {
    if (cloud.empty()) throw DegenerateInput("remove_ground: empty cloud");
    const std::size_t n = cloud.size();
    const double vertical_cone = 15.0 * kPi / 180.0;
    Rng rng(seed);

    std::ptrdiff_t best_count = -1;
    PlaneModel best;
    for (std::size_t it = 0; it < iterations; ++it) {
        std::size_t i = rng.index(n), j = rng.index(n), k = rng.index(n);
        if (i == j || j == k || i == k) continue;
        Vec3 cross = (cloud.points[j] - cloud.points[i]).cross(cloud.points[k] - cloud.points[i]);
        double cn = cross.norm();
        if (cn < 1e-12) continue;
        Vec3 normal = cross / cn;
        if (axis_angle(normal, Vec3::UnitZ()) > vertical_cone) continue;
        double offset = -normal.dot(cloud.points[i]);
        std::ptrdiff_t count = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (std::abs(normal.dot(cloud.points[p]) + offset) <= inlier_tol) ++count;
        }
        if (count > best_count) {
            best_count = count;
            best = PlaneModel{normal, offset};
        }
    }

    GroundRemovalResult res;
    res.ground.frame_note = cloud.frame_note;
    res.rest.frame_note = cloud.frame_note;
    if (best_count >= 0) {
        // Refine on the hypothesis inliers, then re-test the vertical prior.
        std::vector<std::size_t> inl;
        for (std::size_t p = 0; p < n; ++p) {
            if (best.distance(cloud.points[p]) <= inlier_tol) inl.push_back(p);
        }
        PlaneModel refined = fit_plane_tls(cloud.points, inl);
        if (axis_angle(refined.normal, Vec3::UnitZ()) <= vertical_cone) best = refined;
        std::ptrdiff_t count = 0;
        std::vector<char> is_ground(n, 0);
        for (std::size_t p = 0; p < n; ++p) {
            if (best.distance(cloud.points[p]) <= inlier_tol) {
                is_ground[p] = 1;
                ++count;
            }
        }
        if (count * 10 >= static_cast<std::ptrdiff_t>(n)) {
            res.ground_found = true;
            for (std::size_t p = 0; p < n; ++p) {
                (is_ground[p] ? res.ground : res.rest).points.push_back(cloud.points[p]);
            }
            return res;
        }
    }
    res.rest = cloud;
    return res;
}

}  // namespace carton
