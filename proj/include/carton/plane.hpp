#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "carton/geometry.hpp"

namespace carton {

// Plane satisfying normal . p + offset == 0 for points p on the plane.
// The normal is unit length and sign-canonicalized to point toward the
// sensor origin: normal . centroid < 0 for the fitted point set (ties broken
// by making the first nonzero component positive).
struct PlaneModel {
    Vec3 normal{0, 0, 1};
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
    double distance(const Vec3& p) const { return std::abs(signed_distance(p)); }
    Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
};

inline PlaneModel canonicalize_toward_origin(PlaneModel plane, const Vec3& centroid) {
    double d = plane.normal.dot(centroid);
    bool flip;
    if (d > 1e-12) {
        flip = true;
    } else if (d < -1e-12) {
        flip = false;
    } else {
        // Plane through the origin: deterministic sign by first nonzero component.
        flip = false;
        for (int k = 0; k < 3; ++k) {
            if (plane.normal[k] > 1e-12) break;
            if (plane.normal[k] < -1e-12) {
                flip = true;
                break;
            }
        }
    }
    if (flip) {
        plane.normal = -plane.normal;
        plane.offset = -plane.offset;
    }
    return plane;
}

// Total-least-squares plane through a point set: the centroid plus the
// smallest-eigenvector direction of the scatter matrix.
inline PlaneModel fit_plane_tls(const std::vector<Vec3>& points,
                                const std::vector<std::size_t>& subset) {
    if (subset.size() < 3) throw DegenerateInput("plane fit needs at least 3 points");
    Vec3 centroid = Vec3::Zero();
    for (std::size_t i : subset) centroid += points[i];
    centroid /= static_cast<double>(subset.size());
    Mat3 scatter = Mat3::Zero();
    for (std::size_t i : subset) {
        Vec3 d = points[i] - centroid;
        scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    Vec3 normal = eig.eigenvectors().col(0);  // smallest eigenvalue first
    double nn = normal.norm();
    if (!(nn > 0.0)) throw DegenerateInput("degenerate scatter in plane fit");
    normal /= nn;
    PlaneModel plane{normal, -normal.dot(centroid)};
    return canonicalize_toward_origin(plane, centroid);
}

inline double rms_plane_distance(const PlaneModel& plane, const std::vector<Vec3>& points,
                                 const std::vector<std::size_t>& subset) {
    if (subset.empty()) return 0.0;
    double ss = 0.0;
    for (std::size_t i : subset) {
        double d = plane.signed_distance(points[i]);
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(subset.size()));
}

struct RansacResult {
    PlaneModel plane;                  // refined plane
    std::vector<std::size_t> inliers;  // inliers of the refined plane
    double fit_error = 0.0;            // RMS point-to-plane distance over `inliers`

    // Winning raw 3-point hypothesis, kept for diagnostics.
    PlaneModel raw_plane;
    std::vector<std::size_t> raw_inliers;
};

// Best-of-`iterations` random 3-point plane hypotheses, refined by a
// total-least-squares fit over the winning hypothesis' inliers. When
// `normals` is non-empty (one per point; a zero vector means no estimate), a
// point only counts as an inlier if its local surface normal agrees with the
// candidate plane as an axis within `normal_tol` radians. Points without an
// estimate pass the gate. Deterministic for a fixed seed.
inline RansacResult ransac_plane_gated(const std::vector<Vec3>& points,
                                       const std::vector<Vec3>& normals, double inlier_tol,
                                       double normal_tol, std::size_t iterations,
                                       std::uint64_t seed) {
    const std::size_t n = points.size();
    if (n < 3) throw DegenerateInput("ransac_plane: need at least 3 points");
    if (!normals.empty() && normals.size() != n)
        throw ConfigError("ransac_plane: normals must be empty or match the points");
    Rng rng(seed);

    const double gate = std::cos(normal_tol);
    auto passes = [&](std::size_t p, const Vec3& plane_normal) {
        if (normals.empty()) return true;
        const Vec3& pn = normals[p];
        if (pn.squaredNorm() < 0.5) return true;  // no estimate at this point
        return std::abs(pn.dot(plane_normal)) >= gate;
    };

    std::ptrdiff_t best_count = -1;
    PlaneModel best_raw;
    for (std::size_t it = 0; it < iterations; ++it) {
        std::size_t i = rng.index(n), j = rng.index(n), k = rng.index(n);
        if (i == j || j == k || i == k) continue;
        Vec3 cross = (points[j] - points[i]).cross(points[k] - points[i]);
        double cn = cross.norm();
        if (cn < 1e-12) continue;  // collinear sample
        Vec3 normal = cross / cn;
        double offset = -normal.dot(points[i]);
        std::ptrdiff_t count = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (std::abs(normal.dot(points[p]) + offset) <= inlier_tol && passes(p, normal))
                ++count;
        }
        if (count > best_count) {
            best_count = count;
            best_raw = PlaneModel{normal, offset};
        }
    }
    if (best_count < 0) throw DegenerateInput("ransac_plane: all sampled triples collinear");

    RansacResult res;
    res.raw_plane = best_raw;
    for (std::size_t p = 0; p < n; ++p) {
        if (best_raw.distance(points[p]) <= inlier_tol && passes(p, best_raw.normal))
            res.raw_inliers.push_back(p);
    }
    if (res.raw_inliers.size() < 3)
        throw DegenerateInput("ransac_plane: no plane with enough support");
    res.plane = fit_plane_tls(points, res.raw_inliers);
    for (std::size_t p = 0; p < n; ++p) {
        if (res.plane.distance(points[p]) <= inlier_tol && passes(p, res.plane.normal))
            res.inliers.push_back(p);
    }
    res.fit_error = rms_plane_distance(res.plane, points, res.inliers);
    return res;
}

inline RansacResult ransac_plane(const std::vector<Vec3>& points, double inlier_tol,
                                 std::size_t iterations, std::uint64_t seed) {
    return ransac_plane_gated(points, {}, inlier_tol, 0.0, iterations, seed);
}

}  // namespace carton
