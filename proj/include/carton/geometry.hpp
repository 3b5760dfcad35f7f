#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

#include "carton/common.hpp"

namespace carton {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Angle in [0, pi] between directed vectors.
inline double angle_between(const Vec3& a, const Vec3& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw DegeneratePair("angle of zero-length vector");
    return std::acos(clamp_unit(a.dot(b) / (na * nb)));
}

// Angle in [0, pi/2] between undirected axes: min(theta, pi - theta).
// Plane normals carry an arbitrary sign, so all normal comparisons fold.
inline double axis_angle(const Vec3& a, const Vec3& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw DegeneratePair("axis angle of zero-length vector");
    return std::acos(clamp_unit(std::abs(a.dot(b)) / (na * nb)));
}

// Right-handed orthonormal in-plane basis for a unit normal: e1 x e2 == n.
// Deterministic in n.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
    Vec3 t = Vec3::UnitX();
    double ax = std::abs(n.x()), ay = std::abs(n.y()), az = std::abs(n.z());
    if (ay <= ax && ay <= az) t = Vec3::UnitY();
    else if (az <= ax && az <= ay) t = Vec3::UnitZ();
    Vec3 e1 = (t - t.dot(n) * n).normalized();
    Vec3 e2 = n.cross(e1);
    return {e1, e2};
}

inline Vec3 rotate_about_line(const Vec3& p, const Vec3& anchor, const Vec3& axis_dir,
                              double angle) {
    Eigen::AngleAxisd rot(angle, axis_dir.normalized());
    return anchor + rot * (p - anchor);
}

inline Mat3 yaw_rotation(double yaw) {
    return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

// Closest-point distance between 3D segments [a0,a1] and [b0,b1].
inline double segment_segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                                       const Vec3& b1) {
    const Vec3 d1 = a1 - a0;
    const Vec3 d2 = b1 - b0;
    const Vec3 r = a0 - b0;
    const double aa = d1.squaredNorm();
    const double ee = d2.squaredNorm();
    const double f = d2.dot(r);
    double s = 0.0, t = 0.0;
    constexpr double eps = 1e-15;
    if (aa <= eps && ee <= eps) {
        return r.norm();  // both segments are points
    }
    if (aa <= eps) {
        t = std::clamp(f / ee, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (ee <= eps) {
            s = std::clamp(-c / aa, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = aa * ee - b * b;
            if (denom > eps) s = std::clamp((b * f - c * ee) / denom, 0.0, 1.0);
            t = (b * s + f) / ee;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / aa, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / aa, 0.0, 1.0);
            }
        }
    }
    return ((a0 + s * d1) - (b0 + t * d2)).norm();
}

inline double point_plane_distance(const Vec3& p, const Vec3& unit_normal, double offset) {
    return unit_normal.dot(p) + offset;  // signed
}

}  // namespace carton
