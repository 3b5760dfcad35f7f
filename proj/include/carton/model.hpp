#pragma once

#include <array>
#include <vector>

#include "carton/roles.hpp"
#include "carton/segmentation.hpp"

namespace carton {

// Feature/relation slots of the scoring function, in weight-vector order.
enum FeatureTerm : int {
    kPhi1 = 0,  // absolute orientation
    kPhi2 = 1,  // absolute location
    kPhi3 = 2,  // existence reward
    kGamma1 = 3,  // relative orientation (perpendicularity)
    kGamma2 = 4,  // relative location (above/below)
    kGamma3 = 5,  // connectivity (rectangle gap)
    kGamma4 = 6,  // rectangular structure (4-ary over the sides)
    kGamma5 = 7,  // opposite sides parallel
};

inline constexpr int kUnaryTermCount = 3;
inline constexpr int kTermCount = 8;

inline constexpr std::array<const char*, kTermCount> kTermNames = {
    "phi1", "phi2", "phi3", "gamma1", "gamma2", "gamma3", "gamma4", "gamma5"};

struct TemplateEdge {
    // For gamma2 the edge is directed: `a` is the node expected higher.
    int a = 0;
    int b = 0;
    bool gamma1 = false;
    bool gamma2 = false;
    bool gamma3 = false;
    bool gamma5 = false;
};

struct TemplateGraph {
    bool extended = false;
    std::vector<TemplateEdge> edges;
    bool has_gamma4 = false;
    std::array<std::vector<int>, kRoleCount> adjacency;
};

// The fixed 9-node box template: sides 0-3 in a cycle, base 4 adjacent to
// every side, flap 5+i adjacent to side i only. The extended flavor adds the
// two opposite-side edges and the 4-ary rectangularity term.
inline TemplateGraph box_template(bool extended) {
    TemplateGraph g;
    g.extended = extended;
    g.has_gamma4 = extended;
    auto add = [&g](TemplateEdge e) {
        g.edges.push_back(e);
        g.adjacency[static_cast<std::size_t>(e.a)].push_back(e.b);
        g.adjacency[static_cast<std::size_t>(e.b)].push_back(e.a);
    };
    for (int s = 0; s < kSideCount; ++s) {
        TemplateEdge cycle;
        cycle.a = s;
        cycle.b = (s + 1) % kSideCount;
        cycle.gamma1 = cycle.gamma3 = true;
        add(cycle);
    }
    for (int s = 0; s < kSideCount; ++s) {
        TemplateEdge to_base;
        to_base.a = s;
        to_base.b = kBase;
        to_base.gamma1 = to_base.gamma3 = true;
        add(to_base);
    }
    for (int s = 0; s < kSideCount; ++s) {
        TemplateEdge to_flap;
        to_flap.a = flap_of_side(s);  // flap sits higher than its side
        to_flap.b = s;
        to_flap.gamma2 = to_flap.gamma3 = true;
        add(to_flap);
    }
    if (extended) {
        for (int s = 0; s < 2; ++s) {
            TemplateEdge across;
            across.a = s;
            across.b = s + 2;
            across.gamma5 = true;
            add(across);
        }
    }
    return g;
}

struct FeatureConfig {
    double tau_phi1 = 0.26;
    double tau_phi2 = 1.0;
    double tau_gamma1 = 0.26;
    double tau_gamma2 = 0.26;
    double tau_gamma3 = 0.05;
    double tau_gamma4 = 0.26;
    double tau_gamma5 = 0.26;
    Vec3 u_up = Vec3::UnitZ();
    Vec3 l_ref = Vec3::Zero();
    double alpha = kPi / 2;
    double existence_reward = 1.0;

    void validate() const {
        for (double t : {tau_phi1, tau_phi2, tau_gamma1, tau_gamma2, tau_gamma3, tau_gamma4,
                         tau_gamma5}) {
            if (!(t > 0.0)) throw ConfigError("FeatureConfig: every tau must be > 0");
        }
        if (std::abs(u_up.norm() - 1.0) > 1e-9)
            throw ConfigError("FeatureConfig: u_up must be unit length");
    }
};

inline constexpr int kEmpty = -1;

struct Assignment {
    std::array<int, kRoleCount> mapping;

    Assignment() { mapping.fill(kEmpty); }

    int& operator[](int node) { return mapping[static_cast<std::size_t>(node)]; }
    int operator[](int node) const { return mapping[static_cast<std::size_t>(node)]; }

    bool all_empty() const {
        for (int m : mapping)
            if (m != kEmpty) return false;
        return true;
    }

    std::size_t assigned_count() const {
        std::size_t n = 0;
        for (int m : mapping) n += m != kEmpty ? 1 : 0;
        return n;
    }

    bool operator==(const Assignment& other) const { return mapping == other.mapping; }
};

// Every mapped index in range and no segment used twice.
inline bool assignment_valid(const Assignment& a, std::size_t n_segments) {
    std::vector<char> used(n_segments, 0);
    for (int m : a.mapping) {
        if (m == kEmpty) continue;
        if (m < 0 || static_cast<std::size_t>(m) >= n_segments) return false;
        if (used[static_cast<std::size_t>(m)]) return false;
        used[static_cast<std::size_t>(m)] = 1;
    }
    return true;
}

struct WeightVector {
    std::array<double, kUnaryTermCount> w_phi = {1.0, 1.0, 1.0};
    std::array<double, kTermCount - kUnaryTermCount> w_gamma = {1.0, 1.0, 1.0, 1.0, 1.0};

    double operator[](int term) const {
        return term < kUnaryTermCount ? w_phi[static_cast<std::size_t>(term)]
                                      : w_gamma[static_cast<std::size_t>(term - kUnaryTermCount)];
    }
    double& operator[](int term) {
        return term < kUnaryTermCount ? w_phi[static_cast<std::size_t>(term)]
                                      : w_gamma[static_cast<std::size_t>(term - kUnaryTermCount)];
    }

    static WeightVector zeros() {
        WeightVector w;
        w.w_phi.fill(0.0);
        w.w_gamma.fill(0.0);
        return w;
    }
};

struct FeatureVector {
    std::array<double, kTermCount> terms{};

    double& operator[](int term) { return terms[static_cast<std::size_t>(term)]; }
    double operator[](int term) const { return terms[static_cast<std::size_t>(term)]; }

    FeatureVector& operator+=(const FeatureVector& o) {
        for (int t = 0; t < kTermCount; ++t) terms[static_cast<std::size_t>(t)] += o[t];
        return *this;
    }
};

inline double phi1_abs_orientation(const Segment& seg, const FeatureConfig& cfg) {
    return cfg.tau_phi1 - axis_angle(seg.plane.normal, cfg.u_up);
}

inline double phi2_abs_location(const Segment& seg, const FeatureConfig& cfg) {
    return cfg.tau_phi2 - (seg.centroid - cfg.l_ref).norm();
}

inline double phi3_existence(bool assigned, const FeatureConfig& cfg) {
    return assigned ? cfg.existence_reward : 0.0;
}

inline double gamma1_rel_orientation(const Segment& si, const Segment& sj,
                                     const FeatureConfig& cfg) {
    return cfg.tau_gamma1 - std::abs(cfg.alpha - axis_angle(si.plane.normal, sj.plane.normal));
}

// Directed: rewards centroid_i sitting straight above centroid_j along u_up.
inline double gamma2_rel_location(const Segment& si, const Segment& sj,
                                  const FeatureConfig& cfg) {
    Vec3 d = si.centroid - sj.centroid;
    if (d.norm() < 1e-12)
        throw DegeneratePair("gamma2_rel_location: coincident centroids");
    return cfg.tau_gamma2 - angle_between(d, cfg.u_up);
}

// Smallest gap between the two rectangle boundaries.
inline double rect_min_distance(const std::array<Vec3, 4>& a, const std::array<Vec3, 4>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            best = std::min(best, segment_segment_distance(a[i], a[(i + 1) % 4], b[j],
                                                           b[(j + 1) % 4]));
        }
    }
    return best;
}

inline double gamma3_connectivity(const Segment& si, const Segment& sj,
                                  const FeatureConfig& cfg) {
    return cfg.tau_gamma3 - rect_min_distance(si.corners, sj.corners);
}

inline double gamma5_opposite_parallel(const Segment& si, const Segment& sj,
                                       const FeatureConfig& cfg) {
    return cfg.tau_gamma5 - axis_angle(si.plane.normal, sj.plane.normal);
}

// How degenerate pair geometry inside a term is handled. Standalone feature
// calls fail loudly; the inference path scores such candidates as bad instead
// of aborting the whole search.
enum class DegeneratePolicy { Throw, Penalize };

namespace detail {

// Two corners with the largest projection onto `up` (ties keep corner order).
inline std::array<Vec3, 2> top_corners(const Segment& seg, const Vec3& up) {
    std::array<std::size_t, 4> idx = {0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return seg.corners[a].dot(up) > seg.corners[b].dot(up);
    });
    std::array<std::size_t, 2> keep = {idx[0], idx[1]};
    std::sort(keep.begin(), keep.end());
    return {seg.corners[keep[0]], seg.corners[keep[1]]};
}

}  // namespace detail

// Rectangular-structure score over the four sides in cycle order. For each
// opposite pair, every top corner of one side is matched to the nearest top
// corner of the other; each match vector should run parallel to the normal of
// the side it points into.
inline double gamma4_rectangularity(const std::array<Segment, 4>& sides,
                                    const FeatureConfig& cfg,
                                    DegeneratePolicy policy = DegeneratePolicy::Throw) {
    double score_sum = 0.0;
    for (int pair = 0; pair < 2; ++pair) {
        const int i = pair, j = pair + 2;
        double angle_sum = 0.0;
        for (auto [from, to] : {std::pair<int, int>{i, j}, {j, i}}) {
            auto from_top = detail::top_corners(sides[static_cast<std::size_t>(from)], cfg.u_up);
            auto to_top = detail::top_corners(sides[static_cast<std::size_t>(to)], cfg.u_up);
            for (const Vec3& p : from_top) {
                const Vec3& q = (p - to_top[0]).norm() <= (p - to_top[1]).norm() ? to_top[0]
                                                                                 : to_top[1];
                Vec3 v = p - q;
                if (v.norm() < 1e-12) {
                    if (policy == DegeneratePolicy::Throw)
                        throw DegeneratePair("gamma4_rectangularity: coincident corners");
                    angle_sum += kPi / 2;
                } else {
                    angle_sum += axis_angle(
                        v, sides[static_cast<std::size_t>(from)].plane.normal);
                }
            }
        }
        score_sum += cfg.tau_gamma4 - angle_sum / 4.0;
    }
    return score_sum / 2.0;
}

// Per-term feature sums of a full assignment: unary terms over assigned
// nodes, relation terms over edges with both endpoints assigned (an Empty
// endpoint silences the edge), gamma4 only when all four sides are assigned.
inline FeatureVector featurize(const Assignment& assign, const std::vector<Segment>& segments,
                               const TemplateGraph& graph, const FeatureConfig& cfg,
                               DegeneratePolicy policy = DegeneratePolicy::Throw) {
    if (!assignment_valid(assign, segments.size()))
        throw ConfigError("featurize: invalid assignment");
    FeatureVector fv;
    for (int node = 0; node < kRoleCount; ++node) {
        int m = assign[node];
        if (m == kEmpty) continue;
        const Segment& seg = segments[static_cast<std::size_t>(m)];
        fv[kPhi1] += phi1_abs_orientation(seg, cfg);
        fv[kPhi2] += phi2_abs_location(seg, cfg);
        fv[kPhi3] += phi3_existence(true, cfg);
    }
    for (const TemplateEdge& e : graph.edges) {
        int ma = assign[e.a], mb = assign[e.b];
        if (ma == kEmpty || mb == kEmpty) continue;
        const Segment& sa = segments[static_cast<std::size_t>(ma)];
        const Segment& sb = segments[static_cast<std::size_t>(mb)];
        if (e.gamma1) fv[kGamma1] += gamma1_rel_orientation(sa, sb, cfg);
        if (e.gamma2) {
            if ((sa.centroid - sb.centroid).norm() < 1e-12 &&
                policy == DegeneratePolicy::Penalize) {
                fv[kGamma2] += cfg.tau_gamma2 - kPi / 2;
            } else {
                fv[kGamma2] += gamma2_rel_location(sa, sb, cfg);
            }
        }
        if (e.gamma3) fv[kGamma3] += gamma3_connectivity(sa, sb, cfg);
        if (e.gamma5) fv[kGamma5] += gamma5_opposite_parallel(sa, sb, cfg);
    }
    if (graph.has_gamma4) {
        bool all_sides = true;
        for (int s = 0; s < kSideCount; ++s) all_sides = all_sides && assign[s] != kEmpty;
        if (all_sides) {
            std::array<Segment, 4> sides = {segments[static_cast<std::size_t>(assign[0])],
                                            segments[static_cast<std::size_t>(assign[1])],
                                            segments[static_cast<std::size_t>(assign[2])],
                                            segments[static_cast<std::size_t>(assign[3])]};
            fv[kGamma4] += gamma4_rectangularity(sides, cfg, policy);
        }
    }
    return fv;
}

inline double score(const FeatureVector& fv, const WeightVector& w) {
    double j = 0.0;
    for (int t = 0; t < kTermCount; ++t) j += w[t] * fv[t];
    return j;
}

}  // namespace carton
