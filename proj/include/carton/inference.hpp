#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "carton/model.hpp"

namespace carton {

struct InferenceConfig {
    double c_fraction = 0.25;
    std::size_t beam_limit = 0;  // 0 = unlimited
    bool allow_empty = true;
    int max_empty_sides = 2;
    bool prune = true;
    bool order_by_unary = true;

    void validate() const {
        if (!(c_fraction > 0.0) || c_fraction > 1.0)
            throw ConfigError("InferenceConfig: c_fraction must be in (0, 1]");
        if (max_empty_sides < 0 || max_empty_sides > 4)
            throw ConfigError("InferenceConfig: max_empty_sides must be in [0, 4]");
    }
};

struct InferenceStats {
    std::uint64_t assignments_scored = 0;    // brute force: injective leaves visited
    std::uint64_t tuples_enumerated = 0;     // factored: side tuples generated
    std::uint64_t tuples_pruned = 0;         // factored: skipped by the bound
    std::uint64_t tuples_completed = 0;      // factored: completions solved
    std::uint64_t candidate_evaluations = 0; // factored: per-node candidate gains scored
    std::uint64_t stage2_rescored = 0;       // two-stage: candidates rescored
};

struct InferenceResult {
    Assignment assignment;
    double j = 0.0;
    FeatureVector features;
    InferenceStats stats;
};

// Stage-1 output: per-side-tuple best completions, best first.
using CandidateList = std::vector<std::pair<Assignment, double>>;

// A fixed choice of the four side nodes plus the segments still available to
// the base and flap nodes.
struct SearchState {
    std::array<int, kSideCount> sides = {kEmpty, kEmpty, kEmpty, kEmpty};
    std::vector<int> pool;

    int empty_sides() const {
        int n = 0;
        for (int s : sides) n += s == kEmpty ? 1 : 0;
        return n;
    }
};

// Ordering used for every tie-break: node by node, any segment index before
// Empty, lower indices first.
inline bool lex_less(const Assignment& a, const Assignment& b) {
    for (int node = 0; node < kRoleCount; ++node) {
        int ra = a[node] == kEmpty ? std::numeric_limits<int>::max() : a[node];
        int rb = b[node] == kEmpty ? std::numeric_limits<int>::max() : b[node];
        if (ra != rb) return ra < rb;
    }
    return false;
}

inline Assignment rotate_assignment(const Assignment& a, int r) {
    Assignment out;
    for (int i = 0; i < kSideCount; ++i) {
        out[(i + r) % kSideCount] = a[i];
        out[flap_of_side((i + r) % kSideCount)] = a[flap_of_side(i)];
    }
    out[kBase] = a[kBase];
    return out;
}

// Smallest representative of the assignment's orbit under the four box
// rotations (sides and flaps rotate together, base stays).
inline Assignment canonical_rotation(const Assignment& a) {
    Assignment best = a;
    for (int r = 1; r < 4; ++r) {
        Assignment rot = rotate_assignment(a, r);
        if (lex_less(rot, best)) best = rot;
    }
    return best;
}

// Reflection of the template that reverses the side cycle (1 and 3 swap,
// together with their flaps). Every relation term is achiral, so a reflected
// assignment always scores the same; the evaluation convention only forgives
// the four rotations, so results are canonicalized to a counterclockwise
// side cycle before being returned.
inline Assignment reflect_assignment(const Assignment& a) {
    Assignment out = a;
    std::swap(out.mapping[kSide1], out.mapping[kSide3]);
    std::swap(out.mapping[kFlap1], out.mapping[kFlap3]);
    return out;
}

// Sign of the side-cycle winding viewed along `up`: +1 counterclockwise,
// -1 clockwise, 0 when fewer than three sides are assigned or the centroids
// are degenerate.
inline int cycle_orientation(const Assignment& a, const std::vector<Segment>& segments,
                             const Vec3& up) {
    std::vector<Vec2> poly;
    auto [e1, e2] = plane_basis(up.normalized());
    for (int s = 0; s < kSideCount; ++s) {
        if (a[s] == kEmpty) continue;
        const Vec3& c = segments[static_cast<std::size_t>(a[s])].centroid;
        poly.emplace_back(c.dot(e1), c.dot(e2));
    }
    if (poly.size() < 3) return 0;
    double area2 = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        area2 += p.x() * q.y() - q.x() * p.y();
        scale = std::max({scale, std::abs(p.x()), std::abs(p.y())});
    }
    double tol = 1e-12 * std::max(1.0, scale * scale);
    if (area2 > tol) return 1;
    if (area2 < -tol) return -1;
    return 0;
}

inline Assignment orient_ccw(const Assignment& a, const std::vector<Segment>& segments,
                             const Vec3& up) {
    int orientation = cycle_orientation(a, segments, up);
    if (orientation < 0) return reflect_assignment(a);
    if (orientation == 0) {
        // Too few sides to define a winding; both chiralities score the same,
        // so settle on the one whose rotation-canonical form is smaller. That
        // choice depends only on the orbit, not on which rotation the search
        // happened to land on.
        Assignment mirrored = reflect_assignment(a);
        if (lex_less(canonical_rotation(mirrored), canonical_rotation(a))) return mirrored;
    }
    return a;
}

// An assignment may leave any base/flap node Empty, but at most
// max_empty_sides of the four sides; the all-Empty assignment is always
// admissible so that every scene has a valid (score zero) answer.
inline bool assignment_admissible(const Assignment& a, const InferenceConfig& cfg) {
    if (!cfg.allow_empty) {
        for (int node = 0; node < kRoleCount; ++node)
            if (a[node] == kEmpty) return false;
        return true;
    }
    if (a.all_empty()) return true;
    int empty_sides = 0;
    for (int s = 0; s < kSideCount; ++s) empty_sides += a[s] == kEmpty ? 1 : 0;
    return empty_sides <= cfg.max_empty_sides;
}

namespace detail {

constexpr double kForbidden = 1e12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Weighted pairwise score tables so the search never re-evaluates geometry.
// pair13 carries the perpendicularity + connectivity bundle shared by
// side-side and side-base edges; flap_side carries the directed
// above + connectivity bundle, indexed [flap segment][side segment].
struct ScoreTables {
    int n = 0;
    std::vector<double> unary;      // per segment
    std::vector<double> pair13;     // n*n, symmetric
    std::vector<double> flap_side;  // n*n, directed
    std::vector<double> parallel5;  // n*n, symmetric

    double ss(int i, int j) const { return pair13[static_cast<std::size_t>(i * n + j)]; }
    double sb(int i, int j) const { return pair13[static_cast<std::size_t>(i * n + j)]; }
    double fs(int f, int s) const { return flap_side[static_cast<std::size_t>(f * n + s)]; }
    double g5(int i, int j) const { return parallel5[static_cast<std::size_t>(i * n + j)]; }
};

inline ScoreTables build_tables(const std::vector<Segment>& segments, const WeightVector& w,
                                const FeatureConfig& cfg) {
    ScoreTables t;
    t.n = static_cast<int>(segments.size());
    const std::size_t n = segments.size();
    t.unary.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.unary[i] = w[kPhi1] * phi1_abs_orientation(segments[i], cfg) +
                     w[kPhi2] * phi2_abs_location(segments[i], cfg) +
                     w[kPhi3] * phi3_existence(true, cfg);
    }
    t.pair13.assign(n * n, 0.0);
    t.flap_side.assign(n * n, 0.0);
    t.parallel5.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double g3 = gamma3_connectivity(segments[i], segments[j], cfg);
            if (i < j) {
                // Stored symmetrically so reflected assignments score
                // bit-identically.
                double g1 = gamma1_rel_orientation(segments[i], segments[j], cfg);
                t.pair13[i * n + j] = t.pair13[j * n + i] =
                    w[kGamma1] * g1 + w[kGamma3] * g3;
                t.parallel5[i * n + j] = t.parallel5[j * n + i] =
                    w[kGamma5] * gamma5_opposite_parallel(segments[i], segments[j], cfg);
            }
            double g2;
            if ((segments[i].centroid - segments[j].centroid).norm() < 1e-12) {
                g2 = cfg.tau_gamma2 - kPi / 2;
            } else {
                g2 = gamma2_rel_location(segments[i], segments[j], cfg);
            }
            t.flap_side[i * n + j] = w[kGamma2] * g2 + w[kGamma3] * g3;
        }
    }
    return t;
}

inline double gamma4_term(const std::vector<Segment>& segments,
                          const std::array<int, kSideCount>& sides, const WeightVector& w,
                          const FeatureConfig& cfg) {
    std::array<Segment, 4> side_segs = {segments[static_cast<std::size_t>(sides[0])],
                                        segments[static_cast<std::size_t>(sides[1])],
                                        segments[static_cast<std::size_t>(sides[2])],
                                        segments[static_cast<std::size_t>(sides[3])]};
    return w[kGamma4] * gamma4_rectangularity(side_segs, cfg, DegeneratePolicy::Penalize);
}

// Rectangular Hungarian (rows <= cols) minimizing total cost via shortest
// augmenting paths with potentials. Every row ends up assigned.
inline double min_cost_assignment(const std::vector<std::vector<double>>& cost,
                                  std::vector<int>& row_to_col) {
    const int rows = static_cast<int>(cost.size());
    const int cols = static_cast<int>(cost[0].size());
    std::vector<double> u(static_cast<std::size_t>(rows) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(cols) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(cols) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(cols) + 1, 0);
    for (int i = 1; i <= rows; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(cols) + 1,
                                 std::numeric_limits<double>::infinity());
        std::vector<char> used(static_cast<std::size_t>(cols) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= cols; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                             u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    row_to_col.assign(static_cast<std::size_t>(rows), -1);
    double total = 0.0;
    for (int j = 1; j <= cols; ++j) {
        int r = p[static_cast<std::size_t>(j)];
        if (r == 0) continue;
        row_to_col[static_cast<std::size_t>(r - 1)] = j - 1;
        total += cost[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(j - 1)];
    }
    return total;
}

// Jointly best base + flap completion for a fixed side tuple. The base graph
// has no edges among these five nodes, so each candidate's gain is local to
// its node; injectivity is the only coupling, solved as a small assignment
// problem (one private zero-gain Empty column per node). Returns the gain and
// fills the five slots of `out`; returns -inf when no admissible completion
// exists (allow_empty off and pool too small).
inline double complete_tuple(const SearchState& st, const ScoreTables& tables,
                             const InferenceConfig& cfg, Assignment& out,
                             std::uint64_t& candidate_evals) {
    static constexpr std::array<int, 5> kFreeNodes = {kBase, kFlap0, kFlap1, kFlap2, kFlap3};
    const std::size_t pool_n = st.pool.size();
    const std::size_t cols = pool_n + kFreeNodes.size();
    std::vector<std::vector<double>> cost(
        kFreeNodes.size(), std::vector<double>(cols, kForbidden));
    for (std::size_t r = 0; r < kFreeNodes.size(); ++r) {
        const int node = kFreeNodes[r];
        for (std::size_t c = 0; c < pool_n; ++c) {
            const int t = st.pool[c];
            double gain = tables.unary[static_cast<std::size_t>(t)];
            if (node == kBase) {
                for (int s = 0; s < kSideCount; ++s) {
                    if (st.sides[static_cast<std::size_t>(s)] != kEmpty)
                        gain += tables.sb(st.sides[static_cast<std::size_t>(s)], t);
                }
            } else {
                const int side_seg = st.sides[static_cast<std::size_t>(side_of_flap(node))];
                if (side_seg != kEmpty) gain += tables.fs(t, side_seg);
            }
            cost[r][c] = -gain;
            ++candidate_evals;
        }
        if (cfg.allow_empty) {
            cost[r][pool_n + r] = 0.0;
            ++candidate_evals;
        }
    }
    std::vector<int> row_to_col;
    double total_cost = min_cost_assignment(cost, row_to_col);
    if (total_cost >= kForbidden / 2) return kNegInf;
    for (std::size_t r = 0; r < kFreeNodes.size(); ++r) {
        const int c = row_to_col[r];
        out[kFreeNodes[r]] =
            static_cast<std::size_t>(c) < pool_n ? st.pool[static_cast<std::size_t>(c)] : kEmpty;
    }
    // Flaps whose side is Empty see identical gains for every segment, so the
    // solver's pick among them is arbitrary; reorder that subset (segments
    // ascending, Empty last) to match the global lexicographic tie rule.
    std::array<int, kSideCount> dangling{};
    std::array<int, kSideCount> dangling_segs{};
    int n_dangling = 0;
    for (int s = 0; s < kSideCount; ++s) {
        if (st.sides[static_cast<std::size_t>(s)] != kEmpty) continue;
        dangling[static_cast<std::size_t>(n_dangling)] = flap_of_side(s);
        dangling_segs[static_cast<std::size_t>(n_dangling)] = out[flap_of_side(s)];
        ++n_dangling;
    }
    if (n_dangling > 1) {
        std::sort(dangling_segs.begin(), dangling_segs.begin() + n_dangling,
                  [](int a, int b) {
                      if ((a == kEmpty) != (b == kEmpty)) return b == kEmpty;
                      return a < b;
                  });
        for (int i = 0; i < n_dangling; ++i) {
            out[dangling[static_cast<std::size_t>(i)]] = dangling_segs[static_cast<std::size_t>(i)];
        }
    }
    return -total_cost;
}

struct TupleEntry {
    std::array<int, kSideCount> sides;
    double unary_sum = 0.0;
};

// All ordered side tuples with at most max_empty_sides Empty slots, in
// lexicographic order (segments ascending, Empty last per slot).
inline std::vector<TupleEntry> enumerate_side_tuples(int n, const ScoreTables& tables,
                                                     const InferenceConfig& cfg) {
    std::vector<TupleEntry> tuples;
    std::array<int, kSideCount> sides;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int slot, int empties, double unary_sum) -> void {
        if (slot == kSideCount) {
            tuples.push_back(TupleEntry{sides, unary_sum});
            return;
        }
        for (int t = 0; t < n; ++t) {
            if (used[static_cast<std::size_t>(t)]) continue;
            used[static_cast<std::size_t>(t)] = 1;
            sides[static_cast<std::size_t>(slot)] = t;
            self(self, slot + 1, empties, unary_sum + tables.unary[static_cast<std::size_t>(t)]);
            used[static_cast<std::size_t>(t)] = 0;
        }
        if (cfg.allow_empty && empties < cfg.max_empty_sides) {
            sides[static_cast<std::size_t>(slot)] = kEmpty;
            self(self, slot + 1, empties + 1, unary_sum);
        }
    };
    rec(rec, 0, 0, 0.0);
    return tuples;
}

// Side-local part of the tuple's score: side unaries plus the cycle edges
// between assigned neighbors.
inline double tuple_base_score(const std::array<int, kSideCount>& sides,
                               const ScoreTables& tables) {
    double total = 0.0;
    for (int s = 0; s < kSideCount; ++s) {
        int t = sides[static_cast<std::size_t>(s)];
        if (t == kEmpty) continue;
        total += tables.unary[static_cast<std::size_t>(t)];
        int u = sides[static_cast<std::size_t>((s + 1) % kSideCount)];
        if (u != kEmpty) total += tables.ss(t, u);
    }
    return total;
}

// Precomputed pieces of the admissible completion bound.
struct CompletionBound {
    double max_unary = kNegInf;
    std::vector<double> side_to_base_max;  // per side segment: best base partner
    std::vector<double> side_to_flap_max;  // per side segment: best flap partner

    double bound(const std::array<int, kSideCount>& sides, bool allow_empty) const {
        double floor_gain = allow_empty ? 0.0 : kNegInf;
        double base_gain = max_unary;
        for (int s = 0; s < kSideCount; ++s) {
            int t = sides[static_cast<std::size_t>(s)];
            if (t != kEmpty) base_gain += std::max(0.0, side_to_base_max[static_cast<std::size_t>(t)]);
        }
        double total = std::max(floor_gain, base_gain);
        for (int s = 0; s < kSideCount; ++s) {
            int t = sides[static_cast<std::size_t>(s)];
            double flap_gain = max_unary;
            if (t != kEmpty) flap_gain += std::max(0.0, side_to_flap_max[static_cast<std::size_t>(t)]);
            total += std::max(floor_gain, flap_gain);
        }
        return total;
    }
};

inline CompletionBound build_bound(const ScoreTables& tables) {
    CompletionBound b;
    const std::size_t n = static_cast<std::size_t>(tables.n);
    for (std::size_t i = 0; i < n; ++i) b.max_unary = std::max(b.max_unary, tables.unary[i]);
    if (n == 0) b.max_unary = 0.0;
    b.side_to_base_max.assign(n, kNegInf);
    b.side_to_flap_max.assign(n, kNegInf);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t) continue;
            b.side_to_base_max[s] =
                std::max(b.side_to_base_max[s], tables.sb(static_cast<int>(s), static_cast<int>(t)));
            b.side_to_flap_max[s] =
                std::max(b.side_to_flap_max[s], tables.fs(static_cast<int>(t), static_cast<int>(s)));
        }
    }
    return b;
}

}  // namespace carton::detail

// Exhaustive search over every injective assignment of segments to the nine
// template nodes (Empty branches included). The oracle the factored search is
// tested against; capped at 9 segments.
inline InferenceResult brute_force_infer(const std::vector<Segment>& segments,
                                         const TemplateGraph& graph, const WeightVector& weights,
                                         const FeatureConfig& fcfg,
                                         const InferenceConfig& cfg = {}) {
    cfg.validate();
    fcfg.validate();
    if (segments.size() > 9)
        throw SizeLimitError("brute_force_infer: supports at most 9 segments");
    const int n = static_cast<int>(segments.size());
    detail::ScoreTables tables = detail::build_tables(segments, weights, fcfg);

    // Per-node incoming edges from lower-numbered nodes, so each edge is
    // scored exactly once, at its later endpoint.
    struct Incoming {
        int other;
        int kind;  // 0 = perpendicularity+connectivity, 1 = flap-side, 2 = opposite-parallel
        bool self_is_flap;
    };
    std::array<std::vector<Incoming>, kRoleCount> incoming;
    for (const TemplateEdge& e : graph.edges) {
        int lo = std::min(e.a, e.b), hi = std::max(e.a, e.b);
        Incoming in{lo, 0, false};
        if (e.gamma2) {
            in.kind = 1;
            in.self_is_flap = e.a == hi;
        } else if (e.gamma5) {
            in.kind = 2;
        }
        incoming[static_cast<std::size_t>(hi)].push_back(in);
    }

    InferenceResult res;
    bool found = false;
    double best_j = detail::kNegInf;
    Assignment current;
    InferenceStats stats;

    auto consider = [&](const Assignment& a, double j) {
        if (!assignment_admissible(a, cfg)) return;
        if (!found || j > best_j || (j == best_j && lex_less(a, res.assignment))) {
            found = true;
            best_j = j;
            res.assignment = a;
        }
    };

    std::vector<char> used(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int node, double running) -> void {
        if (node == kRoleCount) {
            ++stats.assignments_scored;
            consider(current, running);
            return;
        }
        auto place = [&](int t) {
            double delta = 0.0;
            if (t != kEmpty) {
                delta += tables.unary[static_cast<std::size_t>(t)];
                for (const Incoming& in : incoming[static_cast<std::size_t>(node)]) {
                    int o = current[in.other];
                    if (o == kEmpty) continue;
                    if (in.kind == 0) {
                        delta += tables.ss(t, o);
                    } else if (in.kind == 1) {
                        delta += in.self_is_flap ? tables.fs(t, o) : tables.fs(o, t);
                    } else {
                        delta += tables.g5(t, o);
                    }
                }
            }
            if (graph.has_gamma4 && node == kSide3 && t != kEmpty) {
                std::array<int, kSideCount> sides = {current[0], current[1], current[2], t};
                bool all = sides[0] != kEmpty && sides[1] != kEmpty && sides[2] != kEmpty;
                if (all) delta += detail::gamma4_term(segments, sides, weights, fcfg);
            }
            current[node] = t;
            self(self, node + 1, running + delta);
            current[node] = kEmpty;
        };
        for (int t = 0; t < n; ++t) {
            if (used[static_cast<std::size_t>(t)]) continue;
            used[static_cast<std::size_t>(t)] = 1;
            place(t);
            used[static_cast<std::size_t>(t)] = 0;
        }
        if (cfg.allow_empty) place(kEmpty);
    };
    rec(rec, 0, 0.0);

    if (!found) throw Error("brute_force_infer: no valid assignment");
    res.assignment = orient_ccw(res.assignment, segments, fcfg.u_up);
    res.features = featurize(res.assignment, segments, graph, fcfg, DegeneratePolicy::Penalize);
    res.j = score(res.features, weights);
    res.stats = stats;
    return res;
}

namespace detail {

// Factored search core. Enumerates side tuples, completes each one exactly,
// and tracks the best admissible assignment. When `collect` is given, every
// completed tuple's best assignment is appended (pruning must then be off so
// the list is complete).
inline InferenceResult factored_search(const std::vector<Segment>& segments,
                                       const WeightVector& weights, const FeatureConfig& fcfg,
                                       const InferenceConfig& cfg, const TemplateGraph& graph,
                                       CandidateList* collect) {
    const int n = static_cast<int>(segments.size());
    ScoreTables tables = build_tables(segments, weights, fcfg);
    CompletionBound bound = build_bound(tables);

    std::vector<TupleEntry> tuples = enumerate_side_tuples(n, tables, cfg);
    InferenceStats stats;
    stats.tuples_enumerated = tuples.size();
    if (cfg.order_by_unary) {
        std::stable_sort(tuples.begin(), tuples.end(),
                         [](const TupleEntry& a, const TupleEntry& b) {
                             return a.unary_sum > b.unary_sum;
                         });
    }
    if (cfg.beam_limit > 0 && tuples.size() > cfg.beam_limit) tuples.resize(cfg.beam_limit);

    InferenceResult res;
    bool found = false;
    double best_j = kNegInf;
    if (cfg.allow_empty) {
        // The all-Empty assignment is always admissible and scores zero.
        found = true;
        best_j = 0.0;
    }

    const bool prune = cfg.prune && collect == nullptr;
    std::vector<char> in_tuple(static_cast<std::size_t>(n), 0);
    for (const TupleEntry& entry : tuples) {
        double base = tuple_base_score(entry.sides, tables);
        if (prune && found && base + bound.bound(entry.sides, cfg.allow_empty) < best_j) {
            ++stats.tuples_pruned;
            continue;
        }
        SearchState st;
        st.sides = entry.sides;
        for (int s = 0; s < kSideCount; ++s) {
            if (st.sides[static_cast<std::size_t>(s)] != kEmpty)
                in_tuple[static_cast<std::size_t>(st.sides[static_cast<std::size_t>(s)])] = 1;
        }
        st.pool.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) {
            if (!in_tuple[static_cast<std::size_t>(t)]) st.pool.push_back(t);
        }
        for (int s = 0; s < kSideCount; ++s) {
            if (st.sides[static_cast<std::size_t>(s)] != kEmpty)
                in_tuple[static_cast<std::size_t>(st.sides[static_cast<std::size_t>(s)])] = 0;
        }

        Assignment candidate;
        for (int s = 0; s < kSideCount; ++s) candidate[s] = st.sides[static_cast<std::size_t>(s)];
        double gain = complete_tuple(st, tables, cfg, candidate, stats.candidate_evaluations);
        ++stats.tuples_completed;
        if (gain == kNegInf) continue;
        double j = base + gain;
        if (collect) collect->emplace_back(candidate, j);
        if (!found || j > best_j || (j == best_j && lex_less(candidate, res.assignment))) {
            found = true;
            best_j = j;
            res.assignment = candidate;
        }
    }

    if (!found) throw Error("infer: no valid assignment");
    if (collect) {
        std::stable_sort(collect->begin(), collect->end(),
                         [](const auto& a, const auto& b) {
                             if (a.second != b.second) return a.second > b.second;
                             return lex_less(a.first, b.first);
                         });
    }
    res.assignment = orient_ccw(res.assignment, segments, fcfg.u_up);
    res.features = featurize(res.assignment, segments, graph, fcfg, DegeneratePolicy::Penalize);
    res.j = score(res.features, weights);
    res.stats = stats;
    return res;
}

}  // namespace carton::detail

// Exact maximization over the base template graph. Side tuples are visited
// best-unary-first; each is completed optimally in one linear pass worth of
// candidate evaluations. Equal to brute_force_infer in score by construction.
inline InferenceResult infer(const std::vector<Segment>& segments, const TemplateGraph& graph,
                             const WeightVector& weights, const FeatureConfig& fcfg,
                             const InferenceConfig& cfg = {}) {
    cfg.validate();
    fcfg.validate();
    if (graph.extended)
        throw ConfigError("infer: expects the base (non-extended) template graph");
    return detail::factored_search(segments, weights, fcfg, cfg, graph, nullptr);
}

// Stage-1 candidate list: every side tuple's best base-graph completion,
// sorted by descending base-graph score.
inline CandidateList infer_candidates(const std::vector<Segment>& segments,
                                      const WeightVector& weights, const FeatureConfig& fcfg,
                                      const InferenceConfig& cfg = {}) {
    cfg.validate();
    fcfg.validate();
    CandidateList list;
    TemplateGraph base = box_template(false);
    try {
        detail::factored_search(segments, weights, fcfg, cfg, base, &list);
    } catch (const Error&) {
        // No admissible completion anywhere; an empty list is the answer.
    }
    return list;
}

// Two-stage inference over the extended graph: optimize under the base edge
// set, then rescore the top c-fraction of candidates with the opposite-side
// terms included. The side-only extended terms cannot change which completion
// is best for a tuple, so c = 1 recovers the exact extended optimum.
inline InferenceResult infer_two_stage(const std::vector<Segment>& segments,
                                       const TemplateGraph& graph, const WeightVector& weights,
                                       const FeatureConfig& fcfg,
                                       const InferenceConfig& cfg = {}) {
    cfg.validate();
    fcfg.validate();
    if (!graph.extended)
        throw ConfigError("infer_two_stage: expects the extended template graph");

    CandidateList list = infer_candidates(segments, weights, fcfg, cfg);
    InferenceResult res;
    InferenceStats stats;
    bool found = false;
    double best_j = detail::kNegInf;
    if (cfg.allow_empty) {
        found = true;
        best_j = 0.0;
    }

    const std::size_t keep =
        list.empty() ? 0
                     : static_cast<std::size_t>(
                           std::ceil(cfg.c_fraction * static_cast<double>(list.size())));
    for (std::size_t i = 0; i < std::min(keep, list.size()); ++i) {
        const Assignment& a = list[i].first;
        FeatureVector fv = featurize(a, segments, graph, fcfg, DegeneratePolicy::Penalize);
        double j = score(fv, weights);
        ++stats.stage2_rescored;
        if (!found || j > best_j || (j == best_j && lex_less(a, res.assignment))) {
            found = true;
            best_j = j;
            res.assignment = a;
        }
    }
    if (!found) throw Error("infer_two_stage: no valid assignment");
    res.assignment = orient_ccw(res.assignment, segments, fcfg.u_up);
    res.features = featurize(res.assignment, segments, graph, fcfg, DegeneratePolicy::Penalize);
    res.j = score(res.features, weights);
    res.stats = stats;
    return res;
}

}  // namespace carton
