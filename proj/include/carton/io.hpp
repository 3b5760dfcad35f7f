#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carton/eval.hpp"
#include "carton/learning.hpp"
#include "carton/planner.hpp"
#include "carton/pointcloud.hpp"
#include "carton/synth.hpp"

namespace carton {

using Json = nlohmann::json;

// Shortest round-trippable decimal representation; keeps file output
// byte-identical across runs for fixed seeds.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class CloudFormat { kPcdAscii, kCsv };

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_finite(const std::string& tok, double& out) {
    const std::string t = trim(tok);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

}  // namespace detail

inline CloudFormat cloud_format_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pcd") return CloudFormat::kPcdAscii;
    if (ext == ".csv") return CloudFormat::kCsv;
    throw ConfigError("cannot infer cloud format from \"" + path + "\" (use .pcd or .csv)");
}

// Ascii PCD subset: x/y/z fields only, DATA ascii. WIDTH 0 is a valid empty
// cloud. Any malformed header or point line reports its line number.
inline PointCloud parse_pcd_ascii(std::istream& in) {
    std::size_t lineno = 0;
    std::string line;
    const auto next = [&](std::string& out) {
        if (!std::getline(in, out)) return false;
        ++lineno;
        return true;
    };

    bool fields_ok = false, data_seen = false, have_points = false, have_width = false;
    std::size_t width = 0, height = 1, points = 0;
    while (!data_seen) {
        if (!next(line)) throw ParseError("unexpected end of PCD header", lineno);
        const std::string l = detail::trim(line);
        if (l.empty() || l[0] == '#') continue;
        std::istringstream ss(l);
        std::string key;
        ss >> key;
        if (key == "VERSION" || key == "SIZE" || key == "TYPE" || key == "COUNT" ||
            key == "VIEWPOINT") {
            continue;
        } else if (key == "FIELDS") {
            std::vector<std::string> fields;
            std::string f;
            while (ss >> f) fields.push_back(f);
            if (fields != std::vector<std::string>{"x", "y", "z"})
                throw ParseError("unsupported FIELDS (need exactly: x y z)", lineno);
            fields_ok = true;
        } else if (key == "WIDTH" || key == "HEIGHT" || key == "POINTS") {
            long long v = -1;
            if (!(ss >> v) || v < 0) throw ParseError("malformed " + key + " value", lineno);
            if (key == "WIDTH") {
                width = static_cast<std::size_t>(v);
                have_width = true;
            } else if (key == "HEIGHT") {
                height = static_cast<std::size_t>(v);
            } else {
                points = static_cast<std::size_t>(v);
                have_points = true;
            }
        } else if (key == "DATA") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii")
                throw ParseError("unsupported DATA format \"" + fmt + "\" (only ascii)", lineno);
            data_seen = true;
        } else {
            throw ParseError("unknown PCD header key \"" + key + "\"", lineno);
        }
    }
    if (!fields_ok) throw ParseError("missing FIELDS declaration", lineno);
    if (!have_points) {
        if (!have_width) throw ParseError("missing POINTS (or WIDTH) declaration", lineno);
        points = width * height;
    }

    PointCloud cloud;
    cloud.points.reserve(points);
    while (cloud.points.size() < points) {
        if (!next(line))
            throw ParseError("expected " + std::to_string(points) + " points, file ended after " +
                                 std::to_string(cloud.points.size()),
                             lineno);
        const std::string l = detail::trim(line);
        if (l.empty() || l[0] == '#') continue;
        std::istringstream ss(l);
        std::string xs, ys, zs, extra;
        ss >> xs >> ys >> zs;
        double x, y, z;
        if (!detail::parse_finite(xs, x) || !detail::parse_finite(ys, y) ||
            !detail::parse_finite(zs, z))
            throw ParseError("non-numeric point data", lineno);
        if (ss >> extra) throw ParseError("too many fields on point line", lineno);
        cloud.points.emplace_back(x, y, z);
    }
    while (next(line)) {
        const std::string l = detail::trim(line);
        if (!l.empty() && l[0] != '#')
            throw ParseError("trailing data after declared point count", lineno);
    }
    return cloud;
}

// CSV: one "x,y,z" row per point, no header.
inline PointCloud parse_csv(std::istream& in) {
    PointCloud cloud;
    std::size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string l = detail::trim(line);
        if (l.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ss(l);
        while (std::getline(ss, cur, ',')) fields.push_back(cur);
        if (fields.size() != 3)
            throw ParseError("expected 3 comma-separated values, got " +
                                 std::to_string(fields.size()),
                             lineno);
        double x, y, z;
        if (!detail::parse_finite(fields[0], x) || !detail::parse_finite(fields[1], y) ||
            !detail::parse_finite(fields[2], z))
            throw ParseError("non-numeric field in \"" + l + "\"", lineno);
        cloud.points.emplace_back(x, y, z);
    }
    return cloud;
}

inline PointCloud load_cloud(const std::string& path, CloudFormat format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open \"" + path + "\" for reading");
    return format == CloudFormat::kPcdAscii ? parse_pcd_ascii(in) : parse_csv(in);
}

inline PointCloud load_cloud(const std::string& path) {
    return load_cloud(path, cloud_format_from_path(path));
}

inline void write_pcd_ascii(std::ostream& out, const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    out << "# generated by carton\n"
        << "VERSION 0.7\n"
        << "FIELDS x y z\n"
        << "SIZE 8 8 8\n"
        << "TYPE F F F\n"
        << "COUNT 1 1 1\n"
        << "WIDTH " << n << "\n"
        << "HEIGHT 1\n"
        << "VIEWPOINT 0 0 0 1 0 0 0\n"
        << "POINTS " << n << "\n"
        << "DATA ascii\n";
    for (const Vec3& p : cloud.points)
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
            << '\n';
}

inline void write_csv(std::ostream& out, const PointCloud& cloud) {
    for (const Vec3& p : cloud.points)
        out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z())
            << '\n';
}

inline void save_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    if (format == CloudFormat::kPcdAscii)
        write_pcd_ascii(out, cloud);
    else
        write_csv(out, cloud);
}

inline void save_cloud(const std::string& path, const PointCloud& cloud) {
    save_cloud(path, cloud, cloud_format_from_path(path));
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const Json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double get_num(const Json& j, const std::string& where, const char* key, double def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number()) throw ConfigError(where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

inline bool get_bool(const Json& j, const std::string& where, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
    return j.at(key).get<bool>();
}

inline std::size_t get_size(const Json& j, const std::string& where, const char* key,
                            std::size_t def) {
    if (!j.contains(key)) return def;
    const Json& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

}  // namespace detail

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number())
        throw ConfigError(where + " must be a 3-element number array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Json plane_to_json(const PlaneModel& p) {
    return Json{{"normal", vec3_to_json(p.normal)}, {"offset", p.offset}};
}

inline PlaneModel plane_from_json(const Json& j, const std::string& where) {
    detail::require_keys(j, where, {"normal", "offset"});
    if (!j.contains("normal")) throw ConfigError(where + ": missing normal");
    PlaneModel p;
    p.normal = vec3_from_json(j.at("normal"), where + ".normal");
    p.offset = detail::get_num(j, where, "offset", 0.0);
    return p;
}

inline Json corners_to_json(const std::array<Vec3, 4>& corners) {
    Json out = Json::array();
    for (const Vec3& c : corners) out.push_back(vec3_to_json(c));
    return out;
}

inline std::array<Vec3, 4> corners_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) throw ConfigError(where + " must have exactly 4 corners");
    std::array<Vec3, 4> out;
    for (std::size_t i = 0; i < 4; ++i)
        out[i] = vec3_from_json(j[i], where + "[" + std::to_string(i) + "]");
    return out;
}

inline Json segment_to_json(const Segment& s) {
    return Json{{"plane", plane_to_json(s.plane)},
                {"centroid", vec3_to_json(s.centroid)},
                {"corners", corners_to_json(s.corners)},
                {"area", s.area},
                {"inlier_count", s.inlier_count},
                {"fit_error", s.fit_error}};
}

inline Segment segment_from_json(const Json& j, const std::string& where) {
    detail::require_keys(j, where,
                         {"plane", "centroid", "corners", "area", "inlier_count", "fit_error"});
    for (const char* k : {"plane", "centroid", "corners"})
        if (!j.contains(k)) throw ConfigError(where + ": missing " + k);
    Segment s;
    s.plane = plane_from_json(j.at("plane"), where + ".plane");
    s.centroid = vec3_from_json(j.at("centroid"), where + ".centroid");
    s.corners = corners_from_json(j.at("corners"), where + ".corners");
    s.area = detail::get_num(j, where, "area", 0.0);
    s.inlier_count = detail::get_size(j, where, "inlier_count", 0);
    s.fit_error = detail::get_num(j, where, "fit_error", 0.0);
    return s;
}

inline Json face_label_to_json(const FaceLabel& f) {
    if (!f.present) return Json{{"present", false}};
    return Json{{"present", true},
                {"plane", plane_to_json(f.plane)},
                {"centroid", vec3_to_json(f.centroid)},
                {"corners", corners_to_json(f.corners)}};
}

inline FaceLabel face_label_from_json(const Json& j, const std::string& where) {
    detail::require_keys(j, where, {"present", "plane", "centroid", "corners"});
    FaceLabel f;
    f.present = detail::get_bool(j, where, "present", false);
    if (!f.present) return f;
    for (const char* k : {"plane", "centroid", "corners"})
        if (!j.contains(k)) throw ConfigError(where + ": missing " + k);
    f.plane = plane_from_json(j.at("plane"), where + ".plane");
    f.centroid = vec3_from_json(j.at("centroid"), where + ".centroid");
    f.corners = corners_from_json(j.at("corners"), where + ".corners");
    return f;
}

inline Json labels_to_json(const GroundTruthLabels& labels) {
    Json out = Json::object();
    for (int r = 0; r < kRoleCount; ++r)
        out[role_name(r)] = face_label_to_json(labels.faces[static_cast<std::size_t>(r)]);
    return out;
}

inline GroundTruthLabels labels_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("labels document must be a JSON object");
    GroundTruthLabels labels;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const int role = parse_role(it.key());
        labels.faces[static_cast<std::size_t>(role)] = face_label_from_json(it.value(), it.key());
    }
    return labels;
}

inline Json box_spec_to_json(const BoxSpec& spec) {
    Json out{{"width", spec.width},
             {"depth", spec.depth},
             {"height", spec.height},
             {"flap_angles", spec.flap_angles},
             {"yaw", spec.pose.yaw},
             {"translation", vec3_to_json(spec.pose.translation)},
             {"sampling_density", spec.sampling_density},
             {"noise_sigma", spec.noise_sigma}};
    out["occluded_faces"] = Json::array();
    for (int f : spec.occluded_faces) out["occluded_faces"].push_back(role_name(f));
    return out;
}

inline BoxSpec box_spec_from_json(const Json& j) {
    const std::string where = "box spec";
    detail::require_keys(j, where,
                         {"width", "depth", "height", "flap_angles", "yaw", "translation",
                          "sampling_density", "noise_sigma", "occluded_faces"});
    BoxSpec spec;
    spec.width = detail::get_num(j, where, "width", spec.width);
    spec.depth = detail::get_num(j, where, "depth", spec.depth);
    spec.height = detail::get_num(j, where, "height", spec.height);
    if (j.contains("flap_angles")) {
        const Json& fa = j.at("flap_angles");
        if (!fa.is_array() || fa.size() != 4)
            throw ConfigError("box spec.flap_angles must be a 4-element array");
        for (std::size_t i = 0; i < 4; ++i) {
            if (!fa[i].is_number())
                throw ConfigError("box spec.flap_angles must contain numbers");
            spec.flap_angles[i] = fa[i].get<double>();
        }
    }
    spec.pose.yaw = detail::get_num(j, where, "yaw", 0.0);
    if (j.contains("translation"))
        spec.pose.translation = vec3_from_json(j.at("translation"), where + ".translation");
    spec.sampling_density = detail::get_num(j, where, "sampling_density", spec.sampling_density);
    spec.noise_sigma = detail::get_num(j, where, "noise_sigma", spec.noise_sigma);
    if (j.contains("occluded_faces")) {
        const Json& of = j.at("occluded_faces");
        if (!of.is_array()) throw ConfigError("box spec.occluded_faces must be an array");
        for (const Json& f : of) {
            if (f.is_string())
                spec.occluded_faces.insert(parse_role(f.get<std::string>()));
            else if (f.is_number_integer())
                spec.occluded_faces.insert(f.get<int>());
            else
                throw ConfigError("box spec.occluded_faces entries must be role names or ids");
        }
    }
    spec.validate();
    return spec;
}

inline Json weights_to_json(const WeightVector& w) {
    Json out = Json::object();
    for (int t = 0; t < kTermCount; ++t)
        out[kTermNames[static_cast<std::size_t>(t)]] = w[static_cast<FeatureTerm>(t)];
    return out;
}

inline WeightVector weights_from_json(const Json& j, const std::string& where = "weights") {
    detail::require_keys(
        j, where, {"phi1", "phi2", "phi3", "gamma1", "gamma2", "gamma3", "gamma4", "gamma5"});
    WeightVector w;
    for (int t = 0; t < kTermCount; ++t) {
        const char* name = kTermNames[static_cast<std::size_t>(t)];
        w[static_cast<FeatureTerm>(t)] =
            detail::get_num(j, where, name, w[static_cast<FeatureTerm>(t)]);
    }
    return w;
}

inline Json feature_vector_to_json(const FeatureVector& fv) {
    Json out = Json::object();
    for (int t = 0; t < kTermCount; ++t)
        out[kTermNames[static_cast<std::size_t>(t)]] = fv.terms[static_cast<std::size_t>(t)];
    return out;
}

inline Json learned_model_to_json(const LearnedModel& m) {
    Json scaler = Json::object();
    Json mean = Json::object(), scale = Json::object();
    for (int t = 0; t < kTermCount; ++t) {
        mean[kTermNames[static_cast<std::size_t>(t)]] = m.scaler.mean[static_cast<std::size_t>(t)];
        scale[kTermNames[static_cast<std::size_t>(t)]] =
            m.scaler.scale[static_cast<std::size_t>(t)];
    }
    scaler["mean"] = mean;
    scaler["scale"] = scale;
    return Json{{"weights", weights_to_json(m.weights)},
                {"scaler", scaler},
                {"target_mean", m.target_mean},
                {"rank_warning", m.rank_warning}};
}

inline LearnedModel learned_model_from_json(const Json& j) {
    const std::string where = "learned model";
    detail::require_keys(j, where, {"weights", "scaler", "target_mean", "rank_warning"});
    LearnedModel m;
    if (!j.contains("weights")) throw ConfigError(where + ": missing weights");
    m.weights = weights_from_json(j.at("weights"), where + ".weights");
    if (j.contains("scaler")) {
        const Json& sc = j.at("scaler");
        detail::require_keys(sc, where + ".scaler", {"mean", "scale"});
        for (int t = 0; t < kTermCount; ++t) {
            const char* name = kTermNames[static_cast<std::size_t>(t)];
            if (sc.contains("mean"))
                m.scaler.mean[static_cast<std::size_t>(t)] =
                    detail::get_num(sc.at("mean"), where + ".scaler.mean", name, 0.0);
            if (sc.contains("scale"))
                m.scaler.scale[static_cast<std::size_t>(t)] =
                    detail::get_num(sc.at("scale"), where + ".scaler.scale", name, 1.0);
        }
    }
    m.target_mean = detail::get_num(j, where, "target_mean", 0.0);
    m.rank_warning = detail::get_bool(j, where, "rank_warning", false);
    return m;
}

// Accepts either a bare weights map or a full learned-model document (the
// latter is collapsed to its effective raw-feature weights).
inline WeightVector weights_from_document(const Json& j) {
    if (j.is_object() && j.contains("weights")) return learned_model_from_json(j).effective();
    return weights_from_json(j);
}

inline Json assignment_to_json(const Assignment& a) {
    Json out = Json::object();
    for (int r = 0; r < kRoleCount; ++r) {
        if (a[r] == kEmpty)
            out[role_name(r)] = nullptr;
        else
            out[role_name(r)] = a[r];
    }
    return out;
}

inline Assignment assignment_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("assignment must be a JSON object");
    Assignment a;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const int role = parse_role(it.key());
        if (it.value().is_null())
            a[role] = kEmpty;
        else if (it.value().is_number_integer())
            a[role] = it.value().get<int>();
        else
            throw ConfigError("assignment." + it.key() + " must be an integer or null");
    }
    return a;
}

// ---------------------------------------------------------------------------
// Inference result document: assignment + score + per-term breakdown, with
// the geometry of every assigned segment embedded so downstream commands
// (plan, export-wireframe) can run from the file alone.
// ---------------------------------------------------------------------------

struct ModelDocument {
    Assignment assignment;
    double score = 0.0;
    FeatureVector terms;
    std::vector<Segment> segments;  // sized by the original pool; unassigned slots are default
    std::size_t segment_count = 0;
};

inline Json result_to_json(const InferenceResult& result, const std::vector<Segment>& segments) {
    Json roles = Json::object();
    for (int r = 0; r < kRoleCount; ++r) {
        if (result.assignment[r] == kEmpty) {
            roles[role_name(r)] = nullptr;
            continue;
        }
        Json entry = segment_to_json(segments[static_cast<std::size_t>(result.assignment[r])]);
        entry["segment"] = result.assignment[r];
        roles[role_name(r)] = entry;
    }
    return Json{{"score", result.j},
                {"terms", feature_vector_to_json(result.features)},
                {"segment_count", segments.size()},
                {"roles", roles},
                {"stats",
                 Json{{"assignments_scored", result.stats.assignments_scored},
                      {"tuples_enumerated", result.stats.tuples_enumerated},
                      {"tuples_pruned", result.stats.tuples_pruned},
                      {"tuples_completed", result.stats.tuples_completed},
                      {"candidate_evaluations", result.stats.candidate_evaluations},
                      {"stage2_rescored", result.stats.stage2_rescored}}}};
}

inline ModelDocument model_from_json(const Json& j) {
    const std::string where = "model document";
    detail::require_keys(j, where, {"score", "terms", "segment_count", "roles", "stats"});
    ModelDocument doc;
    doc.score = detail::get_num(j, where, "score", 0.0);
    doc.segment_count = detail::get_size(j, where, "segment_count", 0);
    if (j.contains("terms")) {
        const Json& terms = j.at("terms");
        for (int t = 0; t < kTermCount; ++t)
            doc.terms.terms[static_cast<std::size_t>(t)] = detail::get_num(
                terms, where + ".terms", kTermNames[static_cast<std::size_t>(t)], 0.0);
    }
    doc.segments.resize(doc.segment_count);
    if (!j.contains("roles")) throw ConfigError(where + ": missing roles");
    const Json& roles = j.at("roles");
    if (!roles.is_object()) throw ConfigError(where + ".roles must be an object");
    for (auto it = roles.begin(); it != roles.end(); ++it) {
        const int role = parse_role(it.key());
        if (it.value().is_null()) {
            doc.assignment[role] = kEmpty;
            continue;
        }
        Json entry = it.value();
        if (!entry.is_object() || !entry.contains("segment"))
            throw ConfigError(where + ".roles." + it.key() + " must be null or have a segment id");
        const int seg = entry.at("segment").get<int>();
        if (seg < 0 || static_cast<std::size_t>(seg) >= doc.segments.size())
            throw ConfigError(where + ".roles." + it.key() + ": segment id out of range");
        entry.erase("segment");
        doc.segments[static_cast<std::size_t>(seg)] =
            segment_from_json(entry, where + ".roles." + it.key());
        doc.assignment[role] = seg;
    }
    return doc;
}

inline std::string result_to_text(const InferenceResult& result,
                                  const std::vector<Segment>& segments) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "score J = %.6f over %zu segments\n", result.j,
                  segments.size());
    out << buf;
    out << "role    segment  normal                     centroid                   area\n";
    for (int r = 0; r < kRoleCount; ++r) {
        if (result.assignment[r] == kEmpty) {
            std::snprintf(buf, sizeof buf, "%-7s %7s\n", role_name(r).c_str(), "-");
            out << buf;
            continue;
        }
        const Segment& s = segments[static_cast<std::size_t>(result.assignment[r])];
        std::snprintf(buf, sizeof buf,
                      "%-7s %7d  (%+6.3f %+6.3f %+6.3f)    (%+6.3f %+6.3f %+6.3f)    %.4f\n",
                      role_name(r).c_str(), result.assignment[r], s.plane.normal.x(),
                      s.plane.normal.y(),
                      s.plane.normal.z(), s.centroid.x(), s.centroid.y(), s.centroid.z(), s.area);
        out << buf;
    }
    out << "terms:";
    for (int t = 0; t < kTermCount; ++t) {
        std::snprintf(buf, sizeof buf, " %s=%.4f", kTermNames[static_cast<std::size_t>(t)],
                      result.features.terms[static_cast<std::size_t>(t)]);
        out << buf;
    }
    out << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Evaluation report
// ---------------------------------------------------------------------------

inline Json report_to_json(const EvalReport& report) {
    const auto summary = [](const CategorySummary& c) {
        return Json{{"category", c.category},
                    {"scenes", c.scenes},
                    {"failures", c.failures},
                    {"flap_defined", c.flap_defined},
                    {"full_defined", c.full_defined},
                    {"flap_accuracy", c.flap_mean},
                    {"full_model_accuracy", c.full_mean},
                    {"flap_simple_percent", c.flap_simple_mean},
                    {"full_simple_percent", c.full_simple_mean},
                    {"seconds_total", c.seconds_total}};
    };
    Json scenes = Json::array();
    for (const SceneEval& s : report.scenes) {
        Json row{{"index", s.index},
                 {"name", s.name},
                 {"category", s.category},
                 {"pipeline_ok", s.pipeline_ok},
                 {"segment_count", s.segment_count},
                 {"prediction", assignment_to_json(s.prediction)},
                 {"seconds", s.seconds}};
        if (!s.pipeline_ok) row["error"] = s.error;
        if (s.flap_defined) {
            row["flap_accuracy"] = s.flap.primary;
            row["flap_simple_percent"] = s.flap.simple;
        }
        if (s.full_defined) {
            row["full_model_accuracy"] = s.full.primary;
            row["full_simple_percent"] = s.full.simple;
        }
        scenes.push_back(std::move(row));
    }
    Json categories = Json::array();
    for (const CategorySummary& c : report.categories) categories.push_back(summary(c));
    return Json{{"scenes", scenes}, {"categories", categories}, {"overall", summary(report.overall)}};
}

inline std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %7s %6s %10s %10s %12s %12s\n", "category", "scenes",
                  "fail", "flap%", "flap(s)%", "full%", "full(s)%");
    out << buf;
    const auto row = [&](const CategorySummary& c) {
        std::snprintf(buf, sizeof buf, "%-12s %7zu %6zu %10.2f %10.2f %12.2f %12.2f\n",
                      c.category.c_str(), c.scenes, c.failures, c.flap_mean, c.flap_simple_mean,
                      c.full_mean, c.full_simple_mean);
        out << buf;
    };
    for (const CategorySummary& c : report.categories) row(c);
    row(report.overall);
    std::size_t failures = 0;
    for (const SceneEval& s : report.scenes)
        if (!s.pipeline_ok) ++failures;
    if (failures > 0) {
        out << "failed scenes:\n";
        for (const SceneEval& s : report.scenes)
            if (!s.pipeline_ok) out << "  " << s.name << ": " << s.error << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Closing plan
// ---------------------------------------------------------------------------

inline Json plan_to_json(const ClosingPlan& plan) {
    Json flaps = Json::array();
    for (const FlapPlan& f : plan.flaps) {
        Json waypoints = Json::array();
        for (const auto& pose : f.waypoints) waypoints.push_back(corners_to_json(pose));
        flaps.push_back(Json{{"flap", role_name(f.flap_role)},
                             {"side", role_name(f.side_role)},
                             {"hinge_point", vec3_to_json(f.hinge_point)},
                             {"hinge_dir", vec3_to_json(f.hinge_dir)},
                             {"angle", f.angle},
                             {"waypoints", waypoints}});
    }
    Json skipped = Json::array();
    for (const auto& [role, reason] : plan.skipped)
        skipped.push_back(Json{{"flap", role_name(role)}, {"reason", reason}});
    return Json{{"flaps", flaps}, {"skipped", skipped}};
}

inline std::string plan_to_text(const ClosingPlan& plan) {
    std::ostringstream out;
    char buf[256];
    for (const FlapPlan& f : plan.flaps) {
        std::snprintf(buf, sizeof buf,
                      "%s about hinge (%.3f %.3f %.3f) dir (%.3f %.3f %.3f): rotate %.1f deg in "
                      "%zu waypoints\n",
                      role_name(f.flap_role).c_str(), f.hinge_point.x(), f.hinge_point.y(),
                      f.hinge_point.z(), f.hinge_dir.x(), f.hinge_dir.y(), f.hinge_dir.z(),
                      f.angle * 180.0 / kPi, f.waypoints.size());
        out << buf;
    }
    for (const auto& [role, reason] : plan.skipped)
        out << role_name(role) << " skipped: " << reason << '\n';
    if (plan.flaps.empty() && plan.skipped.empty()) out << "no flaps to close\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Wireframe SVG: isometric projection, side faces darker than flaps/base.
// ---------------------------------------------------------------------------

inline std::string wireframe_svg(const std::vector<Segment>& segments, const Assignment& assign) {
    struct Face {
        int role;
        std::array<Vec3, 4> corners;
        double depth;
    };
    const auto project = [](const Vec3& p) {
        return Vec2{(p.x() - p.y()) * 0.86602540378443865,
                    -((p.x() + p.y()) * 0.5 - p.z())};  // SVG y grows downward
    };

    std::vector<Face> faces;
    for (int r = 0; r < kRoleCount; ++r) {
        if (assign[r] == kEmpty) continue;
        const Segment& s = segments[static_cast<std::size_t>(assign[r])];
        double depth = 0.0;
        for (const Vec3& c : s.corners) depth += c.x() + c.y() + c.z();
        faces.push_back({r, s.corners, depth});
    }
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
        if (a.depth != b.depth) return a.depth < b.depth;  // far faces first
        return a.role < b.role;
    });

    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    bool first = true;
    for (const Face& f : faces)
        for (const Vec3& c : f.corners) {
            const Vec2 p = project(c);
            if (first) {
                min_x = max_x = p.x();
                min_y = max_y = p.y();
                first = false;
            } else {
                min_x = std::min(min_x, p.x());
                max_x = std::max(max_x, p.x());
                min_y = std::min(min_y, p.y());
                max_y = std::max(max_y, p.y());
            }
        }
    const double span = std::max(max_x - min_x, max_y - min_y);
    const double margin = span > 0.0 ? span * 0.08 : 0.1;
    min_x -= margin;
    min_y -= margin;
    max_x += margin;
    max_y += margin;

    std::ostringstream out;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
                  "viewBox=\"%.4f %.4f %.4f %.4f\">\n",
                  min_x, min_y, max_x - min_x, max_y - min_y);
    out << buf;
    const double stroke = std::max(max_x - min_x, max_y - min_y) / 320.0;
    for (const Face& f : faces) {
        const char* fill = is_side(f.role) ? "#8c7450" : "#ddd0b0";
        out << "  <polygon points=\"";
        for (const Vec3& c : f.corners) {
            const Vec2 p = project(c);
            std::snprintf(buf, sizeof buf, "%.4f,%.4f ", p.x(), p.y());
            out << buf;
        }
        std::snprintf(buf, sizeof buf,
                      "\" fill=\"%s\" fill-opacity=\"0.88\" stroke=\"#403020\" "
                      "stroke-width=\"%.4f\"/>\n",
                      fill, stroke);
        out << buf;
        Vec3 centroid = Vec3::Zero();
        for (const Vec3& c : f.corners) centroid += c;
        const Vec2 p = project(centroid / 4.0);
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.4f\" y=\"%.4f\" font-size=\"%.4f\" fill=\"#1a1a1a\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      p.x(), p.y(), stroke * 10.0, role_name(f.role).c_str());
        out << buf;
    }
    out << "</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open \"" + path + "\" for reading");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON in \"") + path + "\": " + e.what(), 0);
    }
}

inline void save_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    out << j.dump(2) << '\n';
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    out << text;
}

}  // namespace carton
