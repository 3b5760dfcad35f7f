#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "carton/common.hpp"

namespace carton {

// Template node ids. 0-3 are the four sides in cycle order, 4 is the base,
// 5-8 are the flaps; flap (5+i) hangs off side i.
enum Role : int {
    kSide0 = 0,
    kSide1 = 1,
    kSide2 = 2,
    kSide3 = 3,
    kBase = 4,
    kFlap0 = 5,
    kFlap1 = 6,
    kFlap2 = 7,
    kFlap3 = 8,
};

inline constexpr int kRoleCount = 9;
inline constexpr int kSideCount = 4;

inline constexpr std::array<const char*, kRoleCount> kRoleNames = {
    "side0", "side1", "side2", "side3", "base", "flap0", "flap1", "flap2", "flap3"};

inline bool is_side(int node) { return node >= kSide0 && node <= kSide3; }
inline bool is_base(int node) { return node == kBase; }
inline bool is_flap(int node) { return node >= kFlap0 && node <= kFlap3; }

inline int flap_of_side(int side) { return kFlap0 + side; }
inline int side_of_flap(int flap) { return flap - kFlap0; }

inline std::string role_name(int node) {
    if (node < 0 || node >= kRoleCount) throw ConfigError("role_name: node id out of range");
    return kRoleNames[static_cast<std::size_t>(node)];
}

inline int parse_role(const std::string& name) {
    for (int i = 0; i < kRoleCount; ++i) {
        if (name == kRoleNames[static_cast<std::size_t>(i)]) return i;
    }
    throw ConfigError("parse_role: unknown role name '" + name + "'");
}

}  // namespace carton
