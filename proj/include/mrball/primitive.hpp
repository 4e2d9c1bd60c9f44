#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "mrball/errors.hpp"

namespace mrball {

// Canonical representative of a primitive homology class mod sign:
// gcd(|p|,|q|) = 1 and either p > 0, or (p, q) = (0, 1).
struct PrimitiveClass {
  std::int64_t p = 1;
  std::int64_t q = 0;

  std::int64_t height() const;
  bool operator==(const PrimitiveClass&) const = default;
};

struct PrimitiveClassHash {
  std::size_t operator()(const PrimitiveClass& w) const {
    std::size_t h1 = std::hash<std::int64_t>{}(w.p);
    std::size_t h2 = std::hash<std::int64_t>{}(w.q);
    return h1 ^ (h2 * 0x9e3779b97f4a7c15ULL + (h1 << 6));
  }
};

// Integer vector lift of a class; gap endpoints and cones work with lifts.
struct Vec2 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline std::int64_t det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
std::int64_t height(Vec2 v);

PrimitiveClass primitive_of(std::int64_t p, std::int64_t q);
PrimitiveClass class_of(Vec2 v);
Vec2 lift_of(const PrimitiveClass& w);

// Lift with vector angle in [0, pi): flips the canonical sign when q < 0.
Vec2 upper_lift(const PrimitiveClass& w);

// Strict angular order on the projective circle, theta(w) = atan2(q,p) mod pi
// in [0, pi); exact via cross products.
bool angle_less(const PrimitiveClass& a, const PrimitiveClass& b);

// Deterministic Farey neighbor u with det(w, u) = 1: smallest height, ties
// resolved toward the larger line angle (matches the fixed reference outputs).
PrimitiveClass farey_neighbor(const PrimitiveClass& w);

// Path in the triangle tree from the base ((1,0),(0,1),(1,1)) to a triangle
// containing the target; each step records which corner was replaced by the
// mediant of the other two.
struct SternBrocotPath {
  std::array<Vec2, 3> base{Vec2{1, 0}, Vec2{0, 1}, Vec2{1, 1}};
  std::vector<int> steps;  // index in {0,1,2} of the replaced label
};

SternBrocotPath stern_brocot_path(const PrimitiveClass& w);

struct GapStub {
  std::uint32_t lhs = 0;  // indices into GapTable::classes; rhs wraps to 0
  std::uint32_t rhs = 0;
};

struct GapTable {
  std::int64_t height_bound = 1;
  std::vector<PrimitiveClass> classes;  // angularly ordered, theta in [0, pi)
  std::vector<GapStub> gaps;            // consecutive cyclic pairs
};

inline constexpr std::int64_t kDefaultClassBudget = 10'000'000;

GapTable enumerate_classes(std::int64_t H, std::int64_t class_budget = kDefaultClassBudget);

// Integer lifts of a gap's endpoints with det(u, v) = +1 and the mediant u+v
// angularly inside the gap; height(u+v) > H is the Farey-gap guarantee.
struct GapEndpoints {
  Vec2 u;
  Vec2 v;
};

GapEndpoints gap_endpoints(const GapTable& table, const GapStub& stub);

}  // namespace mrball
