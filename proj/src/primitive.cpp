#include "mrball/primitive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

namespace mrball {

std::int64_t PrimitiveClass::height() const { return std::max(std::llabs(p), std::llabs(q)); }

std::int64_t height(Vec2 v) { return std::max(std::llabs(v.x), std::llabs(v.y)); }

PrimitiveClass primitive_of(std::int64_t p, std::int64_t q) {
  if (p == 0 && q == 0) raise(Errc::zero_vector, "primitive_of(0, 0)");
  std::int64_t g = std::gcd(std::llabs(p), std::llabs(q));
  p /= g;
  q /= g;
  if (p < 0 || (p == 0 && q < 0)) {
    p = -p;
    q = -q;
  }
  return {p, q};
}

PrimitiveClass class_of(Vec2 v) { return primitive_of(v.x, v.y); }

Vec2 lift_of(const PrimitiveClass& w) { return {w.p, w.q}; }

Vec2 upper_lift(const PrimitiveClass& w) {
  if (w.q < 0) return {-w.p, -w.q};
  return {w.p, w.q};
}

bool angle_less(const PrimitiveClass& a, const PrimitiveClass& b) {
  Vec2 u = upper_lift(a), v = upper_lift(b);
  return det(u, v) > 0;
}

namespace {

// One solution of s*a + t*b = gcd(a, b).
void ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t) {
  std::int64_t x0 = 1, x1 = 0, y0 = 0, y1 = 1;
  while (b != 0) {
    std::int64_t qq = a / b;
    std::int64_t r = a - qq * b;
    a = b;
    b = r;
    std::int64_t nx = x0 - qq * x1;
    x0 = x1;
    x1 = nx;
    std::int64_t ny = y0 - qq * y1;
    y0 = y1;
    y1 = ny;
  }
  if (a < 0) {
    x0 = -x0;
    y0 = -y0;
  }
  s = x0;
  t = y0;
}

}  // namespace

PrimitiveClass farey_neighbor(const PrimitiveClass& w) {
  // Solutions of det(w, u) = +-1 form the two lines +-u0 + k*w. The class is
  // chosen among canonical representatives on those lines: minimal height,
  // ties by larger q then smaller p (this matches the fixed reference
  // outputs, e.g. (1,0) -> (0,1) and (1,-1) -> (0,1)).
  std::int64_t p = w.p, q = w.q;
  std::int64_t s = 0, t = 0;
  ext_gcd(p, -q, s, t);  // s*p - t*q = 1, so det(w, (t, s)) = 1
  Vec2 u0{t, s};

  PrimitiveClass best;
  bool have = false;
  auto consider = [&](Vec2 cand) {
    if (cand.x == 0 && cand.y == 0) return;
    if (cand.x < 0 || (cand.x == 0 && cand.y < 0)) return;  // not canonical
    PrimitiveClass c{cand.x, cand.y};
    if (!have || c.height() < best.height() ||
        (c.height() == best.height() &&
         (c.q > best.q || (c.q == best.q && c.p < best.p)))) {
      best = c;
      have = true;
    }
  };
  auto scan_line = [&](Vec2 base) {
    // candidate k values: near per-coordinate zeros, near the crossings of
    // |base.x + k p| and |base.y + k q|, and both neighbors of each
    std::vector<double> centers;
    if (p != 0) centers.push_back(-static_cast<double>(base.x) / p);
    if (q != 0) centers.push_back(-static_cast<double>(base.y) / q);
    if (p != q) centers.push_back(static_cast<double>(base.y - base.x) / (p - q));
    if (p != -q) centers.push_back(-static_cast<double>(base.x + base.y) / (p + q));
    if (centers.empty()) centers.push_back(0.0);
    for (double c0 : centers) {
      std::int64_t kc = static_cast<std::int64_t>(std::llround(c0));
      for (std::int64_t k = kc - 2; k <= kc + 2; ++k) {
        consider({base.x + k * p, base.y + k * q});
      }
    }
  };
  scan_line(u0);
  scan_line(-u0);
  return best;
}

namespace {

// Triangle descent step shared by path construction and trace evaluation:
// target w' strictly inside cone(a, b) with mediant c = a + b.
struct Cone {
  Vec2 a, b;
};

// Picks the lift of w lying in the closed positive cone of ((1,0),(0,1)) or
// ((1,0),(0,-1)); the base triangle covers both after one flip.
Vec2 quadrant_lift(const PrimitiveClass& w) { return {w.p, w.q}; }

}  // namespace

SternBrocotPath stern_brocot_path(const PrimitiveClass& w) {
  SternBrocotPath path;
  Vec2 target = quadrant_lift(w);
  Vec2 a{1, 0}, b{0, 1}, c{1, 1};
  // labels array mirrors (a, b, c) positions in the current triangle
  std::array<int, 3> slot{0, 1, 2};
  if (target == a || target == b || target == c) return path;
  if (w.q < 0) {
    // flip (1,1) -> (1,-1): the triangle (1,0),(0,1) with mediant lift (1,-1)
    path.steps.push_back(slot[2]);
    b = {0, -1};
    c = {1, -1};
    if (target == c) return path;
  }
  for (;;) {
    // target = alpha*a + beta*b with alpha, beta >= 1 (det(a,b) = +-1)
    std::int64_t d = det(a, b);
    std::int64_t alpha = det(target, b) / d;
    std::int64_t beta = det(a, target) / d;
    if (alpha == beta) return path;  // target == c
    if (alpha > beta) {
      // descend into cone(a, c): replace b
      path.steps.push_back(slot[1]);
      std::swap(slot[1], slot[2]);
      b = c;
    } else {
      path.steps.push_back(slot[0]);
      std::swap(slot[0], slot[2]);
      a = c;
    }
    c = a + b;
    if (target == c) return path;
  }
}

GapTable enumerate_classes(std::int64_t H, std::int64_t class_budget) {
  if (H < 1) raise(Errc::invalid_argument, "enumerate_classes needs H >= 1");
  // 4 classes per height band is a lower bound; the true count is ~(12/pi^2)H^2.
  GapTable table;
  table.height_bound = H;
  auto& cls = table.classes;
  std::int64_t count = 0;
  auto push = [&](std::int64_t p, std::int64_t q) {
    if (++count > class_budget)
      raise(Errc::bound_too_large, "class budget exceeded at H=" + std::to_string(H));
    cls.push_back(PrimitiveClass{p, q});
  };
  push(0, 1);
  for (std::int64_t p = 1; p <= H; ++p) {
    for (std::int64_t q = -H; q <= H; ++q) {
      if (std::gcd(p, std::llabs(q)) != 1) continue;
      push(p, q);
    }
  }
  std::sort(cls.begin(), cls.end(), angle_less);
  table.gaps.resize(cls.size());
  for (std::uint32_t i = 0; i < cls.size(); ++i) {
    table.gaps[i] = GapStub{i, static_cast<std::uint32_t>((i + 1) % cls.size())};
  }
  return table;
}

GapEndpoints gap_endpoints(const GapTable& table, const GapStub& stub) {
  Vec2 u = upper_lift(table.classes.at(stub.lhs));
  Vec2 v = upper_lift(table.classes.at(stub.rhs));
  if (stub.rhs <= stub.lhs) v = -v;  // wrap gap: lift past angle pi
  if (det(u, v) != 1)
    raise(Errc::determinant_violation, "gap endpoints with det != 1 (enumeration bug)");
  return {u, v};
}

}  // namespace mrball
