#pragma once

#include <utility>
#include <vector>

#include "mrball/exec.hpp"
#include "mrball/surface.hpp"

namespace mrball {

struct LengthValue {
  Interval value;  // hyperbolic length, 2*acosh(trace/2)
  long prec_bits = 0;
};

// One-sided supporting functional lambda_{base|side} in standard dual
// coordinates (lambda-sharp under the fixed inner product).
struct SupportFunctional {
  Interval fx, fy;
  Vec2 base_lift{1, 0};
  Vec2 side_lift{0, 1};
  PrimitiveClass base;
  Interval value_at_base;  // lambda(base) = |base|_X
  Interval value_at_side;  // lambda(side) = 2 log A, the fan limit
};

// Data of the Fricke-fan solve at a corner: A+- = (x_{w+-u} - x_u e^{-L/2}) /
// (e^{L/2} - e^{-L/2}); their product is coth^2(L/2).
struct SupportSolve {
  Interval r;  // e^{L/2}
  Interval z_plus, z_minus;
  Interval A_plus, A_minus;
};

struct AtomRecord {
  PrimitiveClass cls;
  Interval atom;  // exterior angle at the corner, radians
  SupportFunctional lambda_plus, lambda_minus;
  SupportSolve solve;
  Interval coth_residual;  // |A+A-/coth^2(L/2) - 1|
};

struct GapRecordFull {
  Vec2 u, v;  // oriented lifts, det(u, v) = +1
  PrimitiveClass mediant;
  SupportFunctional lam_uv, lam_vu;
  Interval turn;             // over the positive gap arc; consumers double for +-
  Interval endpoint_defect;  // |lam_uv(v) - |v|| + |lam_vu(u) - |u||
};

struct TailTurn {
  std::int64_t H = 1;
  Interval from_atoms;  // 2*pi - 2*sum of atoms over P_H
  Interval from_gaps;   // 2*sum of gap turns
  Interval discrepancy;
};

struct Polygon {
  std::vector<std::pair<Interval, Interval>> vertices;  // counterclockwise
};

struct Sandwich {
  Polygon inner, outer;
  double hausdorff_gap = 0;
};

LengthValue length(const SurfaceContext& ctx, const PrimitiveClass& w);

std::pair<Interval, Interval> boundary_point(const SurfaceContext& ctx, const PrimitiveClass& w);

// lambda_{u|v} for integer lifts with |det(u, v)| = 1.
SupportFunctional support_functional(const SurfaceContext& ctx, Vec2 u, Vec2 v);

AtomRecord corner_atom(const SurfaceContext& ctx, const PrimitiveClass& w);

GapRecordFull gap_turn(const SurfaceContext& ctx, const GapTable& table, const GapStub& stub);

// Batch kernels (serial reference + OpenMP), outputs ordered by table index.
std::vector<AtomRecord> atoms_scan(const SurfaceContext& ctx, const GapTable& table,
                                   ExecMode mode = ExecMode::serial);
std::vector<GapRecordFull> gaps_scan(const SurfaceContext& ctx, const GapTable& table,
                                     ExecMode mode = ExecMode::serial);

TailTurn tail_turn(const SurfaceContext& ctx, std::int64_t H, ExecMode mode = ExecMode::serial);
TailTurn tail_turn_from(std::int64_t H, const std::vector<AtomRecord>& atoms,
                        const std::vector<GapRecordFull>& gaps);

Sandwich polygon_sandwich(const SurfaceContext& ctx, std::int64_t H,
                          ExecMode mode = ExecMode::serial);

}  // namespace mrball
