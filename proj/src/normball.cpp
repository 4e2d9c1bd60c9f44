#include "mrball/normball.hpp"

#include <algorithm>
#include <cmath>

namespace mrball {

namespace {

struct FnData {
  Interval fx, fy;
  Interval L_base, L_side;
  Interval lam_side;  // lambda(side) = 2 log A
  Interval A;
  Interval x_mediant;
};

// lambda_{u|v} at one working precision. The fan computation: with
// a = |u|/2, A = (x_{u+v} - x_v e^{-a}) / (e^a - e^{-a}), the supporting
// functional selected by v has lambda(u) = |u| and lambda(v) = 2 log A,
// converted to standard dual coordinates through the dual basis of (u, v).
FnData functional_at(const SurfaceContext& ctx, Vec2 u, Vec2 v, long bits) {
  std::int64_t d = det(u, v);
  if (d != 1 && d != -1) raise(Errc::degenerate_basis, "support basis with |det| != 1");

  Interval xu = trace_enclosure(ctx, class_of(u), bits);
  Interval xv = trace_enclosure(ctx, class_of(v), bits);
  Interval xm = trace_enclosure(ctx, class_of(u + v), bits);

  FnData out;
  out.L_base = length_from_trace(xu);
  out.L_side = length_from_trace(xv);
  out.x_mediant = xm;
  Interval a = div_si(out.L_base, 2);
  Interval ea = exp_i(a);
  Interval eainv = exp_i(-a);
  Interval num = xm - xv * eainv;
  if (!num.certainly_positive())
    raise(Errc::precision_exhausted, "fan numerator not certainly positive");
  out.A = num / (ea - eainv);
  out.lam_side = mul_si(log_i(out.A), 2);

  Interval ux = Interval::from_si(u.x, bits), uy = Interval::from_si(u.y, bits);
  Interval vx = Interval::from_si(v.x, bits), vy = Interval::from_si(v.y, bits);
  // dual basis rows: u* = (v.y, -v.x)/d, v* = (-u.y, u.x)/d
  out.fx = div_si(out.L_base * vy - out.lam_side * uy, d);
  out.fy = div_si(out.lam_side * ux - out.L_base * vx, d);
  return out;
}

SupportFunctional pack(const FnData& f, Vec2 u, Vec2 v) {
  SupportFunctional s;
  s.fx = f.fx;
  s.fy = f.fy;
  s.base_lift = u;
  s.side_lift = v;
  s.base = class_of(u);
  s.value_at_base = f.L_base;
  s.value_at_side = f.lam_side;
  return s;
}

bool usable(const Interval& v, double rel_tol) { return v.is_finite() && v.tight(rel_tol); }

}  // namespace

LengthValue length(const SurfaceContext& ctx, const PrimitiveClass& w) {
  const PrecisionPolicy& pol = ctx.policy();
  return adaptive(pol, [&](long bits) -> std::optional<LengthValue> {
    Interval L = length_from_trace(trace_enclosure(ctx, w, bits));
    if (!L.tight(pol.agreement_tolerance)) return std::nullopt;
    return LengthValue{L, bits};
  });
}

std::pair<Interval, Interval> boundary_point(const SurfaceContext& ctx,
                                             const PrimitiveClass& w) {
  const PrecisionPolicy& pol = ctx.policy();
  using Pt = std::pair<Interval, Interval>;
  return adaptive(pol, [&](long bits) -> std::optional<Pt> {
    Interval L = length_from_trace(trace_enclosure(ctx, w, bits));
    Interval px = Interval::from_si(w.p, bits) / L;
    Interval py = Interval::from_si(w.q, bits) / L;
    if (!px.tight(pol.agreement_tolerance)) return std::nullopt;
    if (w.q != 0 && !py.tight(pol.agreement_tolerance)) return std::nullopt;
    return Pt{px, py};
  });
}

SupportFunctional support_functional(const SurfaceContext& ctx, Vec2 u, Vec2 v) {
  const PrecisionPolicy& pol = ctx.policy();
  return adaptive(pol, [&](long bits) -> std::optional<SupportFunctional> {
    FnData f = functional_at(ctx, u, v, bits);
    if (!usable(f.fx, pol.agreement_tolerance) || !usable(f.fy, pol.agreement_tolerance))
      return std::nullopt;
    return pack(f, u, v);
  });
}

AtomRecord corner_atom(const SurfaceContext& ctx, const PrimitiveClass& w) {
  const PrecisionPolicy& pol = ctx.policy();
  PrimitiveClass nb = farey_neighbor(w);
  Vec2 wl = lift_of(w);
  Vec2 u = lift_of(nb);
  if (det(wl, u) == -1) u = -u;
  if (det(wl, u) != 1) raise(Errc::degenerate_basis, "farey_neighbor lift with det != 1");

  return adaptive(pol, [&](long bits) -> std::optional<AtomRecord> {
    FnData plus = functional_at(ctx, wl, u, bits);
    FnData minus = functional_at(ctx, wl, -u, bits);
    Interval atom = abs_i(angle_ccw(plus.fx, plus.fy, minus.fx, minus.fy));
    if (!atom.certainly_positive() || !atom.tight(pol.agreement_tolerance)) return std::nullopt;
    Interval half_L = div_si(plus.L_base, 2);
    Interval coth2 = sqr(coth_i(half_L));
    Interval residual = abs_i(plus.A * minus.A / coth2 - Interval::from_si(1, bits));

    AtomRecord rec;
    rec.cls = w;
    rec.atom = atom;
    rec.lambda_plus = pack(plus, wl, u);
    rec.lambda_minus = pack(minus, wl, -u);
    rec.solve = SupportSolve{exp_i(half_L), plus.x_mediant, minus.x_mediant, plus.A, minus.A};
    rec.coth_residual = residual;
    if (!atom.certainly_lt(Interval::pi(bits)))
      raise(Errc::turn_ambiguous, "corner atom enclosure reaches pi");
    return rec;
  });
}

GapRecordFull gap_turn(const SurfaceContext& ctx, const GapTable& table, const GapStub& stub) {
  const PrecisionPolicy& pol = ctx.policy();
  GapEndpoints ep = gap_endpoints(table, stub);

  return adaptive(pol, [&](long bits) -> std::optional<GapRecordFull> {
    FnData f_uv = functional_at(ctx, ep.u, ep.v, bits);
    FnData f_vu = functional_at(ctx, ep.v, ep.u, bits);
    Interval turn = angle_ccw(f_uv.fx, f_uv.fy, f_vu.fx, f_vu.fy);
    if (turn.certainly_negative())
      raise(Errc::turn_ambiguous, "gap turn wrapped past pi");
    if (!turn.certainly_positive() || !turn.tight(pol.agreement_tolerance)) return std::nullopt;
    Interval defect =
        abs_i(f_uv.lam_side - f_vu.L_base) + abs_i(f_vu.lam_side - f_uv.L_base);
    if (!defect.tight(pol.agreement_tolerance)) return std::nullopt;

    GapRecordFull rec;
    rec.u = ep.u;
    rec.v = ep.v;
    rec.mediant = class_of(ep.u + ep.v);
    rec.lam_uv = pack(f_uv, ep.u, ep.v);
    rec.lam_vu = pack(f_vu, ep.v, ep.u);
    rec.turn = turn;
    rec.endpoint_defect = defect;
    return rec;
  });
}

std::vector<AtomRecord> atoms_scan(const SurfaceContext& ctx, const GapTable& table,
                                   ExecMode mode) {
  std::vector<AtomRecord> out(table.classes.size());
  parallel_for_indexed(table.classes.size(), mode,
                       [&](std::size_t i) { out[i] = corner_atom(ctx, table.classes[i]); });
  return out;
}

std::vector<GapRecordFull> gaps_scan(const SurfaceContext& ctx, const GapTable& table,
                                     ExecMode mode) {
  std::vector<GapRecordFull> out(table.gaps.size());
  parallel_for_indexed(table.gaps.size(), mode,
                       [&](std::size_t i) { out[i] = gap_turn(ctx, table, table.gaps[i]); });
  return out;
}

TailTurn tail_turn_from(std::int64_t H, const std::vector<AtomRecord>& atoms,
                        const std::vector<GapRecordFull>& gaps) {
  long bits = 64;
  for (const auto& a : atoms) bits = std::max<long>(bits, a.atom.prec());
  Interval atom_sum = Interval::from_si(0, bits);
  for (const auto& a : atoms) atom_sum += a.atom;
  Interval turn_sum = Interval::from_si(0, bits);
  for (const auto& g : gaps) turn_sum += g.turn;

  TailTurn t;
  t.H = H;
  t.from_atoms = mul_si(Interval::pi(bits), 2) - mul_si(atom_sum, 2);
  t.from_gaps = mul_si(turn_sum, 2);
  t.discrepancy = abs_i(t.from_atoms - t.from_gaps);
  return t;
}

TailTurn tail_turn(const SurfaceContext& ctx, std::int64_t H, ExecMode mode) {
  GapTable table = enumerate_classes(H);
  auto atoms = atoms_scan(ctx, table, mode);
  auto gaps = gaps_scan(ctx, table, mode);
  return tail_turn_from(H, atoms, gaps);
}

namespace {

double seg_dist(double px, double py, double ax, double ay, double bx, double by) {
  double vx = bx - ax, vy = by - ay;
  double wx = px - ax, wy = py - ay;
  double vv = vx * vx + vy * vy;
  double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0;
  t = std::clamp(t, 0.0, 1.0);
  double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Sandwich polygon_sandwich(const SurfaceContext& ctx, std::int64_t H, ExecMode mode) {
  GapTable table = enumerate_classes(H);
  std::size_t n = table.classes.size();

  std::vector<std::pair<Interval, Interval>> pts(n);
  parallel_for_indexed(
      n, mode, [&](std::size_t i) { pts[i] = boundary_point(ctx, table.classes[i]); });
  auto gaps = gaps_scan(ctx, table, mode);

  Sandwich s;
  s.inner.vertices.reserve(2 * n);
  for (const auto& p : pts) s.inner.vertices.push_back(p);
  for (const auto& p : pts) s.inner.vertices.emplace_back(-p.first, -p.second);

  // Outer polygon: the corner points themselves plus, per gap, the apex where
  // the two one-sided support lines lambda = 1 cross.
  double hausdorff = 0;
  std::vector<std::pair<Interval, Interval>> apexes(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const auto& g = gaps[i];
    Interval D = g.lam_uv.fx * g.lam_vu.fy - g.lam_uv.fy * g.lam_vu.fx;
    Interval ax = (g.lam_vu.fy - g.lam_uv.fy) / D;
    Interval ay = (g.lam_uv.fx - g.lam_vu.fx) / D;
    apexes[i] = {ax, ay};
    const auto& pu = pts[i];
    const auto& pv = pts[(i + 1) % n];
    double sign = (i + 1 == n) ? -1.0 : 1.0;  // wrap gap ends at -pts[0]
    double d = seg_dist(ax.mid_d(), ay.mid_d(), pu.first.mid_d(), pu.second.mid_d(),
                        sign * pv.first.mid_d(), sign * pv.second.mid_d());
    hausdorff = std::max(hausdorff, d);
  }
  s.outer.vertices.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s.outer.vertices.push_back(pts[i]);
    s.outer.vertices.push_back(apexes[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.outer.vertices.emplace_back(-pts[i].first, -pts[i].second);
    s.outer.vertices.emplace_back(-apexes[i].first, -apexes[i].second);
  }
  s.hausdorff_gap = hausdorff;
  return s;
}

}  // namespace mrball
