#include "mrball/counting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace mrball {

namespace {

constexpr std::int64_t kHeightGuard = std::int64_t{1} << 60;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

mpq_class make_q(long num, long den) {
  mpq_class v(num, den);
  v.canonicalize();
  return v;
}

// Cone recursion seeds covering the projective circle: the four height-1 gaps
// plus the base classes themselves.
struct ConeSeed {
  Vec2 u, v;
};

std::array<ConeSeed, 4> base_cones() {
  return {ConeSeed{{1, 0}, {1, 1}}, ConeSeed{{1, 1}, {0, 1}}, ConeSeed{{0, 1}, {-1, 1}},
          ConeSeed{{-1, 1}, {-1, 0}}};
}

// Exact search over the class tree for traces equal to target. Prunes once
// the mediant trace exceeds the target; traces grow strictly along every
// descending ray for the modular surface (sink at the base triangle).
void exact_trace_search(const mpz_class& target, std::vector<PrimitiveClass>& hits,
                        long node_budget) {
  if (target == 3) {
    hits = {PrimitiveClass{1, 0}, PrimitiveClass{0, 1}, PrimitiveClass{1, 1}};
    std::sort(hits.begin(), hits.end(), angle_less);
    return;
  }
  if (target == 6) hits.push_back(PrimitiveClass{1, -1});
  struct Frame {
    Vec2 u, v;
    mpz_class xu, xv, zp;
  };
  // endpoint traces: the basis classes carry 3, the flipped label (1,-1)
  // carries x*y - z = 6
  std::vector<Frame> stack;
  stack.push_back({{1, 0}, {1, 1}, 3, 3, 3});
  stack.push_back({{1, 1}, {0, 1}, 3, 3, 3});
  stack.push_back({{0, 1}, {-1, 1}, 3, 6, 3});
  stack.push_back({{-1, 1}, {-1, 0}, 6, 3, 3});
  long nodes = 0;
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (++nodes > node_budget)
      raise(Errc::descent_budget_exceeded, "fiber search exceeded its node budget");
    mpz_class xm = f.xu * f.xv - f.zp;
    if (xm > target) continue;
    Vec2 m = f.u + f.v;
    if (height(m) > kHeightGuard) raise(Errc::bound_too_large, "fiber search height overflow");
    if (xm == target) hits.push_back(class_of(m));
    stack.push_back({f.u, m, f.xu, xm, f.xv});
    stack.push_back({m, f.v, xm, f.xv, f.xu});
  }
  std::sort(hits.begin(), hits.end(), angle_less);
}

// Interval variant for non-modular surfaces; collects every class whose trace
// enclosure overlaps the target enclosure.
void interval_trace_search(const SurfaceContext& ctx, const Interval& target,
                           std::vector<PrimitiveClass>& overlaps, long bits,
                           long node_budget) {
  BasisTraces basis = ctx.basis(bits);
  struct Frame {
    Vec2 u, v;
    Interval xu, xv, zp;
  };
  auto trace_of = [&](Vec2 w) { return trace_enclosure(ctx, class_of(w), bits); };
  for (Vec2 b : {Vec2{1, 0}, Vec2{0, 1}, Vec2{1, 1}, Vec2{1, -1}}) {
    if (trace_of(b).overlaps(target)) overlaps.push_back(class_of(b));
  }
  std::vector<Frame> stack;
  for (const ConeSeed& seed : base_cones()) {
    stack.push_back({seed.u, seed.v, trace_of(seed.u), trace_of(seed.v),
                     trace_of(seed.u - seed.v)});
  }
  long nodes = 0;
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (++nodes > node_budget)
      raise(Errc::descent_budget_exceeded, "level search exceeded its node budget");
    Interval xm = f.xu * f.xv - f.zp;
    Vec2 m = f.u + f.v;
    if (height(m) > kHeightGuard) raise(Errc::bound_too_large, "level search height overflow");
    // prune when certainly past the target and weakly maximal in its triangle
    bool past = target.certainly_lt(xm);
    bool maximal = !xm.certainly_lt(f.xu) && !xm.certainly_lt(f.xv);
    if (past && maximal) continue;
    if (xm.overlaps(target)) overlaps.push_back(class_of(m));
    stack.push_back({f.u, m, f.xu, xm, f.xv});
    stack.push_back({m, f.v, xm, f.xv, f.xu});
  }
  std::sort(overlaps.begin(), overlaps.end(), angle_less);
  overlaps.erase(std::unique(overlaps.begin(), overlaps.end()), overlaps.end());
}

}  // namespace

FiberRecord markoff_fiber(const SurfaceContext& ctx, const mpz_class& m, long node_budget) {
  if (!ctx.is_modular()) raise(Errc::modular_only, "markoff_fiber needs the modular surface");
  if (m < 1) raise(Errc::invalid_argument, "markoff label must be >= 1");
  FiberRecord rec;
  rec.m = m;
  mpz_class target = 3 * m;
  exact_trace_search(target, rec.classes, node_budget);
  if (rec.classes.empty())
    raise(Errc::not_markoff, m.get_str() + " is not a Markoff number within the search bound");
  rec.size = rec.classes.size();
  rec.length = length(ctx, rec.classes.front());
  if (m >= 2) {
    double ll = std::log(std::log(3.0 * m.get_d()));
    rec.bound_ratio = static_cast<double>(rec.size) / (ll * ll);
  }
  return rec;
}

MultiplicityResult multiplicity(const SurfaceContext& ctx, const PrimitiveClass& target,
                                bool strict, long node_budget) {
  MultiplicityResult res;
  res.target = target;
  if (ctx.is_modular()) {
    mpz_class t = *trace(ctx, target).exact;
    exact_trace_search(t, res.witnesses, node_budget);
    return res;
  }
  const PrecisionPolicy& pol = ctx.policy();
  long bits = pol.max_bits;
  Interval t = trace_enclosure(ctx, target, bits);
  std::vector<PrimitiveClass> overlaps;
  interval_trace_search(ctx, t, overlaps, bits, node_budget);
  res.witnesses = std::move(overlaps);
  res.undecided = res.witnesses.size() > 1;
  if (strict && res.undecided)
    raise(Errc::equality_undecidable,
          "length-level equality undecidable at max_bits for cluster of size " +
              std::to_string(res.witnesses.size()));
  return res;
}

namespace {

// angle(v)/pi as an exact rational for the compass directions, else nullopt.
std::optional<mpq_class> compass_angle(Vec2 v) {
  auto q = [](int num, int den) { return make_q(num, den); };
  if (v.y == 0) return v.x > 0 ? q(0, 1) : q(1, 1);
  if (v.x == 0) return v.y > 0 ? q(1, 2) : q(-1, 2);
  if (v.x == v.y) return v.x > 0 ? q(1, 4) : q(-3, 4);
  if (v.x == -v.y) return v.x > 0 ? q(-1, 4) : q(3, 4);
  return std::nullopt;
}

bool sector_contains(Vec2 v, const SectorQuery& q) {
  // membership: angle(v)/pi + 2k in [lo, hi] for some integer k
  double lo_d = q.lo_pi.get_d(), hi_d = q.hi_pi.get_d();
  long k_lo = static_cast<long>(std::floor((lo_d - 1.0) / 2.0)) - 1;
  long k_hi = static_cast<long>(std::ceil((hi_d + 1.0) / 2.0)) + 1;

  if (auto t = compass_angle(v)) {
    for (long k = k_lo; k <= k_hi; ++k) {
      mpq_class shifted = *t + 2 * k;
      if (shifted >= q.lo_pi && shifted <= q.hi_pi) return true;
    }
    return false;
  }
  for (long bits = 128; bits <= (1L << 14); bits *= 2) {
    Interval t = atan2_i(Interval::from_si(v.y, bits), Interval::from_si(v.x, bits)) /
                 Interval::pi(bits);
    Interval lo = Interval::from_mpq(q.lo_pi, bits);
    Interval hi = Interval::from_mpq(q.hi_pi, bits);
    bool undecided = false;
    for (long k = k_lo; k <= k_hi; ++k) {
      Interval shifted = add_si(t, 2 * k);
      bool cert_in = lo.certainly_le(shifted) && shifted.certainly_le(hi);
      if (cert_in) return true;
      bool cert_out = shifted.certainly_lt(lo) || hi.certainly_lt(shifted);
      if (!cert_out) undecided = true;
    }
    if (!undecided) return false;
  }
  // non-compass lattice angles are irrational multiples of pi, so the bound
  // comparisons always resolve; reaching here means malformed input
  raise(Errc::precision_exhausted, "sector membership undecided at precision cap");
}

}  // namespace

long sector_direction_count(const SectorQuery& q) {
  if (q.hi_pi < q.lo_pi || q.hi_pi - q.lo_pi > 2)
    raise(Errc::invalid_argument, "sector interval must satisfy 0 <= hi - lo <= 2pi");
  if (q.r < 1) raise(Errc::invalid_argument, "sector radius must be >= 1");
  mpq_class r2 = q.r * q.r;
  long R = static_cast<long>(std::ceil(q.r.get_d()));
  long count = 0;
  for (long x = -R; x <= R; ++x) {
    for (long y = -R; y <= R; ++y) {
      if (x == 0 && y == 0) continue;
      if (std::gcd(std::labs(x), std::labs(y)) != 1) continue;
      if (mpq_class(x * x + y * y) > r2) continue;
      if (sector_contains({x, y}, q)) ++count;
    }
  }
  return count;
}

SectorScanResult sector_bound_scan(int samples, long rmax, std::uint64_t seed, ExecMode mode) {
  SectorScanResult res;
  res.rows.resize(samples);
  parallel_for_indexed(samples, mode, [&](std::size_t i) {
    std::uint64_t s = splitmix64(seed + i);
    auto draw = [&s]() {
      s = splitmix64(s);
      return s >> 44;  // 20 bits
    };
    SectorQuery q;
    q.lo_pi = make_q(static_cast<long>(draw()), 1 << 19);  // [0, 2)
    q.hi_pi = q.lo_pi + make_q(static_cast<long>(draw()), 1 << 19);
    if (q.hi_pi - q.lo_pi > 2) q.hi_pi = q.lo_pi + 2;
    q.r = 1 + make_q(static_cast<long>(draw()) % (512 * (rmax - 1)), 512);
    SectorScanRow row;
    row.query = q;
    row.count = sector_direction_count(q);
    // certified count <= theta r^2 + 4
    if (q.hi_pi == q.lo_pi) {
      row.within_bound = row.count <= 4;
    } else {
      for (long bits = 128; bits <= (1L << 14); bits *= 2) {
        Interval bound = Interval::from_mpq(q.hi_pi - q.lo_pi, bits) * Interval::pi(bits) *
                             Interval::from_mpq(q.r * q.r, bits) +
                         Interval::from_si(4, bits);
        Interval c = Interval::from_si(row.count, bits);
        if (c.certainly_le(bound)) {
          row.within_bound = true;
          break;
        }
        if (bound.certainly_lt(c)) {
          row.within_bound = false;
          break;
        }
      }
    }
    res.rows[i] = row;
  });
  for (const auto& row : res.rows) res.all_within = res.all_within && row.within_bound;
  return res;
}

namespace {

// Gap index of a class strictly inside some gap of the table; nullopt when
// the class is one of the table's endpoints.
std::optional<std::uint32_t> locate_gap(const GapTable& table, const PrimitiveClass& c) {
  const auto& cls = table.classes;
  auto it = std::lower_bound(cls.begin(), cls.end(), c, angle_less);
  if (it != cls.end() && *it == c) return std::nullopt;
  std::uint32_t idx = static_cast<std::uint32_t>(it - cls.begin());
  return (idx + static_cast<std::uint32_t>(cls.size()) - 1) %
         static_cast<std::uint32_t>(cls.size());
}

ActiveGapReport active_gaps_for(const SurfaceContext& ctx, std::int64_t H,
                                const std::vector<PrimitiveClass>& level,
                                const std::string& label) {
  (void)ctx;
  GapTable table = enumerate_classes(H);
  std::set<std::uint32_t> ids;
  for (const auto& c : level) {
    if (auto gap = locate_gap(table, c)) ids.insert(*gap);
  }
  ActiveGapReport rep;
  rep.H = H;
  rep.label = label;
  rep.gap_ids.assign(ids.begin(), ids.end());
  rep.active_count = static_cast<long>(rep.gap_ids.size());
  return rep;
}

}  // namespace

ActiveGapReport active_gaps(const SurfaceContext& ctx, std::int64_t H, const mpz_class& m) {
  FiberRecord fiber = markoff_fiber(ctx, m);
  return active_gaps_for(ctx, H, fiber.classes, "m=" + m.get_str());
}

ActiveGapReport active_gaps(const SurfaceContext& ctx, std::int64_t H,
                            const PrimitiveClass& target) {
  MultiplicityResult mult = multiplicity(ctx, target);
  return active_gaps_for(ctx, H, mult.witnesses,
                         "class=(" + std::to_string(target.p) + "," + std::to_string(target.q) +
                             ")");
}

LevelScan boundary_lattice_scan(const SurfaceContext& ctx, std::int64_t height_bound,
                                ExecMode mode) {
  GapTable table = enumerate_classes(height_bound);
  const auto& cls = table.classes;
  LevelScan scan;
  scan.height_bound = height_bound;

  if (ctx.is_modular()) {
    std::vector<mpz_class> traces(cls.size());
    parallel_for_indexed(cls.size(), mode,
                         [&](std::size_t i) { traces[i] = *trace(ctx, cls[i]).exact; });
    std::map<mpz_class, LevelGroup> groups;
    for (std::size_t i = 0; i < cls.size(); ++i) {
      LevelGroup& g = groups[traces[i]];
      g.members.push_back(cls[i]);
      g.m = traces[i] / 3;
    }
    for (auto& [t, g] : groups) {
      g.length = length_from_trace(Interval::from_mpz(t, 128));
      scan.groups.push_back(std::move(g));
    }
  } else {
    const PrecisionPolicy& pol = ctx.policy();
    std::vector<Interval> traces(cls.size());
    parallel_for_indexed(cls.size(), mode, [&](std::size_t i) {
      traces[i] = trace_enclosure(ctx, cls[i], pol.base_bits);
    });
    std::vector<std::size_t> order(cls.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return mpfr_cmp(traces[a].lo(), traces[b].lo()) < 0;
    });
    // overlap chains along the sorted order; refine members until disjoint or
    // max_bits is reached
    std::size_t i = 0;
    while (i < order.size()) {
      std::vector<std::size_t> chain{order[i]};
      Interval reach = traces[order[i]];
      std::size_t j = i + 1;
      while (j < order.size() && traces[order[j]].overlaps(reach)) {
        reach = hull(reach, traces[order[j]]);
        chain.push_back(order[j]);
        ++j;
      }
      if (chain.size() > 1) {
        for (long bits = pol.base_bits * 2; bits <= pol.max_bits; bits *= 2) {
          bool any_overlap = false;
          for (std::size_t c : chain) traces[c] = trace_enclosure(ctx, cls[c], bits);
          std::sort(chain.begin(), chain.end(), [&](std::size_t a, std::size_t b) {
            return mpfr_cmp(traces[a].lo(), traces[b].lo()) < 0;
          });
          for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            if (traces[chain[k]].overlaps(traces[chain[k + 1]])) any_overlap = true;
          }
          if (!any_overlap) break;
        }
      }
      // emit sub-groups from the refined chain
      std::size_t k = 0;
      while (k < chain.size()) {
        LevelGroup g;
        g.members.push_back(cls[chain[k]]);
        Interval reach2 = traces[chain[k]];
        std::size_t l = k + 1;
        while (l < chain.size() && traces[chain[l]].overlaps(reach2)) {
          reach2 = hull(reach2, traces[chain[l]]);
          g.members.push_back(cls[chain[l]]);
          ++l;
        }
        g.undecided = g.members.size() > 1;
        g.length = length_from_trace(reach2);
        std::sort(g.members.begin(), g.members.end(), angle_less);
        scan.groups.push_back(std::move(g));
        k = l;
      }
      i = j;
    }
    std::sort(scan.groups.begin(), scan.groups.end(), [](const LevelGroup& a, const LevelGroup& b) {
      return mpfr_cmp(a.length.lo(), b.length.lo()) < 0;
    });
  }

  std::map<long, long> hist;
  for (const auto& g : scan.groups) {
    long sz = static_cast<long>(g.members.size());
    if (g.undecided) {
      scan.max_undecided_cluster = std::max(scan.max_undecided_cluster, sz);
    } else {
      hist[sz]++;
      scan.max_multiplicity = std::max(scan.max_multiplicity, sz);
    }
  }
  scan.histogram.assign(hist.begin(), hist.end());
  return scan;
}

JarnikReport jarnik_arc_check(const SurfaceContext& ctx, const mpz_class& m, std::int64_t H,
                              ExecMode mode) {
  FiberRecord fiber = markoff_fiber(ctx, m);
  GapTable table = enumerate_classes(H);
  auto gaps = gaps_scan(ctx, table, mode);

  JarnikReport rep;
  rep.m = m;
  rep.H = H;
  rep.R = fiber.length.value;
  rep.total_unoriented = static_cast<long>(fiber.size);

  std::map<std::uint32_t, long> per_gap;
  for (const auto& c : fiber.classes) {
    if (auto gap = locate_gap(table, c)) {
      per_gap[*gap]++;
    } else {
      rep.at_grid++;
    }
  }

  for (const auto& [gap_id, count] : per_gap) {
    const GapRecordFull& g = gaps[gap_id];
    long bits = g.turn.prec();
    Interval Lu = g.lam_vu.value_at_base;  // |v|
    Interval pu_x = Interval::from_si(g.u.x, bits) / g.lam_uv.value_at_base;
    Interval pu_y = Interval::from_si(g.u.y, bits) / g.lam_uv.value_at_base;
    Interval pv_x = Interval::from_si(g.v.x, bits) / Lu;
    Interval pv_y = Interval::from_si(g.v.y, bits) / Lu;
    Interval D = g.lam_uv.fx * g.lam_vu.fy - g.lam_uv.fy * g.lam_vu.fx;
    Interval ax = (g.lam_vu.fy - g.lam_uv.fy) / D;
    Interval ay = (g.lam_uv.fx - g.lam_vu.fx) / D;
    Interval chord = sqrt_i(sqr(pu_x - pv_x) + sqr(pu_y - pv_y));
    Interval tangent = sqrt_i(sqr(pu_x - ax) + sqr(pu_y - ay)) +
                       sqrt_i(sqr(ax - pv_x) + sqr(ay - pv_y));

    JarnikArcRow row;
    row.gap_id = gap_id;
    row.count = count;
    row.chord_len = (rep.R * chord).lo_d();
    row.tangent_len = (rep.R * tangent).hi_d();
    row.turn = g.turn.lo_d();
    row.bound =
        kJarnikConstant * (std::pow(row.chord_len, 2.0 / 3.0) * std::cbrt(row.turn) + 1.0);
    row.within = static_cast<double>(count) <= row.bound;
    rep.max_ratio = std::max(rep.max_ratio, static_cast<double>(count) / row.bound);
    rep.all_within = rep.all_within && row.within;
    rep.arcs.push_back(row);
  }
  return rep;
}

}  // namespace mrball
