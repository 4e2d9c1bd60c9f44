#include "mrball/flatness.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <map>
#include <optional>

namespace mrball {

void ContinuedFraction::rebuild_convergents() {
  convergents.clear();
  mpz_class pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
  mpz_class p0 = a0, q0 = 1;
  convergents.emplace_back(p0, q0);
  for (const mpz_class& a : quotients) {
    mpz_class p = a * p0 + pm1;
    mpz_class q = a * q0 + qm1;
    pm1 = p0;
    qm1 = q0;
    p0 = p;
    q0 = q;
    convergents.emplace_back(p0, q0);
  }
}

ContinuedFraction cf_of_rational(const mpz_class& p_in, const mpz_class& q_in) {
  if (q_in < 1) raise(Errc::invalid_argument, "cf_of_rational needs q >= 1");
  if (gcd(p_in, q_in) != 1) raise(Errc::invalid_argument, "cf_of_rational needs gcd(p,q) = 1");
  if (p_in < 0) raise(Errc::invalid_argument, "cf_of_rational needs p >= 0");
  ContinuedFraction cf;
  mpz_class a = p_in, b = q_in;
  cf.a0 = a / b;
  mpz_class r = a - cf.a0 * b;
  a = b;
  b = r;
  while (b != 0) {
    mpz_class quo = a / b;
    cf.quotients.push_back(quo);
    r = a - quo * b;
    a = b;
    b = r;
  }
  // canonical form: last quotient >= 2 (or the bare integer part)
  if (!cf.quotients.empty() && cf.quotients.back() == 1) {
    cf.quotients.pop_back();
    if (cf.quotients.empty()) {
      cf.a0 += 1;
    } else {
      cf.quotients.back() += 1;
    }
  }
  cf.rebuild_convergents();
  return cf;
}

DirectionTarget DirectionTarget::rational(const mpz_class& p, const mpz_class& q) {
  DirectionTarget t;
  t.kind = Kind::rational;
  t.cf = cf_of_rational(p, q);
  t.slope_lo = mpq_class(p, q);
  t.slope_lo.canonicalize();
  t.slope_hi = t.slope_lo;
  return t;
}

DirectionTarget DirectionTarget::from_prefix(ContinuedFraction cf, Kind kind) {
  if (cf.convergents.empty()) cf.rebuild_convergents();
  DirectionTarget t;
  t.kind = kind;
  t.cf = std::move(cf);
  std::size_t k = t.cf.depth();
  // irrationals with this prefix lie strictly between the last convergent and
  // the adjacent mediant
  mpq_class end1(t.cf.p(k), t.cf.q(k));
  end1.canonicalize();
  mpq_class end2(t.cf.p(k) + (k >= 1 ? t.cf.p(k - 1) : mpz_class(1)),
                 t.cf.q(k) + (k >= 1 ? t.cf.q(k - 1) : mpz_class(0)));
  end2.canonicalize();
  t.slope_lo = std::min(end1, end2);
  t.slope_hi = std::max(end1, end2);
  return t;
}

DirectionTarget DirectionTarget::golden(int depth) {
  ContinuedFraction cf;
  cf.a0 = 0;
  cf.quotients.assign(static_cast<std::size_t>(depth), mpz_class(1));
  cf.rebuild_convergents();
  return from_prefix(std::move(cf));
}

DirectionTarget DirectionTarget::silver(int depth) {
  ContinuedFraction cf;
  cf.a0 = 0;
  cf.quotients.assign(static_cast<std::size_t>(depth), mpz_class(2));
  cf.rebuild_convergents();
  return from_prefix(std::move(cf));
}

namespace {

mpz_class cdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

}  // namespace

NonflatConstruction construct_nonflat(const std::string& amp_decimal, int levels,
                                      const ContinuedFraction& prefix, long bit_budget) {
  if (levels < 1) raise(Errc::invalid_argument, "construct_nonflat needs levels >= 1");
  bool escalating = amp_decimal == "inf";
  NonflatConstruction out;
  out.cf = prefix;
  if (out.cf.convergents.empty()) out.cf.rebuild_convergents();
  if (out.cf.depth() < 1)
    raise(Errc::invalid_argument, "construct_nonflat needs a prefix with at least one quotient");

  for (int step = 0; step < levels; ++step) {
    std::size_t j = out.cf.depth();  // extending from level j to j+1
    const mpz_class& s = out.cf.q(j);
    const mpz_class& s_prev = out.cf.q(j - 1);

    // exponent A_eff * s_j, as an interval
    long probe_bits = 128;
    Interval amp = escalating ? Interval::from_si(static_cast<long>(j), probe_bits)
                              : Interval::from_decimal(amp_decimal, probe_bits);
    Interval expo_probe = amp * Interval::from_mpz(s, probe_bits);
    double expo_d = expo_probe.hi_d();
    double need_bits = expo_d * 1.4427 + 96;
    if (!(need_bits < static_cast<double>(bit_budget)))
      raise(Errc::overflow_budget,
            "e^{A s_j} needs about " + std::to_string(static_cast<long long>(need_bits)) +
                " bits, over the budget");

    long bits = std::max<long>(256, static_cast<long>(need_bits));
    mpz_class b;
    for (;; bits *= 2) {
      Interval A = escalating ? Interval::from_si(static_cast<long>(j), bits)
                              : Interval::from_decimal(amp_decimal, bits);
      Interval E = exp_i(A * Interval::from_mpz(s, bits));
      // b = ceil((E - s_prev)/s); E is irrational, so this pins down at some
      // finite precision
      mpz_class e_lo, e_hi;
      mpfr_get_z(e_lo.get_mpz_t(), E.lo(), MPFR_RNDU);
      mpfr_get_z(e_hi.get_mpz_t(), E.hi(), MPFR_RNDU);
      mpz_class b_lo = cdiv(e_lo - s_prev, s);
      mpz_class b_hi = cdiv(e_hi - s_prev, s);
      if (b_lo == b_hi) {
        b = b_lo;
        break;
      }
      if (bits > 4 * bit_budget)
        raise(Errc::overflow_budget, "quotient certification exceeded the bit budget");
    }
    if (b < 1) b = 1;
    out.cf.quotients.push_back(b);
    out.cf.rebuild_convergents();

    // certificate: s_new >= e^{A s_j}, by exact integer comparison
    NonflatLevelCert cert;
    cert.level = static_cast<int>(j + 1);
    cert.quotient = b;
    cert.s_prev = s;
    cert.s_new = out.cf.q(j + 1);
    cert.target_exponent = escalating ? static_cast<double>(j) * s.get_d()
                                      : expo_probe.hi_d();
    {
      Interval A = escalating ? Interval::from_si(static_cast<long>(j), bits)
                              : Interval::from_decimal(amp_decimal, bits);
      Interval E = exp_i(A * Interval::from_mpz(s, bits));
      if (mpfr_cmp_z(E.hi(), cert.s_new.get_mpz_t()) > 0)
        raise(Errc::overflow_budget, "nonflat level certificate failed");
    }
    out.certs.push_back(cert);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Length-space ladder along the convergents of a direction.
//
// Traces of deep constructed convergents overflow every floating-point
// exponent range, but their lengths stay representable. Along the ray
// n*u + v the trace solves x_n = A r^n + B r^{-n} with r = e^{|u|/2}, so
// lengths and the fan coefficient log A propagate level to level with
// certified correction terms.
// ---------------------------------------------------------------------------

namespace {

// log of the trace 2*cosh(L/2) from the length L
Interval lx_of_len(const Interval& L, long bits) {
  (void)bits;
  return div_si(L, 2) + log1p_i(exp_i(-L));
}

// length from the log-trace: 2*acosh(x/2) = 2*log(x) + 2*log((1+sqrt(1-4/x^2))/2)
Interval len_of_lx(const Interval& lx) {
  Interval two_lx = mul_si(lx, 2);
  if (two_lx.certainly_gt_si(8)) {
    // correction in [-8 e^{-2 lx}, 0]
    Interval eps = exp_i(-two_lx);
    Interval zero = Interval::from_si(0, lx.prec());
    return two_lx - mul_si(hull(zero, eps), 8);
  }
  Interval x = exp_i(lx);
  return length_from_trace(x);
}

// log(e^p + e^q), stable for any magnitudes
Interval logsumexp(const Interval& p, const Interval& q) {
  Interval m = max_i(p, q);
  return m + log1p_i(exp_i(-abs_i(p - q)));
}

// B = x_0 - A, tracked in log scale with a certified sign so the ray-tail
// correction tightens with precision. The cancellation-free route uses the
// ray at n = -1: x_{u-v} = A e^{-a} + B e^{a}, with x_{u-v} itself obtained
// from the Fricke product identity x_{u+v} x_{u-v} = x_u^2 + x_v^2.
struct SignedLog {
  int sign = 0;      // +1, -1, or 0 when the sign is unresolved
  Interval log_mag;  // log |B|; an upper bound when sign == 0
};

struct RayCoeff {
  Interval logA;
  SignedLog logB;
  Interval lx0;  // log-trace at n = 0
  Interval a;    // |u|/2
};

// Fan coefficient data for the ray n*u + v, from |u| and the log-traces of
// u, v and u+v.
RayCoeff ray_coeff(const Interval& L_u, const Interval& lx0, const Interval& lx1) {
  RayCoeff rc;
  rc.a = div_si(L_u, 2);
  rc.lx0 = lx0;
  Interval denom_log = rc.a + log1p_i(-exp_i(-L_u));  // log(e^a - e^{-a})
  Interval E0 = exp_i(lx0 - rc.a - lx1);              // x_0 e^{-a} / x_1
  if (!E0.certainly_lt(Interval::from_si(1, E0.prec())))
    raise(Errc::precision_exhausted, "fan numerator positivity unresolved");
  rc.logA = lx1 + log1p_i(-E0) - denom_log;

  Interval lx_u = lx_of_len(L_u, L_u.prec());
  Interval lx_diff = logsumexp(mul_si(lx_u, 2), mul_si(lx0, 2)) - lx1;  // log x_{u-v}
  Interval ratio = exp_i(rc.logA - rc.a - lx_diff);  // (A e^{-a}) / x_{u-v}
  Interval one = Interval::from_si(1, ratio.prec());
  if (ratio.certainly_lt(one)) {
    rc.logB.sign = +1;
    rc.logB.log_mag = lx_diff + log1p_i(-ratio) - rc.a;
  } else if (one.certainly_lt(ratio)) {
    rc.logB.sign = -1;
    rc.logB.log_mag = rc.logA - rc.a + log1p_i(-exp_i(lx_diff - (rc.logA - rc.a))) - rc.a;
  } else {
    rc.logB.sign = 0;
    rc.logB.log_mag = logsumexp(lx_diff, rc.logA - rc.a) - rc.a;
  }
  return rc;
}

// log-trace along the ray at index n: log(A r^n + B r^{-n}).
Interval ray_lx_at(const RayCoeff& rc, const mpz_class& n, long bits) {
  Interval ni = Interval::from_mpz(n, bits);
  Interval main = ni * rc.a + rc.logA;
  // tail log1p(t), t = (B/A) e^{-2na}
  Interval t_log = rc.logB.log_mag - rc.logA - mul_si(ni * rc.a, 2);
  Interval t_mag = exp_i(t_log);
  if (t_mag.certainly_le_d(0.25)) {
    Interval corr;
    if (rc.logB.sign > 0) {
      corr = log1p_i(t_mag);
    } else if (rc.logB.sign < 0) {
      corr = log1p_i(-t_mag);
    } else {
      corr = hull(log1p_i(-t_mag), log1p_i(t_mag));
    }
    return main + corr;
  }
  // early-ladder regime: everything representable, use the closed form with
  // the signed B = x_0 - A directly
  if (!(ni * rc.a).certainly_lt_si(1L << 40))
    raise(Errc::precision_exhausted, "ray tail not separable at this precision");
  Interval A = exp_i(rc.logA);
  Interval B = exp_i(rc.lx0) - A;
  Interval ena = exp_i(ni * rc.a);
  Interval x = A * ena + B / ena;
  if (!x.certainly_gt_si(2))
    raise(Errc::precision_exhausted, "ray trace enclosure not above 2");
  return log_i(x);
}

struct LadderLevel {
  ZVec w;        // (q_j, p_j)
  Interval L;    // |w_j|
  Interval lxS;  // log-trace of w_j + w_{j-1}
};

struct Ladder {
  long bits = 0;
  Interval L_base;              // |w_{-1}| = |(0,1)|
  std::vector<LadderLevel> lv;  // levels 0..K
};

ZVec zvec_of_convergent(const ContinuedFraction& cf, std::size_t j) {
  return ZVec{cf.q(j), cf.p(j)};
}

Ladder build_ladder(const SurfaceContext& ctx, const ContinuedFraction& cf,
                    std::size_t max_level, long bits) {
  Ladder lad;
  lad.bits = bits;
  BasisTraces basis = ctx.basis(bits);
  Interval L10 = length_from_trace(basis.x);   // |(1,0)|
  Interval L01 = length_from_trace(basis.y);   // |(0,1)|
  Interval L11 = length_from_trace(basis.z);   // |(1,1)|
  lad.L_base = L01;

  LadderLevel l0;
  l0.w = zvec_of_convergent(cf, 0);
  if (cf.a0 == 0) {
    l0.L = L10;
    l0.lxS = lx_of_len(L11, bits);
  } else {
    // ray n*(0,1) + (1,0): x_0 = x_{(1,0)}, x_1 = x_{(1,1)}
    RayCoeff rc = ray_coeff(L01, lx_of_len(L10, bits), lx_of_len(L11, bits));
    l0.L = len_of_lx(ray_lx_at(rc, cf.a0, bits));
    l0.lxS = ray_lx_at(rc, cf.a0 + 1, bits);
  }
  lad.lv.push_back(std::move(l0));

  for (std::size_t j = 0; j + 1 <= max_level && j < cf.depth(); ++j) {
    const LadderLevel& cur = lad.lv[j];
    const Interval& L_prev = j == 0 ? lad.L_base : lad.lv[j - 1].L;
    RayCoeff rc = ray_coeff(cur.L, lx_of_len(L_prev, bits), cur.lxS);
    const mpz_class& n = cf.quotients[j];
    LadderLevel next;
    next.w = zvec_of_convergent(cf, j + 1);
    next.L = len_of_lx(ray_lx_at(rc, n, bits));
    next.lxS = ray_lx_at(rc, n + 1, bits);
    if (getenv("MRBALL_DEBUG2"))
      std::fprintf(stderr, "  ladder[%zu->%zu] bits=%ld L rw=%.2e lxS rw=%.2e logA rw=%.2e\n",
                   j, j + 1, bits, next.L.rel_width(), next.lxS.rel_width(),
                   rc.logA.rel_width());
    lad.lv.push_back(std::move(next));
  }
  return lad;
}

mpz_class zdet(const ZVec& a, const ZVec& b) { return a.x * b.y - a.y * b.x; }

struct ReferenceLine {
  Interval fx, fy;     // lambda-sharp coordinates
  Interval norm;       // |lambda-sharp|
  Interval tx, ty;     // unit tangent
  Interval prx, pry;   // reference tangency point
  ZVec u, v;           // basis (w_R, w_{R-1})
  Interval lam_u, lam_v;
  mpz_class d;         // det(u, v)
};

// One-sided supporting functional at the convergent w_R, selected toward
// beta (the w_{R-1} side).
ReferenceLine reference_line(const Ladder& lad, std::size_t R, long bits) {
  ReferenceLine ref;
  const LadderLevel& top = lad.lv[R];
  const Interval& L_prev = R == 0 ? lad.L_base : lad.lv[R - 1].L;
  RayCoeff rc = ray_coeff(top.L, lx_of_len(L_prev, bits), top.lxS);
  ref.u = top.w;
  ref.v = R == 0 ? ZVec{0, 1} : lad.lv[R - 1].w;
  ref.lam_u = top.L;
  ref.lam_v = mul_si(rc.logA, 2);
  ref.d = zdet(ref.u, ref.v);
  if (ref.d != 1 && ref.d != -1)
    raise(Errc::degenerate_basis, "convergent pair with |det| != 1");
  long dsign = ref.d == 1 ? 1 : -1;
  Interval ux = Interval::from_mpz(ref.u.x, bits), uy = Interval::from_mpz(ref.u.y, bits);
  Interval vx = Interval::from_mpz(ref.v.x, bits), vy = Interval::from_mpz(ref.v.y, bits);
  ref.fx = div_si(ref.lam_u * vy - ref.lam_v * uy, dsign);
  ref.fy = div_si(ref.lam_v * ux - ref.lam_u * vx, dsign);
  ref.norm = sqrt_i(sqr(ref.fx) + sqr(ref.fy));
  Interval nx = ref.fx / ref.norm, ny = ref.fy / ref.norm;
  ref.tx = -ny;
  ref.ty = nx;
  ref.prx = ux / top.L;
  ref.pry = uy / top.L;
  return ref;
}

Interval eval_lambda(const ReferenceLine& ref, const ZVec& y, long bits) {
  // y = alpha u + beta v exactly; lambda(y) = alpha lam_u + beta lam_v
  mpz_class alpha = zdet(y, ref.v) / ref.d;
  mpz_class beta = zdet(ref.u, y) / ref.d;
  return Interval::from_mpz(alpha, bits) * ref.lam_u +
         Interval::from_mpz(beta, bits) * ref.lam_v;
}

}  // namespace

FlatnessProfile flatness_profile(const SurfaceContext& ctx, const DirectionTarget& beta,
                                 int depth) {
  if (beta.kind == DirectionTarget::Kind::rational)
    raise(Errc::rational_target, "flatness profile needs an irrational direction");
  if (depth < 1) raise(Errc::invalid_argument, "depth must be >= 1");
  const ContinuedFraction& cf = beta.cf;
  std::size_t deepest = cf.depth();
  if (static_cast<std::size_t>(depth) + 1 > deepest)
    raise(Errc::invalid_argument,
          "direction prefix too shallow: profile depth needs quotients past depth+1");

  std::size_t ref_level = std::min<std::size_t>(deepest, depth + 20);
  std::size_t alt_level = std::min<std::size_t>(deepest, depth + 10);

  const PrecisionPolicy& pol = ctx.policy();
  FlatnessProfile out;
  out.reference_level = static_cast<int>(ref_level);
  out.stability_checked = alt_level > static_cast<std::size_t>(depth) + 1 && alt_level < ref_level;

  std::map<long, Ladder> ladders;
  auto ladder_at = [&](long bits) -> const Ladder& {
    auto it = ladders.find(bits);
    if (it == ladders.end()) {
      it = ladders.emplace(bits, build_ladder(ctx, cf, ref_level, bits)).first;
    }
    return it->second;
  };

  struct ProbeEval {
    Interval x, f;
  };
  auto eval_probe = [&](const Ladder& lad, std::size_t ref_lv, std::size_t j, const ZVec& y,
                        const mpz_class& n, long bits) -> ProbeEval {
    ReferenceLine ref = reference_line(lad, ref_lv, bits);
    // probe length via the ray n*w_j - w_{j-1}
    const LadderLevel& cur = lad.lv[j];
    const Interval& L_prev = j == 0 ? lad.L_base : lad.lv[j - 1].L;
    Interval lx_u = lx_of_len(cur.L, bits);
    Interval lx_v = lx_of_len(L_prev, bits);
    // log-trace of w_j - w_{j-1} from the product identity
    Interval lx_diff = logsumexp(mul_si(lx_u, 2), mul_si(lx_v, 2)) - cur.lxS;
    RayCoeff rc = ray_coeff(cur.L, lx_v, lx_diff);
    Interval L_y = len_of_lx(ray_lx_at(rc, n, bits));

    Interval yx = Interval::from_mpz(y.x, bits), yy = Interval::from_mpz(y.y, bits);
    Interval lam_y = eval_lambda(ref, y, bits);
    if (getenv("MRBALL_DEBUG"))
      std::fprintf(stderr,
                   "   [probe j=%zu bits=%ld] L_y rw=%.2e lam_y rw=%.2e norm rw=%.2e lamu "
                   "rw=%.2e lamv rw=%.2e\n",
                   j, bits, L_y.rel_width(), lam_y.rel_width(), ref.norm.rel_width(),
                   ref.lam_u.rel_width(), ref.lam_v.rel_width());
    ProbeEval pe;
    pe.f = (Interval::from_si(1, bits) - lam_y / L_y) / ref.norm;
    Interval px = yx / L_y, py = yy / L_y;
    pe.x = (px - ref.prx) * ref.tx + (py - ref.pry) * ref.ty;
    return pe;
  };

  for (int j = 1; j <= depth; ++j) {
    // probe class: (m+1) w_j - w_{j-1}, roughly 1.5x the convergent's
    // projective distance from beta, on the far side
    mpz_class m = cdiv(2 * cf.q(j + 1), cf.q(j));
    mpz_class n = m + 1;
    ZVec wj = zvec_of_convergent(cf, j);
    ZVec wp = j >= 1 ? zvec_of_convergent(cf, j - 1) : ZVec{0, 1};
    ZVec y{n * wj.x - wp.x, n * wj.y - wp.y};

    ProfileRow row;
    row.j = j;
    row.probe = y;
    bool done = false;
    for (long bits = pol.base_bits; bits <= pol.max_bits; bits *= 2) {
      try {
        const Ladder& lad = ladder_at(bits);
        ProbeEval pe = eval_probe(lad, ref_level, j, y, n, bits);
        Interval ax = abs_i(pe.x);
        if (getenv("MRBALL_DEBUG"))
          std::fprintf(stderr,
                       "j=%d bits=%ld f=[%.3e,%.3e] x=[%.3e,%.3e] fpos=%d xpos=%d flt1=%d "
                       "xlt1=%d ftight=%d xtight=%d frel=%.2e xrel=%.2e\n",
                       j, bits, pe.f.lo_d(), pe.f.hi_d(), pe.x.lo_d(), pe.x.hi_d(),
                       (int)pe.f.certainly_positive(), (int)ax.certainly_positive(),
                       (int)pe.f.certainly_lt_si(1), (int)ax.certainly_lt_si(1),
                       (int)pe.f.tight(1e-9), (int)ax.tight(1e-9), pe.f.rel_width(),
                       ax.rel_width());
        if (!pe.f.certainly_positive() || !ax.certainly_positive()) continue;
        if (!pe.f.certainly_lt_si(1) || !ax.certainly_lt_si(1)) continue;
        if (!pe.f.tight(1e-9) || !ax.tight(1e-9)) continue;
        if (out.stability_checked) {
          ProbeEval alt = eval_probe(lad, alt_level, j, y, n, bits);
          Interval rel = abs_i(alt.f - pe.f) / pe.f;
          if (!rel.certainly_le(Interval::from_d(1e-6, bits)))
            raise(Errc::support_unstable,
                  "reference support line unstable at level " + std::to_string(j));
        }
        row.x = pe.x;
        row.f = pe.f;
        row.order = log_i(pe.f) / log_i(ax);
        done = true;
        break;
      } catch (const Error& e) {
        if (getenv("MRBALL_DEBUG"))
          std::fprintf(stderr, "j=%d bits=%ld error: %s\n", j, bits, e.what());
        if (e.code() != Errc::precision_exhausted) throw;
      }
    }
    if (!done)
      raise(Errc::precision_exhausted, "profile row " + std::to_string(j) +
                                           " not certified within max_bits");
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

// acute angle distance between the line of w = (q, p) and the direction beta
Interval line_distance(const mpz_class& p, const mpz_class& q, const Interval& beta_angle,
                       long bits) {
  Interval theta = atan2_i(Interval::from_mpz(p, bits), Interval::from_mpz(q, bits));
  Interval pi = Interval::pi(bits);
  Interval best = abs_i(theta - beta_angle);
  for (int k : {-1, 1}) {
    best = min_i(best, abs_i(theta - beta_angle + mul_si(pi, k)));
  }
  return best;
}

}  // namespace

OmegaEstimate omega_hat(const DirectionTarget& beta, const mpz_class& H) {
  if (beta.kind == DirectionTarget::Kind::rational)
    raise(Errc::rational_target, "omega estimator needs an irrational direction");
  if (H < 4) raise(Errc::invalid_argument, "omega estimator needs H >= 4");
  const ContinuedFraction& cf = beta.cf;
  std::size_t K = cf.depth();
  if (cf.q(K) <= H)
    raise(Errc::invalid_argument,
          "direction prefix too shallow to certify distances up to height H");

  mpz_class lo = cdiv(H, 2);

  struct Cand {
    mpz_class p, q;
  };
  std::vector<Cand> cands;
  auto push = [&](const mpz_class& p, const mpz_class& q) {
    mpz_class ap = abs(p);
    mpz_class h = ap > q ? ap : q;
    if (h >= lo && h <= H) cands.push_back({p, q});
  };
  for (std::size_t j = 0; j <= K; ++j) {
    push(cf.p(j), cf.q(j));
    if (j >= 1 && j < K) {
      // extreme in-window semiconvergents m*w_j + w_{j-1}
      const mpz_class& qj = cf.q(j);
      const mpz_class& qp = cf.q(j - 1);
      const mpz_class& a_next = cf.quotients[j];
      mpz_class m_hi = (H - qp) / qj;
      mpz_class m_lo = cdiv(lo - qp, qj);
      std::array<mpz_class, 4> ms{m_lo, mpz_class(m_lo + 1), mpz_class(m_hi - 1), m_hi};
      for (const mpz_class& m : ms) {
        if (m >= 1 && m <= a_next) {
          push(mpz_class(m * cf.p(j) + cf.p(j - 1)), mpz_class(m * qj + qp));
        }
      }
    }
  }
  if (cands.empty())
    raise(Errc::invalid_argument, "no best-approximation classes in the height window");

  OmegaEstimate est;
  est.H = H;
  for (long bits = 256; bits <= (1L << 14); bits *= 2) {
    Interval beta_lo = Interval::from_mpq(beta.slope_lo, bits);
    Interval beta_hi = Interval::from_mpq(beta.slope_hi, bits);
    Interval beta_angle = atan_i(hull(beta_lo, beta_hi));
    bool all_ok = true;
    std::vector<OmegaWitness> ws;
    for (const Cand& c : cands) {
      Interval d = line_distance(c.p, c.q, beta_angle, bits);
      if (!d.certainly_positive()) {
        all_ok = false;
        break;
      }
      mpz_class ap = abs(c.p);
      mpz_class h = ap > c.q ? ap : c.q;
      Interval score = -log_i(d) / Interval::from_mpz(h, bits);
      ws.push_back({c.p, c.q, score});
    }
    if (!all_ok) continue;
    std::sort(ws.begin(), ws.end(), [](const OmegaWitness& a, const OmegaWitness& b) {
      return a.score.mid_d() > b.score.mid_d();
    });
    est.witnesses = std::move(ws);
    est.value = max_i(est.witnesses.front().score, Interval::from_si(0, bits));
    if (est.witnesses.size() > 8) est.witnesses.resize(8);
    return est;
  }
  raise(Errc::precision_exhausted, "omega estimator distances not certified");
}

MonteCarloResult monte_carlo_omega(int samples, const std::vector<long>& heights,
                                   std::uint64_t seed, ExecMode mode) {
  if (samples < 1) raise(Errc::invalid_argument, "samples must be >= 1");
  constexpr double kEps[3] = {0.5, 0.2, 0.1};

  long maxH = 1;
  for (long h : heights) maxH = std::max(maxH, h);

  // per-sample, per-height certified lower bounds of the estimator
  std::vector<std::array<double, 8>> lows(samples);
  std::vector<char> valid(samples, 0);
  if (heights.size() > 8) raise(Errc::invalid_argument, "at most 8 height rows");

  parallel_for_indexed(static_cast<std::size_t>(samples), mode, [&](std::size_t i) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    auto next = [&s]() {
      s += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    long bits = 1024;
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::uint64_t u = next();
      if (u == 0) continue;
      // theta = pi * u / 2^64, uniform in angle; u rebuilt exactly from its
      // high and low parts
      Interval ufull = mul_2exp(Interval::from_d(static_cast<double>(u >> 11), bits), 11) +
                       Interval::from_si(static_cast<long>(u & 0x7ff), bits);
      Interval theta = Interval::pi(bits) * mul_2exp(ufull, -64);
      Interval half_pi = div_si(Interval::pi(bits), 2);
      if (!(theta.certainly_lt(half_pi) || half_pi.certainly_lt(theta))) continue;
      // slope: mpfr tan is monotone away from pi/2
      Interval t(bits);
      {
        mpfr_t lo_t, hi_t;
        mpfr_init2(lo_t, bits);
        mpfr_init2(hi_t, bits);
        mpfr_tan(lo_t, theta.lo(), MPFR_RNDD);
        mpfr_tan(hi_t, theta.hi(), MPFR_RNDU);
        t = Interval::make(lo_t, hi_t, bits);
        mpfr_clear(lo_t);
        mpfr_clear(hi_t);
      }
      // continued fraction of the slope, certified from the enclosure
      ContinuedFraction cf;
      bool ok = true;
      {
        Interval cur = t;
        mpz_class flo, fhi;
        mpfr_get_z(flo.get_mpz_t(), cur.lo(), MPFR_RNDD);
        mpfr_get_z(fhi.get_mpz_t(), cur.hi(), MPFR_RNDD);
        if (flo != fhi) continue;
        cf.a0 = flo;
        cur = cur - Interval::from_mpz(flo, bits);
        mpz_class q_last = 1;
        while (q_last <= mpz_class(maxH) * maxH * 16) {
          if (!cur.certainly_positive()) {
            ok = false;
            break;
          }
          cur = Interval::from_si(1, bits) / cur;
          mpfr_get_z(flo.get_mpz_t(), cur.lo(), MPFR_RNDD);
          mpfr_get_z(fhi.get_mpz_t(), cur.hi(), MPFR_RNDD);
          if (flo != fhi || flo < 1) {
            ok = false;
            break;
          }
          cf.quotients.push_back(flo);
          cur = cur - Interval::from_mpz(flo, bits);
          cf.rebuild_convergents();
          q_last = cf.q(cf.depth());
        }
        if (!ok || cf.depth() < 1) continue;
        cf.rebuild_convergents();
      }
      DirectionTarget target = DirectionTarget::from_prefix(std::move(cf));
      bool sample_ok = true;
      std::array<double, 8> row{};
      for (std::size_t hi_idx = 0; hi_idx < heights.size(); ++hi_idx) {
        try {
          OmegaEstimate est = omega_hat(target, mpz_class(heights[hi_idx]));
          row[hi_idx] = est.value.lo_d();
        } catch (const Error&) {
          sample_ok = false;
          break;
        }
      }
      if (!sample_ok) continue;
      lows[i] = row;
      valid[i] = 1;
      return;
    }
    // leave invalid; excluded from fractions deterministically
  });

  MonteCarloResult res;
  res.samples = samples;
  int n_valid = 0;
  for (int i = 0; i < samples; ++i) n_valid += valid[i];
  if (n_valid == 0) raise(Errc::precision_exhausted, "no Monte Carlo sample certified");
  for (std::size_t hi_idx = 0; hi_idx < heights.size(); ++hi_idx) {
    for (double eps : kEps) {
      long hits = 0;
      for (int i = 0; i < samples; ++i) {
        if (valid[i] && lows[i][hi_idx] > eps) ++hits;
      }
      res.rows.push_back(
          {heights[hi_idx], eps, static_cast<double>(hits) / static_cast<double>(n_valid)});
    }
  }
  return res;
}

}  // namespace mrball
