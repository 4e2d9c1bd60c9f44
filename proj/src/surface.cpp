#include "mrball/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mrball {

namespace {

Interval parse_positive(const std::string& s, long bits, const char* what) {
  Interval v = Interval::from_decimal(s, bits);
  if (!v.certainly_positive())
    raise(Errc::invalid_argument, std::string(what) + " must be positive: " + s);
  return v;
}

// Residual of the Markoff variety relation, x^2+y^2+z^2 - xyz.
Interval variety_residual(const Interval& x, const Interval& y, const Interval& z) {
  return sqr(x) + sqr(y) + sqr(z) - x * y * z;
}

struct ZRoots {
  Interval plus, minus;
};

ZRoots z_roots(const Interval& x, const Interval& y) {
  Interval disc = sqr(x * y) - mul_si(sqr(x) + sqr(y), 4);
  if (!disc.certainly_positive())
    raise(Errc::not_on_variety, "degenerate quadratic while re-projecting z");
  Interval root = sqrt_i(disc);
  return {div_si(x * y + root, 2), div_si(x * y - root, 2)};
}

}  // namespace

SurfaceContext SurfaceContext::modular(PrecisionPolicy pol) {
  pol.validate();
  SurfaceContext ctx;
  ctx.kind_ = SurfaceKind::modular;
  ctx.pol_ = pol;
  ctx.fingerprint_ = "modular";
  return ctx;
}

SurfaceContext SurfaceContext::from_triple(const std::string& x, const std::string& y,
                                           const std::string& z, PrecisionPolicy pol) {
  pol.validate();
  SurfaceContext ctx;
  ctx.kind_ = SurfaceKind::triple;
  ctx.pol_ = pol;
  ctx.x_str_ = x;
  ctx.y_str_ = y;
  ctx.z_str_ = z;

  long bits = std::max<long>(pol.base_bits, 256);
  Interval xi = parse_positive(x, bits, "x");
  Interval yi = parse_positive(y, bits, "y");
  Interval zi = parse_positive(z, bits, "z");

  auto residual_ok = [&](long b) -> std::optional<bool> {
    Interval xb = Interval::from_decimal(x, b);
    Interval yb = Interval::from_decimal(y, b);
    Interval zb = Interval::from_decimal(z, b);
    Interval res = abs_i(variety_residual(xb, yb, zb));
    Interval tol =
        Interval::from_d(kVarietyTolerance, b) * max_i(abs_i(xb * yb * zb), Interval::from_si(1, b));
    if (res.certainly_lt(tol)) return true;
    if (tol.certainly_lt(res)) return false;
    return std::nullopt;
  };
  bool on_variety = false;
  for (long b = bits;; b *= 2) {
    if (auto ok = residual_ok(b)) {
      on_variety = *ok;
      break;
    }
    if (b > pol.max_bits) {
      on_variety = false;  // undecidable at the cap counts as a rejection
      break;
    }
  }
  if (!on_variety)
    raise(Errc::not_on_variety,
          "relation residual exceeds tolerance for (" + x + ", " + y + ", " + z + ")");

  ZRoots roots = z_roots(xi, yi);
  Interval dplus = abs_i(roots.plus - zi);
  Interval dminus = abs_i(roots.minus - zi);
  // Nearest root; if undecidable the roots coincide within tolerance and
  // either choice re-projects correctly.
  ctx.z_root_is_plus_ = !dminus.certainly_lt(dplus);
  const Interval& zfixed = ctx.z_root_is_plus_ ? roots.plus : roots.minus;

  if (!xi.certainly_gt_si(2) || !yi.certainly_gt_si(2) || !zfixed.certainly_gt_si(2))
    raise(Errc::non_hyperbolic, "trace <= 2 in (" + x + ", " + y + ", " + z + ")");

  ctx.fingerprint_ = "t:" + xi.str(64) + "," + yi.str(64) + "," + zfixed.str(64);
  return ctx;
}

BasisTraces SurfaceContext::basis(long bits) const {
  if (kind_ == SurfaceKind::modular) {
    return {Interval::from_si(3, bits), Interval::from_si(3, bits), Interval::from_si(3, bits)};
  }
  Interval xi = Interval::from_decimal(x_str_, bits);
  Interval yi = Interval::from_decimal(y_str_, bits);
  ZRoots roots = z_roots(xi, yi);
  return {xi, yi, z_root_is_plus_ ? roots.plus : roots.minus};
}

TraceValue vieta_flip(const TraceValue& x, const TraceValue& y, const TraceValue& z_old) {
  TraceValue r;
  if (x.is_exact() && y.is_exact() && z_old.is_exact()) {
    r.exact = *x.exact * *y.exact - *z_old.exact;
    long bits = std::max({x.prec_bits, y.prec_bits, z_old.prec_bits, 64L});
    r.approx = Interval::from_mpz(*r.exact, bits);
    r.prec_bits = bits;
  } else {
    r.approx = x.approx * y.approx - z_old.approx;
    r.prec_bits = r.approx.prec();
  }
  return r;
}

namespace {

// Fricke descent to the target class through the triangle tree. T is either
// mpz_class (modular) or Interval; a flip is always new = a*c - b.
template <typename T>
T descend_trace(const PrimitiveClass& w, const T& x, const T& y, const T& z) {
  Vec2 target{w.p, w.q};
  if (target == Vec2{1, 0}) return x;
  if (target == Vec2{0, 1}) return y;
  if (target == Vec2{1, 1}) return z;

  Vec2 a{1, 0}, b{0, 1}, c{1, 1};
  T xa = x, xb = y, xc = z;
  if (w.q < 0) {
    b = {0, -1};
    c = {1, -1};
    xc = x * y - z;
    if (target == c) return xc;
  }
  for (;;) {
    std::int64_t d = det(a, b);
    std::int64_t alpha = det(target, b) / d;
    std::int64_t beta = det(a, target) / d;
    if (alpha > beta) {
      T xn = xa * xc - xb;
      b = c;
      xb = std::move(xc);
      xc = std::move(xn);
    } else {
      T xn = xb * xc - xa;
      a = c;
      xa = std::move(xc);
      xc = std::move(xn);
    }
    c = a + b;
    if (target == c) return xc;
  }
}

}  // namespace

TraceValue trace(const SurfaceContext& ctx, const PrimitiveClass& w) {
  const PrecisionPolicy& pol = ctx.policy();
  long want_bits =
      static_cast<long>(std::ceil(-std::log2(pol.agreement_tolerance))) + 4;

  if (TraceCache* cache = ctx.cache()) {
    if (auto hit = cache->get(w, ctx.is_modular() ? 0 : want_bits)) return *hit;
  }

  TraceValue out;
  if (ctx.is_modular()) {
    mpz_class t = descend_trace<mpz_class>(w, 3, 3, 3);
    out.exact = t;
    out.prec_bits = pol.base_bits;
    out.approx = Interval::from_mpz(t, pol.base_bits);
  } else {
    out = adaptive(pol, [&](long bits) -> std::optional<TraceValue> {
      BasisTraces basis = ctx.basis(bits);
      Interval t = descend_trace<Interval>(w, basis.x, basis.y, basis.z);
      if (!t.tight(pol.agreement_tolerance)) return std::nullopt;
      TraceValue tv;
      tv.approx = t;
      tv.prec_bits = bits;
      return tv;
    });
  }
  if (!out.approx.certainly_gt_si(2))
    raise(Errc::precision_exhausted, "trace enclosure not above 2");
  if (TraceCache* cache = ctx.cache()) cache->put(w, out);
  return out;
}

Interval trace_enclosure(const SurfaceContext& ctx, const PrimitiveClass& w, long bits) {
  if (ctx.is_modular()) {
    return Interval::from_mpz(*trace(ctx, w).exact, bits);
  }
  BasisTraces basis = ctx.basis(bits);
  return descend_trace<Interval>(w, basis.x, basis.y, basis.z);
}

bool fricke_product_check(const TraceValue& x, const TraceValue& y, const TraceValue& z,
                          const TraceValue& zp) {
  if (x.is_exact() && y.is_exact() && z.is_exact() && zp.is_exact()) {
    return *z.exact * *zp.exact == *x.exact * *x.exact + *y.exact * *y.exact;
  }
  Interval lhs = z.approx * zp.approx;
  Interval rhs = sqr(x.approx) + sqr(y.approx);
  Interval tol = Interval::from_d(1e-20, lhs.prec()) * max_i(abs_i(rhs), Interval::from_si(1, 64));
  return abs_i(lhs - rhs).certainly_lt(tol);
}

SinkTriangle bowditch_sink(const SurfaceContext& ctx, long budget) {
  // Farey pair (U, V) with det = +1 and triangle {U, V, U+V} carrying traces
  // (xu, xv, xm). Greedy descent flips the largest label violating its sink
  // inequality 2*x_L <= x_J*x_K; Bowditch's theorem terminates it for valid
  // Fuchsian inputs.
  auto run = [&](long bits) -> std::optional<SinkTriangle> {
    BasisTraces basis = ctx.basis(bits);
    Interval xu = basis.x, xv = basis.y, xm = basis.z;
    Vec2 U{1, 0}, V{0, 1};
    long steps = 0;
    for (;;) {
      Interval vio_u = mul_si(xu, 2) - xv * xm;
      Interval vio_v = mul_si(xv, 2) - xu * xm;
      Interval vio_m = mul_si(xm, 2) - xu * xv;
      bool pu = vio_u.certainly_positive();
      bool pv = vio_v.certainly_positive();
      bool pm = vio_m.certainly_positive();
      if (!pu && !pv && !pm) {
        bool sink = mpfr_sgn(vio_u.hi()) <= 0 && mpfr_sgn(vio_v.hi()) <= 0 &&
                    mpfr_sgn(vio_m.hi()) <= 0;
        if (!sink) return std::nullopt;  // boundary undecidable at this precision
        SinkTriangle s;
        s.labels = {class_of(U), class_of(V), class_of(U + V)};
        auto mk = [&](const Interval& t) {
          TraceValue tv;
          tv.approx = t;
          tv.prec_bits = bits;
          return tv;
        };
        s.traces = {mk(xu), mk(xv), mk(xm)};
        if (ctx.is_modular()) {
          for (int i = 0; i < 3; ++i) s.traces[i] = trace(ctx, s.labels[i]);
        }
        s.H0 = std::max({s.labels[0].height(), s.labels[1].height(), s.labels[2].height()});
        s.descent_steps = steps;
        return s;
      }
      // the largest violating label, by trace midpoint, mediant-first on ties
      int which = -1;
      double best = 0;
      if (pm) {
        which = 2;
        best = xm.mid_d();
      }
      if (pu && (which < 0 || xu.mid_d() > best)) {
        which = 0;
        best = xu.mid_d();
      }
      if (pv && (which < 0 || xv.mid_d() > best)) {
        which = 1;
        best = xv.mid_d();
      }
      if (which == 2) {
        // U+V -> U-V: new pair (U-V, V), mediant U
        Interval flipped = xu * xv - xm;
        U = U - V;
        xm = std::move(xu);
        xu = std::move(flipped);
      } else if (which == 0) {
        // U -> U+2V: new pair (U+V, V), mediant U+2V
        Interval flipped = xm * xv - xu;
        U = U + V;
        xu = std::move(xm);
        xm = std::move(flipped);
      } else {
        // V -> 2U+V: new pair (U, U+V), mediant 2U+V
        Interval flipped = xm * xu - xv;
        V = U + V;
        xv = std::move(xm);
        xm = std::move(flipped);
      }
      if (++steps > budget)
        raise(Errc::descent_budget_exceeded, "sink descent exceeded its step budget");
    }
  };
  return adaptive(ctx.policy(), run);
}

std::vector<MarkoffRecord> markoff_tree(const SurfaceContext& ctx, const mpz_class& max_c) {
  if (!ctx.is_modular()) raise(Errc::modular_only, "markoff_tree needs the modular surface");
  if (max_c < 1) raise(Errc::invalid_argument, "markoff_tree needs max_c >= 1");

  struct Node {
    Vec2 U, V;
    mpz_class xu, xv, xm;
  };

  auto sorted_triple = [](const Node& n) {
    std::array<mpz_class, 3> t{n.xu / 3, n.xv / 3, n.xm / 3};
    std::sort(t.begin(), t.end());
    return t;
  };

  std::set<std::array<mpz_class, 3>> seen;
  std::vector<MarkoffRecord> out;
  std::deque<Node> queue;
  queue.push_back({{1, 0}, {0, 1}, 3, 3, 3});
  mpz_class cap = max_c * 3;

  while (!queue.empty()) {
    Node n = queue.front();
    queue.pop_front();
    auto key = sorted_triple(n);
    if (!seen.insert(key).second) continue;
    if (key[2] * 3 > cap) continue;  // c exceeds the bound; nothing below it either

    MarkoffRecord rec;
    rec.a = key[0];
    rec.b = key[1];
    rec.c = key[2];
    std::array<std::pair<mpz_class, PrimitiveClass>, 3> labelled{
        std::make_pair(n.xu, class_of(n.U)), std::make_pair(n.xv, class_of(n.V)),
        std::make_pair(n.xm, class_of(n.U + n.V))};
    std::sort(labelled.begin(), labelled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    rec.classes = {labelled[0].second, labelled[1].second, labelled[2].second};
    out.push_back(rec);

    // three neighbor triples
    queue.push_back({n.U - n.V, n.V, n.xu * n.xv - n.xm, n.xv, n.xu});
    queue.push_back({n.U + n.V, n.V, n.xm * n.xv - n.xu, n.xv, n.xm});
    queue.push_back({n.U, n.U + n.V, n.xu, n.xm * n.xu - n.xv, n.xm});
  }

  std::sort(out.begin(), out.end(), [](const MarkoffRecord& l, const MarkoffRecord& r) {
    if (l.c != r.c) return l.c < r.c;
    if (l.b != r.b) return l.b < r.b;
    return l.a < r.a;
  });
  return out;
}

TraceCache::TraceCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    std::int64_t p = j.value("p", std::int64_t{0});
    std::int64_t q = j.value("q", std::int64_t{0});
    long bits = j.value("prec_bits", 0L);
    std::string digits = j.value("trace", std::string());
    if ((p == 0 && q == 0) || digits.empty()) continue;
    entries_[{p, q}] = Entry{bits, digits};
  }
}

TraceCache::~TraceCache() {
  try {
    flush();
  } catch (...) {
  }
}

std::optional<TraceValue> TraceCache::get(const PrimitiveClass& w, long min_bits) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find({w.p, w.q});
  if (it == entries_.end()) return std::nullopt;
  const Entry& e = it->second;
  TraceValue tv;
  if (e.prec_bits == 0) {
    // exact record
    tv.exact = mpz_class(e.digits);
    tv.prec_bits = 256;
    tv.approx = Interval::from_mpz(*tv.exact, 256);
    return tv;
  }
  if (e.prec_bits < min_bits) return std::nullopt;
  // Stored digits carry a certified relative width of 2^(2-prec_bits);
  // reconstruct a valid enclosure by widening symmetrically.
  Interval mid = Interval::from_decimal(e.digits, e.prec_bits);
  Interval slack = add_si(Interval::pm_pow2(2 - e.prec_bits, e.prec_bits), 1);
  tv.approx = mid * slack;
  tv.prec_bits = e.prec_bits;
  return tv;
}

void TraceCache::put(const PrimitiveClass& w, const TraceValue& value) {
  Entry e;
  if (value.is_exact()) {
    e.prec_bits = 0;
    e.digits = value.exact->get_str();
  } else {
    double rw = value.approx.rel_width();
    long certified = rw <= 0 ? value.prec_bits
                             : std::min<long>(value.prec_bits,
                                              static_cast<long>(-std::log2(rw)) - 2);
    if (certified < 16) return;  // too loose to be worth storing
    e.prec_bits = certified;
    int digits = static_cast<int>(certified * 0.302) + 3;
    e.digits = value.approx.str(digits);
  }
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.try_emplace({w.p, w.q}, e);
  if (!inserted && it->second.prec_bits != 0 && e.prec_bits > it->second.prec_bits) {
    it->second = e;  // higher-precision rewrite; last write wins on equal values
  }
  dirty_ = true;
}

void TraceCache::flush() {
  std::unique_lock lock(mu_);
  if (!dirty_) return;
  std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::trunc);
  if (!out) raise(Errc::io_error, "cannot write trace cache " + file_.string());
  for (const auto& [key, e] : entries_) {
    nlohmann::ordered_json j;
    j["p"] = key.first;
    j["q"] = key.second;
    j["prec_bits"] = e.prec_bits;
    j["trace"] = e.digits;
    out << j.dump() << "\n";
  }
  dirty_ = false;
}

std::size_t TraceCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::filesystem::path TraceCache::file_for(const std::filesystem::path& dir,
                                           const std::string& fingerprint) {
  std::string name = "traces_";
  for (char c : fingerprint) {
    name += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  if (name.size() > 120) name.resize(120);
  return dir / (name + ".jsonl");
}

std::optional<std::filesystem::path> resolve_cache_dir(const std::string& configured) {
  if (const char* env = std::getenv("MRBALL_CACHE_DIR"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  if (!configured.empty()) return std::filesystem::path(configured);
  return std::nullopt;
}

}  // namespace mrball
