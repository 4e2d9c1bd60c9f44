#include "mrball/interval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <vector>

#include "mrball/errors.hpp"

namespace mrball {

void interval_runtime_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    mpfr_set_emax(mpfr_get_emax_max());
    mpfr_set_emin(mpfr_get_emin_min());
  });
}

namespace {
struct RuntimeInitTag {
  RuntimeInitTag() { interval_runtime_init(); }
} runtime_init_tag;
}  // namespace

Interval::Interval() : Interval(64) {}

Interval::Interval(mpfr_prec_t prec) : prec_(prec) {
  mpfr_init2(lo_, prec);
  mpfr_init2(hi_, prec);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Interval& o) : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& o) noexcept : prec_(o.prec_) {
  lo_[0] = o.lo_[0];
  hi_[0] = o.hi_[0];
  // leave o in a destructible state
  mpfr_init2(o.lo_, 64);
  mpfr_init2(o.hi_, 64);
  o.prec_ = 64;
}

Interval& Interval::operator=(const Interval& o) {
  if (this == &o) return *this;
  if (prec_ != o.prec_) {
    mpfr_set_prec(lo_, o.prec_);
    mpfr_set_prec(hi_, o.prec_);
    prec_ = o.prec_;
  }
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
  return *this;
}

Interval& Interval::operator=(Interval&& o) noexcept {
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
  std::swap(prec_, o.prec_);
  return *this;
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::from_si(long v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_si(r.lo_, v, MPFR_RNDD);
  mpfr_set_si(r.hi_, v, MPFR_RNDU);
  return r;
}

Interval Interval::from_d(double v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_d(r.lo_, v, MPFR_RNDD);
  mpfr_set_d(r.hi_, v, MPFR_RNDU);
  return r;
}

Interval Interval::from_mpz(const mpz_class& v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_z(r.lo_, v.get_mpz_t(), MPFR_RNDD);
  mpfr_set_z(r.hi_, v.get_mpz_t(), MPFR_RNDU);
  return r;
}

Interval Interval::from_mpq(const mpq_class& v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_q(r.lo_, v.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, v.get_mpq_t(), MPFR_RNDU);
  return r;
}

Interval Interval::from_decimal(const std::string& s, mpfr_prec_t prec) {
  Interval r(prec);
  if (mpfr_set_str(r.lo_, s.c_str(), 10, MPFR_RNDD) != 0 &&
      mpfr_nan_p(r.lo_)) {
    raise(Errc::invalid_argument, "bad decimal literal: " + s);
  }
  mpfr_set_str(r.hi_, s.c_str(), 10, MPFR_RNDU);
  return r;
}

Interval Interval::pi(mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_const_pi(r.lo_, MPFR_RNDD);
  mpfr_const_pi(r.hi_, MPFR_RNDU);
  return r;
}

Interval Interval::make(const mpfr_t lo, const mpfr_t hi, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set(r.lo_, lo, MPFR_RNDD);
  mpfr_set(r.hi_, hi, MPFR_RNDU);
  return r;
}

Interval Interval::pm_pow2(long e, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_si_2exp(r.hi_, 1, e, MPFR_RNDU);
  mpfr_neg(r.lo_, r.hi_, MPFR_RNDD);
  return r;
}

Interval Interval::zero_to_pow2(long e, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_zero(r.lo_, 1);
  mpfr_set_si_2exp(r.hi_, 1, e, MPFR_RNDU);
  return r;
}

bool Interval::is_finite() const {
  return mpfr_number_p(lo_) && mpfr_number_p(hi_);
}

bool Interval::contains_zero() const {
  return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0;
}

bool Interval::certainly_positive() const { return mpfr_sgn(lo_) > 0 && !mpfr_nan_p(lo_); }
bool Interval::certainly_negative() const { return mpfr_sgn(hi_) < 0 && !mpfr_nan_p(hi_); }

bool Interval::certainly_lt(const Interval& o) const {
  return mpfr_number_p(hi_) && mpfr_number_p(o.lo_) && mpfr_cmp(hi_, o.lo_) < 0;
}

bool Interval::certainly_le(const Interval& o) const {
  return mpfr_number_p(hi_) && mpfr_number_p(o.lo_) && mpfr_cmp(hi_, o.lo_) <= 0;
}

bool Interval::certainly_lt_si(long v) const { return mpfr_cmp_si(hi_, v) < 0; }
bool Interval::certainly_gt_si(long v) const { return mpfr_cmp_si(lo_, v) > 0; }
bool Interval::certainly_ge_d(double v) const { return mpfr_cmp_d(lo_, v) >= 0; }
bool Interval::certainly_le_d(double v) const { return mpfr_cmp_d(hi_, v) <= 0; }

bool Interval::overlaps(const Interval& o) const {
  return !(certainly_lt(o) || o.certainly_lt(*this));
}

bool Interval::contains_mpz(const mpz_class& v) const {
  return mpfr_cmp_z(lo_, v.get_mpz_t()) <= 0 && mpfr_cmp_z(hi_, v.get_mpz_t()) >= 0;
}

double Interval::lo_d() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double Interval::hi_d() const { return mpfr_get_d(hi_, MPFR_RNDU); }

double Interval::mid_d() const {
  Interval m = mid(53);
  return mpfr_get_d(m.lo_, MPFR_RNDN);
}

Interval Interval::mid(mpfr_prec_t prec) const {
  Interval r(prec);
  mpfr_add(r.lo_, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(r.lo_, r.lo_, 1, MPFR_RNDN);
  mpfr_set(r.hi_, r.lo_, MPFR_RNDU);
  return r;
}

double Interval::width_d() const {
  mpfr_t w;
  mpfr_init2(w, 64);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  double d = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return d;
}

double Interval::rel_width() const {
  if (!is_finite()) return std::numeric_limits<double>::infinity();
  mpfr_t w, m;
  mpfr_init2(w, 64);
  mpfr_init2(m, 64);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  mpfr_add(m, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(m, m, 1, MPFR_RNDN);
  mpfr_abs(m, m, MPFR_RNDN);
  double rel;
  if (mpfr_zero_p(m)) {
    rel = mpfr_zero_p(w) ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    mpfr_div(w, w, m, MPFR_RNDU);
    rel = mpfr_get_d(w, MPFR_RNDU);
  }
  mpfr_clear(w);
  mpfr_clear(m);
  return rel;
}

std::string Interval::str(int digits) const {
  Interval m = mid(prec_);
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, m.lo_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

namespace {
mpfr_prec_t join_prec(const Interval& a, const Interval& b) {
  return std::max(a.prec(), b.prec());
}
}  // namespace

Interval operator+(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_add(const_cast<mpfr_ptr>(r.lo()), a.lo(), b.lo(), MPFR_RNDD);
  mpfr_add(const_cast<mpfr_ptr>(r.hi()), a.hi(), b.hi(), MPFR_RNDU);
  return r;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_sub(const_cast<mpfr_ptr>(r.lo()), a.lo(), b.hi(), MPFR_RNDD);
  mpfr_sub(const_cast<mpfr_ptr>(r.hi()), a.hi(), b.lo(), MPFR_RNDU);
  return r;
}

Interval operator-(const Interval& a) {
  Interval r(a.prec());
  mpfr_neg(const_cast<mpfr_ptr>(r.lo()), a.hi(), MPFR_RNDD);
  mpfr_neg(const_cast<mpfr_ptr>(r.hi()), a.lo(), MPFR_RNDU);
  return r;
}

Interval operator*(const Interval& a, const Interval& b) {
  mpfr_prec_t p = join_prec(a, b);
  Interval r(p);
  mpfr_t c[4];
  for (auto& x : c) mpfr_init2(x, p);
  mpfr_mul(c[0], a.lo(), b.lo(), MPFR_RNDD);
  mpfr_mul(c[1], a.lo(), b.hi(), MPFR_RNDD);
  mpfr_mul(c[2], a.hi(), b.lo(), MPFR_RNDD);
  mpfr_mul(c[3], a.hi(), b.hi(), MPFR_RNDD);
  mpfr_ptr lo = const_cast<mpfr_ptr>(r.lo());
  mpfr_set(lo, c[0], MPFR_RNDD);
  for (int i = 1; i < 4; ++i)
    if (mpfr_cmp(c[i], lo) < 0) mpfr_set(lo, c[i], MPFR_RNDD);
  mpfr_mul(c[0], a.lo(), b.lo(), MPFR_RNDU);
  mpfr_mul(c[1], a.lo(), b.hi(), MPFR_RNDU);
  mpfr_mul(c[2], a.hi(), b.lo(), MPFR_RNDU);
  mpfr_mul(c[3], a.hi(), b.hi(), MPFR_RNDU);
  mpfr_ptr hi = const_cast<mpfr_ptr>(r.hi());
  mpfr_set(hi, c[0], MPFR_RNDU);
  for (int i = 1; i < 4; ++i)
    if (mpfr_cmp(c[i], hi) > 0) mpfr_set(hi, c[i], MPFR_RNDU);
  for (auto& x : c) mpfr_clear(x);
  return r;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero())
    raise(Errc::precision_exhausted, "interval division by enclosure of zero");
  mpfr_prec_t p = join_prec(a, b);
  Interval r(p);
  mpfr_t c[4];
  for (auto& x : c) mpfr_init2(x, p);
  mpfr_div(c[0], a.lo(), b.lo(), MPFR_RNDD);
  mpfr_div(c[1], a.lo(), b.hi(), MPFR_RNDD);
  mpfr_div(c[2], a.hi(), b.lo(), MPFR_RNDD);
  mpfr_div(c[3], a.hi(), b.hi(), MPFR_RNDD);
  mpfr_ptr lo = const_cast<mpfr_ptr>(r.lo());
  mpfr_set(lo, c[0], MPFR_RNDD);
  for (int i = 1; i < 4; ++i)
    if (mpfr_cmp(c[i], lo) < 0) mpfr_set(lo, c[i], MPFR_RNDD);
  mpfr_div(c[0], a.lo(), b.lo(), MPFR_RNDU);
  mpfr_div(c[1], a.lo(), b.hi(), MPFR_RNDU);
  mpfr_div(c[2], a.hi(), b.lo(), MPFR_RNDU);
  mpfr_div(c[3], a.hi(), b.hi(), MPFR_RNDU);
  mpfr_ptr hi = const_cast<mpfr_ptr>(r.hi());
  mpfr_set(hi, c[0], MPFR_RNDU);
  for (int i = 1; i < 4; ++i)
    if (mpfr_cmp(c[i], hi) > 0) mpfr_set(hi, c[i], MPFR_RNDU);
  for (auto& x : c) mpfr_clear(x);
  return r;
}

Interval add_si(const Interval& a, long v) {
  Interval r(a.prec());
  mpfr_add_si(const_cast<mpfr_ptr>(r.lo()), a.lo(), v, MPFR_RNDD);
  mpfr_add_si(const_cast<mpfr_ptr>(r.hi()), a.hi(), v, MPFR_RNDU);
  return r;
}

Interval sub_si_from(long v, const Interval& a) {
  Interval r(a.prec());
  mpfr_si_sub(const_cast<mpfr_ptr>(r.lo()), v, a.hi(), MPFR_RNDD);
  mpfr_si_sub(const_cast<mpfr_ptr>(r.hi()), v, a.lo(), MPFR_RNDU);
  return r;
}

Interval mul_si(const Interval& a, long v) {
  Interval r(a.prec());
  if (v >= 0) {
    mpfr_mul_si(const_cast<mpfr_ptr>(r.lo()), a.lo(), v, MPFR_RNDD);
    mpfr_mul_si(const_cast<mpfr_ptr>(r.hi()), a.hi(), v, MPFR_RNDU);
  } else {
    mpfr_mul_si(const_cast<mpfr_ptr>(r.lo()), a.hi(), v, MPFR_RNDD);
    mpfr_mul_si(const_cast<mpfr_ptr>(r.hi()), a.lo(), v, MPFR_RNDU);
  }
  return r;
}

Interval div_si(const Interval& a, long v) {
  if (v == 0) raise(Errc::invalid_argument, "div_si by zero");
  Interval r(a.prec());
  if (v > 0) {
    mpfr_div_si(const_cast<mpfr_ptr>(r.lo()), a.lo(), v, MPFR_RNDD);
    mpfr_div_si(const_cast<mpfr_ptr>(r.hi()), a.hi(), v, MPFR_RNDU);
  } else {
    mpfr_div_si(const_cast<mpfr_ptr>(r.lo()), a.hi(), v, MPFR_RNDD);
    mpfr_div_si(const_cast<mpfr_ptr>(r.hi()), a.lo(), v, MPFR_RNDU);
  }
  return r;
}

Interval mul_2exp(const Interval& a, long e) {
  Interval r(a.prec());
  mpfr_mul_2si(const_cast<mpfr_ptr>(r.lo()), a.lo(), e, MPFR_RNDD);
  mpfr_mul_2si(const_cast<mpfr_ptr>(r.hi()), a.hi(), e, MPFR_RNDU);
  return r;
}

Interval sqr(const Interval& a) {
  Interval r(a.prec());
  mpfr_ptr lo = const_cast<mpfr_ptr>(r.lo());
  mpfr_ptr hi = const_cast<mpfr_ptr>(r.hi());
  if (a.contains_zero()) {
    mpfr_set_zero(lo, 1);
    mpfr_t c1, c2;
    mpfr_init2(c1, a.prec());
    mpfr_init2(c2, a.prec());
    mpfr_sqr(c1, a.lo(), MPFR_RNDU);
    mpfr_sqr(c2, a.hi(), MPFR_RNDU);
    mpfr_set(hi, mpfr_cmp(c1, c2) >= 0 ? c1 : c2, MPFR_RNDU);
    mpfr_clear(c1);
    mpfr_clear(c2);
  } else if (a.certainly_positive()) {
    mpfr_sqr(lo, a.lo(), MPFR_RNDD);
    mpfr_sqr(hi, a.hi(), MPFR_RNDU);
  } else {
    mpfr_sqr(lo, a.hi(), MPFR_RNDD);
    mpfr_sqr(hi, a.lo(), MPFR_RNDU);
  }
  return r;
}

Interval abs_i(const Interval& a) {
  if (a.certainly_positive()) return a;
  if (a.certainly_negative()) return -a;
  Interval r(a.prec());
  mpfr_ptr lo = const_cast<mpfr_ptr>(r.lo());
  mpfr_ptr hi = const_cast<mpfr_ptr>(r.hi());
  mpfr_set_zero(lo, 1);
  mpfr_t t;
  mpfr_init2(t, a.prec());
  mpfr_neg(t, a.lo(), MPFR_RNDU);
  mpfr_set(hi, mpfr_cmp(t, a.hi()) >= 0 ? t : a.hi(), MPFR_RNDU);
  mpfr_clear(t);
  return r;
}

namespace {
template <typename F>
Interval monotone_inc(const Interval& a, F f) {
  Interval r(a.prec());
  f(const_cast<mpfr_ptr>(r.lo()), a.lo(), MPFR_RNDD);
  f(const_cast<mpfr_ptr>(r.hi()), a.hi(), MPFR_RNDU);
  return r;
}
}  // namespace

Interval sqrt_i(const Interval& a) {
  if (mpfr_sgn(a.lo()) < 0) raise(Errc::precision_exhausted, "sqrt of possibly-negative enclosure");
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_sqrt(r, x, rnd); });
}

Interval exp_i(const Interval& a) {
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_exp(r, x, rnd); });
}

Interval log_i(const Interval& a) {
  if (mpfr_sgn(a.lo()) <= 0) raise(Errc::precision_exhausted, "log of possibly-nonpositive enclosure");
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_log(r, x, rnd); });
}

Interval log1p_i(const Interval& a) {
  if (mpfr_cmp_si(a.lo(), -1) <= 0)
    raise(Errc::precision_exhausted, "log1p of enclosure reaching -1");
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_log1p(r, x, rnd); });
}

Interval acosh_i(const Interval& a) {
  if (mpfr_cmp_si(a.lo(), 1) < 0) raise(Errc::precision_exhausted, "acosh of enclosure below 1");
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_acosh(r, x, rnd); });
}

Interval cosh_i(const Interval& a) {
  if (mpfr_sgn(a.lo()) >= 0)
    return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_cosh(r, x, rnd); });
  if (mpfr_sgn(a.hi()) <= 0) return cosh_i(-a);
  Interval m = max_i(abs_i(a), Interval::from_si(0, a.prec()));
  Interval r(a.prec());
  mpfr_set_si(const_cast<mpfr_ptr>(r.lo()), 1, MPFR_RNDD);
  mpfr_cosh(const_cast<mpfr_ptr>(r.hi()), m.hi(), MPFR_RNDU);
  return r;
}

Interval coth_i(const Interval& a) {
  if (mpfr_sgn(a.lo()) <= 0) raise(Errc::precision_exhausted, "coth needs positive enclosure");
  // decreasing on (0, inf)
  Interval r(a.prec());
  mpfr_coth(const_cast<mpfr_ptr>(r.lo()), a.hi(), MPFR_RNDD);
  mpfr_coth(const_cast<mpfr_ptr>(r.hi()), a.lo(), MPFR_RNDU);
  return r;
}

Interval atan_i(const Interval& a) {
  return monotone_inc(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t rnd) { mpfr_atan(r, x, rnd); });
}

Interval hull(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_set(const_cast<mpfr_ptr>(r.lo()), mpfr_cmp(a.lo(), b.lo()) <= 0 ? a.lo() : b.lo(), MPFR_RNDD);
  mpfr_set(const_cast<mpfr_ptr>(r.hi()), mpfr_cmp(a.hi(), b.hi()) >= 0 ? a.hi() : b.hi(), MPFR_RNDU);
  return r;
}

Interval max_i(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_max(const_cast<mpfr_ptr>(r.lo()), a.lo(), b.lo(), MPFR_RNDD);
  mpfr_max(const_cast<mpfr_ptr>(r.hi()), a.hi(), b.hi(), MPFR_RNDU);
  return r;
}

Interval min_i(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_min(const_cast<mpfr_ptr>(r.lo()), a.lo(), b.lo(), MPFR_RNDD);
  mpfr_min(const_cast<mpfr_ptr>(r.hi()), a.hi(), b.hi(), MPFR_RNDU);
  return r;
}

Interval atan2_i(const Interval& y, const Interval& x) {
  mpfr_prec_t p = join_prec(y, x);
  if (x.certainly_positive()) {
    return atan_i(y / x);
  }
  Interval half_pi = div_si(Interval::pi(p), 2);
  if (y.certainly_positive()) {
    // atan2 = pi/2 - atan(x/y), decreasing in x/y
    return half_pi - atan_i(x / y);
  }
  if (y.certainly_negative()) {
    return -half_pi - atan_i(x / y);
  }
  raise(Errc::precision_exhausted, "atan2 enclosure straddles the branch cut");
}

Interval angle_ccw(const Interval& ux, const Interval& uy, const Interval& vx,
                   const Interval& vy) {
  Interval cross = ux * vy - uy * vx;
  Interval dot = ux * vx + uy * vy;
  return atan2_i(cross, dot);
}

Interval length_from_trace(const Interval& t) {
  if (!t.certainly_gt_si(2)) raise(Errc::precision_exhausted, "trace enclosure not above 2");
  return mul_si(acosh_i(div_si(t, 2)), 2);
}

}  // namespace mrball
