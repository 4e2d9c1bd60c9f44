#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <string>
#include <utility>

namespace mrball {

// Outward-rounded interval arithmetic over MPFR. Every operation encloses the
// exact result: lower endpoints round down, upper endpoints round up, and
// under/overflow degrade to wider (still correct) enclosures. All certified
// comparisons in the project go through this type.
class Interval {
 public:
  Interval();
  explicit Interval(mpfr_prec_t prec);
  Interval(const Interval& o);
  Interval(Interval&& o) noexcept;
  Interval& operator=(const Interval& o);
  Interval& operator=(Interval&& o) noexcept;
  ~Interval();

  static Interval from_si(long v, mpfr_prec_t prec);
  static Interval from_d(double v, mpfr_prec_t prec);
  static Interval from_mpz(const mpz_class& v, mpfr_prec_t prec);
  static Interval from_mpq(const mpq_class& v, mpfr_prec_t prec);
  // Decimal string; the enclosure brackets the exact decimal value.
  static Interval from_decimal(const std::string& s, mpfr_prec_t prec);
  static Interval pi(mpfr_prec_t prec);
  static Interval make(const mpfr_t lo, const mpfr_t hi, mpfr_prec_t prec);
  // [-2^e, 2^e]; used to absorb certified-tiny correction terms.
  static Interval pm_pow2(long e, mpfr_prec_t prec);
  // [0, 2^e].
  static Interval zero_to_pow2(long e, mpfr_prec_t prec);

  mpfr_prec_t prec() const { return prec_; }
  mpfr_srcptr lo() const { return lo_; }
  mpfr_srcptr hi() const { return hi_; }

  bool is_finite() const;
  bool contains_zero() const;       // lo <= 0 <= hi
  bool certainly_positive() const;  // lo > 0
  bool certainly_negative() const;  // hi < 0
  bool certainly_lt(const Interval& o) const;   // hi < o.lo
  bool certainly_le(const Interval& o) const;   // hi <= o.lo
  bool certainly_lt_si(long v) const;
  bool certainly_gt_si(long v) const;
  bool certainly_ge_d(double v) const;
  bool certainly_le_d(double v) const;
  bool overlaps(const Interval& o) const;
  bool contains_mpz(const mpz_class& v) const;

  double lo_d() const;  // rounded down
  double hi_d() const;  // rounded up
  double mid_d() const;
  Interval mid(mpfr_prec_t prec) const;
  double width_d() const;
  // width / max(|mid|, tiny); infinite if not finite
  double rel_width() const;
  bool tight(double rel_tol) const { return is_finite() && rel_width() <= rel_tol; }

  // Midpoint rendered round-to-nearest with the given significant digits.
  // Deterministic for fixed precision; used by all emitters.
  std::string str(int digits) const;

  friend Interval operator+(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a, const Interval& b);
  friend Interval operator*(const Interval& a, const Interval& b);
  friend Interval operator/(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a);

  Interval& operator+=(const Interval& b) { return *this = *this + b; }
  Interval& operator-=(const Interval& b) { return *this = *this - b; }
  Interval& operator*=(const Interval& b) { return *this = *this * b; }

 private:
  mpfr_prec_t prec_;
  mpfr_t lo_, hi_;
};

Interval add_si(const Interval& a, long v);
Interval sub_si_from(long v, const Interval& a);  // v - a
Interval mul_si(const Interval& a, long v);
Interval div_si(const Interval& a, long v);
Interval mul_2exp(const Interval& a, long e);

Interval sqr(const Interval& a);
Interval abs_i(const Interval& a);
Interval sqrt_i(const Interval& a);   // requires lo >= 0
Interval exp_i(const Interval& a);
Interval log_i(const Interval& a);    // requires lo > 0
Interval log1p_i(const Interval& a);  // requires lo > -1
Interval acosh_i(const Interval& a);  // requires lo >= 1
Interval cosh_i(const Interval& a);
Interval coth_i(const Interval& a);   // requires lo > 0
Interval atan_i(const Interval& a);
Interval hull(const Interval& a, const Interval& b);
Interval max_i(const Interval& a, const Interval& b);
Interval min_i(const Interval& a, const Interval& b);

// atan2 over intervals, restricted to boxes strictly inside a half-plane
// (x > 0, y > 0, or y < 0); throws Errc::precision_exhausted otherwise so
// callers can widen precision. Range (-pi, pi].
Interval atan2_i(const Interval& y, const Interval& x);

// Counterclockwise angle from vector u to vector v, computed as
// atan2(cross(u,v), dot(u,v)); valid while the true angle is in (-pi, pi).
Interval angle_ccw(const Interval& ux, const Interval& uy, const Interval& vx,
                   const Interval& vy);

// Hyperbolic length from a trace enclosure: 2*acosh(t/2). Requires t > 2.
Interval length_from_trace(const Interval& t);

// Raises MPFR's exponent range once per process; safe to call repeatedly.
void interval_runtime_init();

}  // namespace mrball
