#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "mrball/exec.hpp"
#include "mrball/surface.hpp"

namespace mrball {

// Class lift with big-integer coordinates; constructed directions have
// convergent heights far beyond int64.
struct ZVec {
  mpz_class x, y;
};

struct ContinuedFraction {
  mpz_class a0;                       // integer part, >= 0 for slope targets
  std::vector<mpz_class> quotients;   // a1, a2, ... (positive)
  std::vector<std::pair<mpz_class, mpz_class>> convergents;  // (p_j, q_j), j >= 0

  void rebuild_convergents();
  std::size_t depth() const { return quotients.size(); }  // deepest level index
  const mpz_class& p(std::size_t j) const { return convergents[j].first; }
  const mpz_class& q(std::size_t j) const { return convergents[j].second; }
};

// Canonical expansion, last quotient >= 2 unless the expansion is just [a0].
ContinuedFraction cf_of_rational(const mpz_class& p, const mpz_class& q);

struct DirectionTarget {
  enum class Kind { rational, prefix, constructed };
  Kind kind = Kind::prefix;
  ContinuedFraction cf;
  mpq_class slope_lo, slope_hi;  // exact bracket; collapsed when rational

  static DirectionTarget rational(const mpz_class& p, const mpz_class& q);
  static DirectionTarget from_prefix(ContinuedFraction cf,
                                     Kind kind = Kind::prefix);
  static DirectionTarget golden(int depth = 60);
  static DirectionTarget silver(int depth = 40);
};

struct NonflatLevelCert {
  int level = 0;  // CF index of the appended quotient
  mpz_class quotient;
  mpz_class s_prev, s_new;
  double target_exponent = 0;  // A_eff * s_prev; s_new >= e^{target_exponent} certified
};

struct NonflatConstruction {
  ContinuedFraction cf;
  std::vector<NonflatLevelCert> certs;
};

// Extends the prefix by `levels` quotients so each new denominator satisfies
// s_{j+1} >= e^{A s_j}, certified by exact integer comparison against an
// outward-rounded bound on the exponential. amp "inf" selects the escalating
// schedule A_j = j. Denominators grow doubly exponentially; OverflowBudget
// when the required exponential exceeds bit_budget bits.
NonflatConstruction construct_nonflat(const std::string& amp_decimal, int levels,
                                      const ContinuedFraction& prefix,
                                      long bit_budget = 1L << 20);

struct OmegaWitness {
  mpz_class p, q;
  Interval score;  // log(1/d(w, beta)) / height(w)
};

struct OmegaEstimate {
  mpz_class H;
  Interval value;
  std::vector<OmegaWitness> witnesses;
};

// Tail estimator over best-approximation classes with height in [H/2, H];
// the direction's expansion must reach past H so distances are certified.
OmegaEstimate omega_hat(const DirectionTarget& beta, const mpz_class& H);

struct ProfileRow {
  int j = 0;          // convergent level probed
  ZVec probe;         // probe class, just past the convergent away from beta
  Interval x;         // tangential coordinate of the probe boundary point
  Interval f;         // normal distance to the reference supporting line
  Interval order;     // log f / log |x|
};

struct FlatnessProfile {
  std::vector<ProfileRow> rows;
  int reference_level = 0;
  bool stability_checked = false;
};

// Local graph-coordinate flatness diagnostic at the boundary point over beta.
// The supporting line is approximated by the one-sided functional at a much
// deeper convergent; probes sit ~1.5x the convergent's projective distance on
// the far side, where non-flatness is visible.
FlatnessProfile flatness_profile(const SurfaceContext& ctx, const DirectionTarget& beta,
                                 int depth);

struct MonteCarloRow {
  long H = 0;
  double eps = 0;
  double fraction = 0;
};

struct MonteCarloResult {
  int samples = 0;
  std::vector<MonteCarloRow> rows;  // ordered by (H, eps descending)
};

MonteCarloResult monte_carlo_omega(int samples, const std::vector<long>& heights,
                                   std::uint64_t seed, ExecMode mode = ExecMode::serial);

}  // namespace mrball
