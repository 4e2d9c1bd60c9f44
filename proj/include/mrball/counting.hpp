#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "mrball/exec.hpp"
#include "mrball/normball.hpp"
#include "mrball/surface.hpp"

namespace mrball {

struct FiberRecord {
  mpz_class m;
  std::vector<PrimitiveClass> classes;  // all classes with trace exactly 3m
  std::size_t size = 0;
  LengthValue length;   // L_m = 2 acosh(3m/2)
  double bound_ratio = 0;  // size / (log log 3m)^2, m >= 2
};

inline constexpr long kDefaultSearchBudget = 20'000'000;

// Exhaustive tree search pruned by monotone trace growth; modular only.
FiberRecord markoff_fiber(const SurfaceContext& ctx, const mpz_class& m,
                          long node_budget = kDefaultSearchBudget);

struct MultiplicityResult {
  PrimitiveClass target;
  std::vector<PrimitiveClass> witnesses;  // classes at the same length level
  bool undecided = false;  // float mode: some pair still overlaps at max_bits
  std::size_t count() const { return witnesses.size(); }
};

// Counts primitive classes (mod sign) at the target's length level. strict
// mode raises EqualityUndecidable instead of returning an undecided cluster.
MultiplicityResult multiplicity(const SurfaceContext& ctx, const PrimitiveClass& target,
                                bool strict = false, long node_budget = kDefaultSearchBudget);

// Closed angular sector [lo, hi] given as exact rational multiples of pi,
// radius an exact rational; counts oriented primitive vectors of Euclidean
// norm <= r with direction in the sector. Boundary ties are decided exactly
// (a lattice direction has angle a rational multiple of pi only on the
// compass directions).
struct SectorQuery {
  mpq_class lo_pi;  // angle / pi
  mpq_class hi_pi;
  mpq_class r;
};

long sector_direction_count(const SectorQuery& q);

struct SectorScanRow {
  SectorQuery query;
  long count = 0;
  bool within_bound = false;  // count <= theta r^2 + 4, certified
};

struct SectorScanResult {
  std::vector<SectorScanRow> rows;
  bool all_within = true;
};

SectorScanResult sector_bound_scan(int samples, long rmax, std::uint64_t seed,
                                   ExecMode mode = ExecMode::serial);

struct ActiveGapReport {
  std::int64_t H = 1;
  std::string label;
  long active_count = 0;
  std::vector<std::uint32_t> gap_ids;
};

ActiveGapReport active_gaps(const SurfaceContext& ctx, std::int64_t H, const mpz_class& m);
ActiveGapReport active_gaps(const SurfaceContext& ctx, std::int64_t H,
                            const PrimitiveClass& target);

struct LevelGroup {
  std::vector<PrimitiveClass> members;
  Interval length;
  mpz_class m;            // modular label, 0 otherwise
  bool undecided = false;  // float-mode certified-overlap cluster
};

struct LevelScan {
  std::int64_t height_bound = 1;
  std::vector<LevelGroup> groups;              // sorted by length
  std::vector<std::pair<long, long>> histogram;  // (multiplicity, #groups), decided only
  long max_multiplicity = 0;                   // over decided groups
  long max_undecided_cluster = 0;
};

LevelScan boundary_lattice_scan(const SurfaceContext& ctx, std::int64_t height_bound,
                                ExecMode mode = ExecMode::serial);

struct JarnikArcRow {
  std::uint32_t gap_id = 0;
  long count = 0;            // level classes inside this gap (per positive arc)
  double chord_len = 0;      // lower bound on the dilated arc length
  double tangent_len = 0;    // upper bound via the support-line apex
  double turn = 0;
  double bound = 0;  // 64 * (chord^{2/3} turn^{1/3} + 1)
  bool within = false;
};

struct JarnikReport {
  mpz_class m;
  Interval R;  // the dilation, L_m
  std::int64_t H = 1;
  long total_unoriented = 0;
  long at_grid = 0;  // level classes of height <= H (arc counts exclude these)
  std::vector<JarnikArcRow> arcs;
  double max_ratio = 0;
  bool all_within = true;
};

inline constexpr double kJarnikConstant = 64.0;

JarnikReport jarnik_arc_check(const SurfaceContext& ctx, const mpz_class& m, std::int64_t H,
                              ExecMode mode = ExecMode::serial);

}  // namespace mrball
