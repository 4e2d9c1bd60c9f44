#pragma once

#include <gmpxx.h>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mrball/interval.hpp"
#include "mrball/precision.hpp"
#include "mrball/primitive.hpp"

namespace mrball {

enum class SurfaceKind { modular, triple };

// Trace label of a primitive class: exact integer in modular mode, certified
// enclosure otherwise. approx is always populated.
struct TraceValue {
  std::optional<mpz_class> exact;
  Interval approx;
  long prec_bits = 0;

  bool is_exact() const { return exact.has_value(); }
};

struct BasisTraces {
  Interval x, y, z;  // traces of (1,0), (0,1), (1,1)
};

class TraceCache;

// Validated trace triple on the Markoff variety x^2+y^2+z^2 = xyz, plus the
// precision policy. Immutable; basis traces are re-derived from the decimal
// inputs at any requested precision, with z re-projected onto the variety.
class SurfaceContext {
 public:
  static SurfaceContext modular(PrecisionPolicy pol = {});
  static SurfaceContext from_triple(const std::string& x, const std::string& y,
                                    const std::string& z, PrecisionPolicy pol = {});

  SurfaceKind kind() const { return kind_; }
  bool is_modular() const { return kind_ == SurfaceKind::modular; }
  const PrecisionPolicy& policy() const { return pol_; }
  const std::string& fingerprint() const { return fingerprint_; }

  BasisTraces basis(long bits) const;

  void attach_cache(std::shared_ptr<TraceCache> cache) { cache_ = std::move(cache); }
  TraceCache* cache() const { return cache_.get(); }

 private:
  SurfaceContext() = default;

  SurfaceKind kind_ = SurfaceKind::modular;
  std::string x_str_, y_str_, z_str_;
  bool z_root_is_plus_ = true;  // which quadratic root the input z projected to
  PrecisionPolicy pol_;
  std::string fingerprint_;
  std::shared_ptr<TraceCache> cache_;
};

// Relative residual tolerance used by surface validation; the paper gives no
// tolerance, re-projection afterwards makes z exact at working precision.
inline constexpr double kVarietyTolerance = 1e-9;

TraceValue vieta_flip(const TraceValue& x, const TraceValue& y, const TraceValue& z_old);

// Trace of gamma_w via the Fricke recursion along the Stern-Brocot path.
TraceValue trace(const SurfaceContext& ctx, const PrimitiveClass& w);

// Raw enclosure at a requested working precision, for adaptive callers that
// manage their own certification loop. Exact-integer conversion in modular
// mode, interval descent otherwise.
Interval trace_enclosure(const SurfaceContext& ctx, const PrimitiveClass& w, long bits);

// zz' = x^2 + y^2, exact or within the certified policy tolerance.
bool fricke_product_check(const TraceValue& x, const TraceValue& y, const TraceValue& z,
                          const TraceValue& zp);

struct SinkTriangle {
  std::array<PrimitiveClass, 3> labels;
  std::array<TraceValue, 3> traces;
  std::int64_t H0 = 1;
  long descent_steps = 0;
};

inline constexpr long kDefaultDescentBudget = 1'000'000;

SinkTriangle bowditch_sink(const SurfaceContext& ctx, long budget = kDefaultDescentBudget);

struct MarkoffRecord {
  mpz_class a, b, c;                     // a <= b <= c, a^2+b^2+c^2 = 3abc
  std::array<PrimitiveClass, 3> classes;  // carrying traces 3a, 3b, 3c
};

std::vector<MarkoffRecord> markoff_tree(const SurfaceContext& ctx, const mpz_class& max_c);

// Persistent trace store: JSON Lines, one record per class,
// {"p":..,"q":..,"prec_bits":..,"trace":"<decimal>"} with prec_bits 0 for
// exact integers. Loaded fully at construction, rewritten sorted on flush.
class TraceCache {
 public:
  explicit TraceCache(std::filesystem::path file);
  ~TraceCache();

  std::optional<TraceValue> get(const PrimitiveClass& w, long min_bits) const;
  void put(const PrimitiveClass& w, const TraceValue& value);
  void flush();
  std::size_t size() const;

  static std::filesystem::path file_for(const std::filesystem::path& dir,
                                        const std::string& fingerprint);

 private:
  struct Entry {
    long prec_bits;
    std::string digits;
  };

  std::filesystem::path file_;
  mutable std::shared_mutex mu_;
  std::map<std::pair<std::int64_t, std::int64_t>, Entry> entries_;
  bool dirty_ = false;
};

// Resolves the cache directory: MRBALL_CACHE_DIR overrides the configured one.
std::optional<std::filesystem::path> resolve_cache_dir(const std::string& configured);

}  // namespace mrball
