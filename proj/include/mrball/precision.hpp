#pragma once

#include <optional>

#include "mrball/errors.hpp"
#include "mrball/interval.hpp"

namespace mrball {

struct PrecisionPolicy {
  long base_bits = 256;
  long max_bits = 1 << 16;
  double agreement_tolerance = 1e-30;  // certified relative width to accept

  void validate() const {
    if (base_bits < 64) raise(Errc::invalid_argument, "base_bits must be >= 64");
    if (max_bits < base_bits) raise(Errc::invalid_argument, "max_bits must be >= base_bits");
  }
};

// Evaluates f at doubling precision until it returns a value. f(bits) returns
// nullopt (or throws Errc::precision_exhausted) to request a retry at higher
// precision. Corner atoms shrink like e^{-C*height} while traces grow like
// e^{c*height}, so most call sites cannot know the needed bits up front.
template <typename F>
auto adaptive(const PrecisionPolicy& pol, F&& f) {
  for (long bits = pol.base_bits;; bits *= 2) {
    if (bits > pol.max_bits) break;
    try {
      auto r = f(bits);
      if (r.has_value()) return *r;
    } catch (const Error& e) {
      if (e.code() != Errc::precision_exhausted) throw;
    }
  }
  raise(Errc::precision_exhausted, "no certified result within max_bits");
}

}  // namespace mrball
