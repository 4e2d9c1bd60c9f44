#pragma once

#include <stdexcept>
#include <string>

namespace mrball {

enum class Errc {
  zero_vector,
  bound_too_large,
  determinant_violation,
  degenerate_basis,
  not_on_variety,
  non_hyperbolic,
  precision_exhausted,
  descent_budget_exceeded,
  modular_only,
  not_markoff,
  equality_undecidable,
  turn_ambiguous,
  rational_target,
  overflow_budget,
  support_unstable,
  invalid_argument,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::zero_vector: return "ZeroVector";
    case Errc::bound_too_large: return "BoundTooLarge";
    case Errc::determinant_violation: return "DeterminantViolation";
    case Errc::degenerate_basis: return "DegenerateBasis";
    case Errc::not_on_variety: return "NotOnVariety";
    case Errc::non_hyperbolic: return "NonHyperbolic";
    case Errc::precision_exhausted: return "PrecisionExhausted";
    case Errc::descent_budget_exceeded: return "DescentBudgetExceeded";
    case Errc::modular_only: return "ModularOnly";
    case Errc::not_markoff: return "NotMarkoff";
    case Errc::equality_undecidable: return "EqualityUndecidable";
    case Errc::turn_ambiguous: return "TurnAmbiguous";
    case Errc::rational_target: return "RationalTarget";
    case Errc::overflow_budget: return "OverflowBudget";
    case Errc::support_unstable: return "SupportUnstable";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace mrball
