#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cramer {

/// Failure categories raised by the library. Each maps to one documented
/// precondition or numerical failure of an operation.
enum class Errc {
  invalid_argument,
  domain_violation,
  quadrature_unsupported,
  not_converged,
  limit_unsupported,
  rank_deficient,
  codim_unsupported,
  degenerate_fiber,
  unbounded_fiber,
  sampling_unsupported,
  no_interior_dual,
  unbounded,
  infeasible,
  too_large,
  degenerate_vertex,
  near_pole,
  unsupported_dimension,
  pole_violation,
  mixed_chamber,
  not_positive_definite,
  dependent_constraints,
  dimension_unsupported,
  invalid_rate,
  step_too_large,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::domain_violation: return "DomainViolation";
    case Errc::quadrature_unsupported: return "QuadratureUnsupported";
    case Errc::not_converged: return "NotConverged";
    case Errc::limit_unsupported: return "LimitUnsupported";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::codim_unsupported: return "CodimUnsupported";
    case Errc::degenerate_fiber: return "DegenerateFiber";
    case Errc::unbounded_fiber: return "UnboundedFiber";
    case Errc::sampling_unsupported: return "SamplingUnsupported";
    case Errc::no_interior_dual: return "NoInteriorDual";
    case Errc::unbounded: return "Unbounded";
    case Errc::infeasible: return "Infeasible";
    case Errc::too_large: return "TooLarge";
    case Errc::degenerate_vertex: return "DegenerateVertex";
    case Errc::near_pole: return "NearPole";
    case Errc::unsupported_dimension: return "UnsupportedDimension";
    case Errc::pole_violation: return "PoleViolation";
    case Errc::mixed_chamber: return "MixedChamber";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::dependent_constraints: return "DependentConstraints";
    case Errc::dimension_unsupported: return "DimensionUnsupported";
    case Errc::invalid_rate: return "InvalidRate";
    case Errc::step_too_large: return "StepTooLarge";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace cramer
