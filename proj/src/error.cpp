#include "filament/error.hpp"

namespace filament {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DegenerateSampling: return "degenerate_sampling";
    case ErrorKind::ClosureGap: return "closure_gap";
    case ErrorKind::CflViolation: return "cfl_violation";
    case ErrorKind::FixedPointDivergence: return "fixed_point_divergence";
    case ErrorKind::ReferenceTooSingular: return "reference_too_singular";
    case ErrorKind::TubeSelfIntersection: return "tube_self_intersection";
    case ErrorKind::MomentProblemInfeasible: return "moment_problem_infeasible";
    case ErrorKind::BoundInapplicable: return "bound_inapplicable";
    case ErrorKind::DegeneratePair: return "degenerate_pair";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace filament
