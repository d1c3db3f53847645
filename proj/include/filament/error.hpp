#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace filament {

enum class ErrorKind {
  InvalidArgument,
  DegenerateSampling,
  ClosureGap,
  CflViolation,
  FixedPointDivergence,
  ReferenceTooSingular,
  TubeSelfIntersection,
  MomentProblemInfeasible,
  BoundInapplicable,
  DegeneratePair,
  OutOfRange,
  Io,
};

/// Stable machine-readable name for an error kind, e.g. "closure_gap".
std::string_view to_string(ErrorKind kind);

/// Numerical or contract failure. `value()` carries the offending magnitude
/// (closure gap, last fixed-point residual, ...) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, double value = 0.0)
      : std::runtime_error(message), kind_(kind), value_(value) {}

  ErrorKind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

}  // namespace filament
