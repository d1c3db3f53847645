#pragma once

#include <vector>

#include "filament/diagnostics.hpp"
#include "filament/flow.hpp"

namespace filament {

/// Reach estimate: min(smallest osculating radius, 0.95 × half the shortest
/// double-normal chord between arcs further apart than π R_min). Throws
/// ReferenceTooSingular below 10 Δx.
double security_radius(const ClosedCurve& curve);

/// Nearest-point projection onto one time slice of a smooth reference.
struct Projection {
  double s = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  double distance = 0.0;
};

/// γ_t for one t: nodes plus the trigonometric interpolant, with the tube
/// field f(d²) τ(P(x)) of radius r.
class TubeSlice {
 public:
  TubeSlice(PeriodicInterpolant curve, Points nodes, double tube_radius);

  /// Projection by nearest node then Newton in s. Only meaningful within
  /// the tube.
  Projection project(const Vec3& x) const;
  /// X_{γ,r}(x); exactly zero at distance ≥ r.
  Vec3 field(const Vec3& x) const;
  double tube_radius() const { return r_; }
  const Points& nodes() const { return nodes_; }

 private:
  PeriodicInterpolant curve_;
  Points nodes_;
  double r_;
  double spacing_;
};

/// f(d²) = (1 - d²/r²)³ on [0, r²], 0 beyond.
double tube_profile(double d2, double r);

struct ReferenceFrameInfo {
  double t = 0.0;
  double sup_curvature = 0.0;   // sup |γ_ss|
  double sup_third = 0.0;       // sup |γ_sss|
  double security_radius = 0.0;
};

/// A smooth reference flow with its tube radius r and constant K.
class ReferenceFlow {
 public:
  explicit ReferenceFlow(const Trajectory& traj);

  const FlowInterpolant& flow() const { return flow_; }
  const std::vector<ReferenceFrameInfo>& frames() const { return info_; }
  double tube_radius() const { return r_; }
  double sup_third() const { return sup_third_; }
  /// Spacing between reference frames.
  double frame_interval() const { return frame_interval_; }
  double t_begin() const { return flow_.t_begin(); }
  double t_end() const { return flow_.t_end(); }

  TubeSlice slice(double t) const;
  Vec3 field(const Vec3& x, double t) const { return slice(t).field(x); }

 private:
  FlowInterpolant flow_;
  std::vector<ReferenceFrameInfo> info_;
  double r_ = 0.0;
  double sup_third_ = 0.0;
  double frame_interval_ = 0.0;
};

/// K = 54 / r² + 14 sup|γ_sss|.
double K_constant(double tube_radius, double sup_third);
double K_constant(const ReferenceFlow& ref);

struct FG {
  double F = 0.0;
  double G = 0.0;
};

/// F = Σ θ (1 - X·ξ), G = mass0 - Σ θ X·ξ. Throws InvalidArgument on a
/// non-unit direction.
FG compute_FG(const TubeSlice& slice, const VarifoldSample& sample, double mass0);
FG compute_FG(const ReferenceFlow& ref, const VarifoldSample& sample, double t, double mass0);

/// Per-atom lower bounds of the F integrand: the tilt bound (½|τ∘P - ξ|²
/// where τ·ξ ≥ 0 inside the tube, 1 elsewhere) and the distance bound
/// min(d²/r², 1).
struct FLowerBounds {
  Eigen::VectorXd integrand;
  Eigen::VectorXd tilt;
  Eigen::VectorXd distance;
};
FLowerBounds f_lower_bounds(const TubeSlice& slice, const VarifoldSample& sample);

struct WaouTerms {
  double lhs = 0.0;     // |∂t X·ξ - D(curl X):(ξ⊗ξ)|
  double rhs = 0.0;     // K (1 - X·ξ)
  double margin = 0.0;  // rhs - lhs
};

/// Both sides of the pointwise estimate at (x, ξ, t), with fourth-order
/// central differences of step h (space) and ht (time). h ≤ 0 and ht ≤ 0
/// pick r/200 and a quarter of the frame interval.
WaouTerms waou_terms(const ReferenceFlow& ref, const Vec3& x, const Vec3& xi, double t,
                     double h = 0.0, double ht = 0.0, double K = 0.0);
double waou_margin(const ReferenceFlow& ref, const Vec3& x, const Vec3& xi, double t,
                   double h = 0.0, double ht = 0.0);

struct FGReport {
  double K = 0.0;
  double mass0 = 0.0;
  double slack = 0.0;
  std::vector<double> t;
  std::vector<double> F;
  std::vector<double> G;
  std::vector<double> envelope;  // G(0) e^{K t}
  bool envelope_ok = true;
  bool derivative_ok = true;
  bool ordering_ok = true;       // 0 ≤ F ≤ G (to rounding)
  double worst_envelope_ratio = 0.0;    // max G / envelope
  double worst_derivative_ratio = 0.0;  // max |ΔG/Δt| / (K max(F_k, F_k+1))

  bool passed() const { return envelope_ok && derivative_ok && ordering_ok; }
};

/// F and G of `tested` against `ref` at every tested frame inside the
/// reference window. K ≤ 0 uses K_constant(ref).
FGReport gronwall_check(const ReferenceFlow& ref, const Trajectory& tested, double slack,
                        double K = 0.0);

}  // namespace filament
