#pragma once

#include <vector>

#include "filament/diagnostics.hpp"
#include "filament/flow.hpp"

namespace filament {

/// a_m = ½(3/m - m), the slowest admissible speed factor for mass ratio m.
double a_min(double m);

struct ModifiedSpeedParams {
  double m = 1.0;
  double a = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
};

/// α = (2a + 3 + m) / (3(1 + m)), β = (mα - 1) / (1 + α). Throws
/// MomentProblemInfeasible for a outside [a_min(m), m].
ModifiedSpeedParams alpha_beta(double m, double a);

/// Weighted atoms on S².
struct SphereMeasure {
  Points directions;
  Eigen::VectorXd weights;
  // provenance
  double m = 0.0;
  double a = 0.0;
  Vec3 xi0 = Vec3::UnitZ();
  int n_quad = 0;

  Eigen::Index size() const { return directions.cols(); }
  double mass() const { return weights.sum(); }
};

/// μ[ξ₀, α]: n equal atoms of weight 1/(α n) on the circle {ξ·ξ₀ = α}.
SphereMeasure circle_measure(const Vec3& xi0, double alpha, int n_quad);

/// W^{m,a}[ξ₀] = (1 + β) μ[ξ₀, α] + β δ_{-ξ₀}. The circle collapses to one
/// atom at α = 1 and the antipodal atom is dropped at β = 0.
SphereMeasure build_W(double m, double a, const Vec3& xi0, int n_quad = 64);

struct SphereMoments {
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
};

SphereMoments moments(const SphereMeasure& w);
/// The speed factor a that a second moment a ξ₀⊗ξ₀ + (m-a)/3 Id would
/// carry: (3 ξ₀ᵀ S ξ₀ - m) / 2 with m = trace S.
double implied_a(const SphereMoments& mom, const Vec3& xi0);
SphereMoments expected_moments(double m, double a, const Vec3& xi0);

/// The undercurrent of V^{m,a}_t (the reference current at time a t) with
/// W^{m,a}[τ] attached at every atom.
struct ModifiedFlowSample {
  double reference_time = 0.0;
  SampledCurrent current;
  VarifoldSample varifold;
};

ModifiedFlowSample modified_undercurrent(const FlowInterpolant& ref, double m, double a, double t,
                                         int n_quad = 64);

/// Σ_k ρ_k V^{m,a_k}_t. `rho` are quadrature weights (ρ(a_k) Δa) summing to one.
ModifiedFlowSample mixture(const FlowInterpolant& ref, double m, const std::vector<double>& a_nodes,
                           const std::vector<double>& rho, double t, int n_quad = 64);

/// Midpoint nodes and equal weights for the uniform density on [a_min(m), m].
void uniform_mixture(double m, int count, std::vector<double>& a_nodes, std::vector<double>& rho);

/// Step function a(τ) = values[i] on [breaks[i], breaks[i+1]), breaks[0] = 0,
/// the last value extending to infinity.
struct StepSpeed {
  std::vector<double> breaks;
  std::vector<double> values;

  double at(double tau) const;
  /// ∫₀^τ a.
  double integral(double tau) const;
};

/// V_τ = V^{m, a(τ)}_{t(τ)} with t(τ) = (1/a(τ)) ∫₀^τ a.
ModifiedFlowSample reparametrized(const FlowInterpolant& ref, double m, const StepSpeed& speed,
                                  double tau, int n_quad = 64);

}  // namespace filament
