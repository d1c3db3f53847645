#pragma once

#include <array>
#include <span>

#include "filament/curve.hpp"

namespace filament {

/// Trigonometric interpolant of N equispaced samples of a periodic curve.
/// Evaluation and differentiation are exact for band-limited data.
class PeriodicInterpolant {
 public:
  PeriodicInterpolant(const Points& samples, double period);

  /// Σ_i w_i p_i; all interpolants must share sample count and period.
  static PeriodicInterpolant combine(std::span<const double> weights,
                                     std::span<const PeriodicInterpolant* const> parts);

  Eigen::Index sample_count() const { return n_; }
  double period() const { return period_; }

  Vec3 value(double s) const { return jet(s, 0)[0]; }
  /// Value and derivatives up to `order` (≤ 3) at s.
  std::array<Vec3, 4> jet(double s, int order = 3) const;

  /// d^order/ds^order evaluated back on the sample nodes.
  Points derivative_at_nodes(int order) const;

 private:
  PeriodicInterpolant() = default;

  Eigen::Index n_ = 0;
  double period_ = 0.0;
  Vec3 mean_ = Vec3::Zero();
  Points cos_;  // k = 1..K
  Points sin_;
  Vec3 nyquist_ = Vec3::Zero();
  bool has_nyquist_ = false;
};

/// Curvature |γ' × γ''| / |γ'|³ at every node, parametrization independent.
Eigen::VectorXd spectral_curvature(const PeriodicInterpolant& p);

}  // namespace filament
