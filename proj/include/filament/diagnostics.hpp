#pragma once

#include <functional>
#include <string>
#include <vector>

#include "filament/solver.hpp"

namespace filament {

// --- currents -------------------------------------------------------------

/// One closed loop of atoms: positions x_n and weight vectors w_n.
struct CurrentLoop {
  Points positions;
  Points weights;
};

/// A boundary-free 1-current stored as weighted point-tangent atoms. A union
/// of several loops keeps the loops apart, so every functional of the union
/// is the sum of the per-loop values.
class SampledCurrent {
 public:
  SampledCurrent() = default;
  /// Throws InvalidArgument unless |Σ w_n| ≤ 1e-10 · mass.
  SampledCurrent(Points positions, Points weights);

  const std::vector<CurrentLoop>& loops() const { return loops_; }
  Eigen::Index atom_count() const;
  double mass() const;
  /// Σ_n w_n; zero for a closed loop.
  Vec3 boundary() const;

  /// Disjoint union.
  SampledCurrent& append(const SampledCurrent& other);
  SampledCurrent scaled(double factor) const;

 private:
  std::vector<CurrentLoop> loops_;
};

SampledCurrent disjoint_union(const SampledCurrent& a, const SampledCurrent& b);

/// Atoms at the samples with central-chord weights (x_{n+1} - x_{n-1}) / 2.
SampledCurrent current_of(const ClosedCurve& curve);

/// Atoms (x, ξ, θ) on R³ × S²; `site` records which current atom each one
/// was attached to.
struct VarifoldSample {
  Points positions;
  Points directions;
  Eigen::VectorXd weights;
  std::vector<Eigen::Index> site;

  Eigen::Index size() const { return positions.cols(); }
  double mass() const { return weights.sum(); }
  /// Σ θ ξ, the undercurrent paired with a constant field.
  Vec3 first_moment_total() const;
};

/// One atom per current atom: ξ = w/|w|, θ = |w|.
VarifoldSample varifold_of(const SampledCurrent& current);

// --- test fields ----------------------------------------------------------

enum class FieldFamily { Momentum, Angular, GaussianBump, GradientBump, CutoffShifted };

std::string_view to_string(FieldFamily family);

struct Box {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);

  bool contains(const Vec3& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  static Box around(const Points& points, double margin);
};

/// Radial cut-off χ: 1 on [0, M/2], 0 on [M, ∞), C², |χ'| ≤ 3/M.
struct Cutoff {
  double scale = 1.0;

  double value(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
};

/// A smooth vector field with analytic curl and D(curl), and sup norms over
/// its declared box (computed once, at construction).
class TestField {
 public:
  using VecFn = std::function<Vec3(const Vec3&)>;
  using MatFn = std::function<Mat3(const Vec3&)>;

  TestField(FieldFamily family, std::string name, VecFn value, VecFn curl, MatFn dcurl,
            Box box, double sup_value, double sup_curl);

  FieldFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  const Box& box() const { return box_; }
  double sup_value() const { return sup_value_; }
  double sup_curl() const { return sup_curl_; }

  Vec3 value(const Vec3& x) const { return value_(x); }
  Vec3 curl(const Vec3& x) const { return curl_(x); }
  /// Entry (i, j) is ∂_j (curl X)_i.
  Mat3 dcurl(const Vec3& x) const { return dcurl_(x); }

  /// X_i = e_i × x: (0, -x3, x2), (x3, 0, -x1), (-x2, x1, 0).
  static TestField momentum(int axis, const Box& box);
  /// Y_i = x × (x × e_i), e.g. Y_1 = (-x2² - x3², x1 x2, x1 x3).
  static TestField angular(int axis, const Box& box);
  /// A exp(-|x - c|² / 2w²).
  static TestField gaussian_bump(const Vec3& center, const Vec3& amplitude, double width);
  /// ∇ exp(-|x - c|² / 2w²); curl-free.
  static TestField gradient_bump(const Vec3& center, double width);
  /// χ(|x - a|) X_i(x - a) - χ(|x - b|) X_i(x - b) with cut-off scale M.
  static TestField cutoff_shifted(int axis, const Vec3& a, const Vec3& b, double scale);

 private:
  FieldFamily family_;
  std::string name_;
  VecFn value_;
  VecFn curl_;
  MatFn dcurl_;
  Box box_;
  double sup_value_;
  double sup_curl_;
};

/// Largest |f| over a uniform grid of `per_axis`³ points in the box.
double grid_sup(const std::function<Vec3(const Vec3&)>& f, const Box& box, int per_axis = 64);

// --- functionals ----------------------------------------------------------

/// T(X) = Σ X(x_n) · w_n.
double pair(const SampledCurrent& current, const TestField& field);

/// P = Σ x_n × w_n, directly.
Vec3 momentum(const SampledCurrent& current);
/// ∫ γ × γ_s by the trapezoidal rule with spectral γ_s (exact to rounding
/// for smooth curves).
Vec3 momentum(const ClosedCurve& curve);
/// Q = Σ x_n × (x_n × w_n), directly.
Vec3 angular_momentum(const SampledCurrent& current);
/// ∫ γ × (γ × γ_s), as for momentum(curve).
Vec3 angular_momentum(const ClosedCurve& curve);
/// (T(X_1), T(X_2), T(X_3)) and (T(Y_1), T(Y_2), T(Y_3)).
Vec3 momentum_by_pairing(const SampledCurrent& current);
Vec3 angular_momentum_by_pairing(const SampledCurrent& current);

/// Σ_n D(curl X)(x_n) : (τ_n ⊗ τ_n) Δx with τ_n the central-chord direction.
double weak_rhs(const ClosedCurve& curve, const TestField& field);

/// [T_{t+δ}(X) - T_{t-δ}(X)] / 2δ + Σ D(curl X) : (τ ⊗ τ) Δx at time t.
/// δ ≤ 0 selects the default of four output strides.
double weakform_residual(const Trajectory& traj, const TestField& field, double t,
                         double delta = 0.0);

/// |T_{t1}(X) - T_{t2}(X)| / (‖curl X‖_∞ √mass(T_0) √|t1 - t2|).
double flat_pair_ratio(const Trajectory& traj, const TestField& field, double t1, double t2);

struct SpeedBoundReport {
  double mass = 0.0;
  double momentum = 0.0;        // |P(T_0)|
  double bound_ratio = 0.0;     // ‖T_0‖³ / |P(T_0)|²
  std::vector<double> times;
  std::vector<double> displacement;  // sup distance of supp(T_t) from supp(T_0)
  double max_speed = 0.0;       // max displacement(t) / t
  double c_hat = 0.0;           // max_speed / bound_ratio
};

/// Fails with BoundInapplicable when P(T_0) vanishes.
SpeedBoundReport speed_bound_check(const Trajectory& traj);

/// max over a of min over b |a - b|.
double directed_hausdorff(const Points& from, const Points& to);

}  // namespace filament
