#pragma once

#include <Eigen/Dense>

#include <functional>
#include <variant>
#include <vector>

#include "filament/error.hpp"

namespace filament {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Column n is the n-th sample; indices are cyclic.
using Points = Eigen::Matrix3Xd;

inline Eigen::Index wrap(Eigen::Index n, Eigen::Index size) {
  const Eigen::Index r = n % size;
  return r < 0 ? r + size : r;
}

/// Uniformly arclength-sampled closed curve. Closure is implicit: the sample
/// after the last one is the first one.
class ClosedCurve {
 public:
  static constexpr Eigen::Index kMinSamples = 8;
  /// Corners of a polygon fall between samples, so the chord across a corner
  /// can be as short as Δx/√2.
  static constexpr double kDefaultChordTolerance = 0.35;

  ClosedCurve(Points points, double length,
              double chord_tolerance = kDefaultChordTolerance);

  Eigen::Index size() const { return points_.cols(); }
  const Points& points() const { return points_; }
  Vec3 point(Eigen::Index n) const { return points_.col(wrap(n, size())); }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(size()); }

  Vec3 centroid() const { return points_.rowwise().mean(); }
  /// Sum of the chord lengths |x_{n+1} - x_n|.
  double polygon_length() const;
  ClosedCurve translated(const Vec3& shift) const;
  ClosedCurve transformed(const Mat3& rotation, const Vec3& shift) const;

 private:
  Points points_;
  double length_;
};

/// Periodic field of (nominally) unit tangents, the state of the solver.
class TangentField {
 public:
  TangentField(Points units, double spacing, Vec3 basepoint);

  Eigen::Index size() const { return units_.cols(); }
  const Points& units() const { return units_; }
  Points& units() { return units_; }
  Vec3 unit(Eigen::Index n) const { return units_.col(wrap(n, size())); }
  double spacing() const { return spacing_; }
  double length() const { return spacing_ * static_cast<double>(size()); }
  const Vec3& basepoint() const { return basepoint_; }
  void set_basepoint(const Vec3& p) { basepoint_ = p; }

  /// max_n | |u_n| - 1 |; a diagnostic, never enforced.
  double unit_defect() const;
  /// Σ_n u_n Δx: the displacement left over after walking around the loop.
  Vec3 closure_gap() const;

 private:
  Points units_;
  double spacing_;
  Vec3 basepoint_;
};

// --- curve <-> tangents ---------------------------------------------------

/// Subtract the mean tangent and renormalize until the closure gap drops
/// below `relative_tol * length` or `max_iters` is reached.
void project_closure(TangentField& u, double relative_tol = 1e-12,
                     int max_iters = 50);

/// Forward unit chords followed by one closure projection; basepoint = x_0.
TangentField tangents_of(const ClosedCurve& curve);

/// x_0 = basepoint, x_{n+1} = x_n + Δx u_n, with the closure defect removed
/// by a uniform per-step correction. Fails with ErrorKind::ClosureGap when
/// |Σ u_n Δx| exceeds `tol_close`.
ClosedCurve reconstruct(const TangentField& u, double tol_close = 1e-6);

/// κ_n = |u_{n+1} - u_n| / Δx.
Eigen::VectorXd discrete_curvature(const TangentField& u);

// --- generators -----------------------------------------------------------

ClosedCurve make_circle(double radius, const Vec3& center, const Vec3& normal,
                        Eigen::Index n);

/// Uniform arclength sampling of the closed polygon through `vertices`;
/// no sample lands on a vertex.
ClosedCurve make_polygon(const std::vector<Vec3>& vertices, Eigen::Index n);

std::vector<Vec3> unit_square_vertices();
/// Petrie hexagon of the unit cube (six edges, three-fold symmetric).
std::vector<Vec3> half_cube_vertices();

/// (cos(ks)/k, sin(ks)/k, 0) on s ∈ [0, 2π): a circle of radius 1/k run k times.
ClosedCurve make_bullet(int n_twist, Eigen::Index n);

/// Arclength-uniform samples of a closed parametric curve p ↦ f(p), p ∈ [0,1).
ClosedCurve make_parametric(const std::function<Vec3(double)>& f,
                            Eigen::Index n);

struct HelixWrap {
  ClosedCurve curve;
  double tube_radius;
  int turns;
  /// ℓ_wrapped / ℓ_base.
  double length_ratio;
};

/// Helix of `turns` windings on the tube of radius `tube_radius` around a
/// smooth base curve.
HelixWrap wrap_helix(const ClosedCurve& base, int turns, double tube_radius,
                     Eigen::Index n);

/// Bisection on the tube radius until ℓ_wrapped / ℓ_base is within
/// `rel_tol` of `target_ratio`.
HelixWrap wrap_helix_to_ratio(const ClosedCurve& base, int turns,
                              double target_ratio, Eigen::Index n,
                              double rel_tol = 1e-3);

/// Periodic cubic spline through the samples (chord-length knots), sampled
/// at uniform spline arclength.
ClosedCurve resample(const ClosedCurve& curve, Eigen::Index n_new);

/// Smallest osculating radius, from spectral derivatives of the samples.
double min_osculating_radius(const ClosedCurve& curve);

/// Symmetric Hausdorff distance between the two sample sets.
double hausdorff_distance(const ClosedCurve& a, const ClosedCurve& b);

// --- generator records ----------------------------------------------------

struct CircleParams {
  double radius = 1.0;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};
struct PolygonParams {
  std::vector<Vec3> vertices;
};
struct BulletParams {
  int n_twist = 1;
};
struct HelixWrapParams {
  CircleParams base;
  int turns = 16;
  /// When positive, the tube radius is found by bisection on the length ratio.
  double target_ratio = 0.0;
  double tube_radius = 0.0;
};

using CurveFamily =
    std::variant<CircleParams, PolygonParams, BulletParams, HelixWrapParams>;

ClosedCurve generate(const CurveFamily& family, Eigen::Index n);

}  // namespace filament
