#include "filament/curve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "filament/spectral.hpp"

namespace filament {

namespace {

constexpr double kPi = std::numbers::pi;

/// Any unit vector orthogonal to `e`.
Vec3 any_orthonormal(const Vec3& e) {
  const Vec3 trial = std::abs(e.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (trial - trial.dot(e) * e).normalized();
}

/// Rotation taking unit `a` onto unit `b` about a × b.
Mat3 minimal_rotation(const Vec3& a, const Vec3& b) {
  const Vec3 c = a.cross(b);
  const double d = a.dot(b);
  Mat3 k;
  k << 0, -c.z(), c.y(), c.z(), 0, -c.x(), -c.y(), c.x(), 0;
  return Mat3::Identity() + k + k * k / (1.0 + d);
}

}  // namespace

// --- ClosedCurve ----------------------------------------------------------

ClosedCurve::ClosedCurve(Points points, double length, double chord_tolerance)
    : points_(std::move(points)), length_(length) {
  if (points_.cols() < kMinSamples) {
    throw Error(ErrorKind::InvalidArgument,
                "closed curve needs at least 8 samples");
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw Error(ErrorKind::InvalidArgument, "curve length must be positive");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "curve has non-finite samples");
  }
  const double dx = spacing();
  for (Eigen::Index n = 0; n < size(); ++n) {
    const double chord = (point(n + 1) - point(n)).norm();
    if (std::abs(chord - dx) > chord_tolerance * dx) {
      std::ostringstream msg;
      msg << "non-uniform sampling: chord " << n << " has length " << chord
          << " against spacing " << dx;
      throw Error(ErrorKind::DegenerateSampling, msg.str(), chord);
    }
  }
}

double ClosedCurve::polygon_length() const {
  double total = 0.0;
  for (Eigen::Index n = 0; n < size(); ++n) total += (point(n + 1) - point(n)).norm();
  return total;
}

ClosedCurve ClosedCurve::translated(const Vec3& shift) const {
  Points moved = points_.colwise() + shift;
  return ClosedCurve(std::move(moved), length_, 1.0);
}

ClosedCurve ClosedCurve::transformed(const Mat3& rotation, const Vec3& shift) const {
  Points moved = (rotation * points_).colwise() + shift;
  return ClosedCurve(std::move(moved), length_, 1.0);
}

// --- TangentField ---------------------------------------------------------

TangentField::TangentField(Points units, double spacing, Vec3 basepoint)
    : units_(std::move(units)), spacing_(spacing), basepoint_(std::move(basepoint)) {
  if (units_.cols() < ClosedCurve::kMinSamples) {
    throw Error(ErrorKind::InvalidArgument, "tangent field needs at least 8 samples");
  }
  if (!(spacing_ > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tangent spacing must be positive");
  }
}

double TangentField::unit_defect() const {
  return (units_.colwise().norm().array() - 1.0).abs().maxCoeff();
}

Vec3 TangentField::closure_gap() const {
  return units_.rowwise().sum() * spacing_;
}

// --- conversions ----------------------------------------------------------

void project_closure(TangentField& u, double relative_tol, int max_iters) {
  const double target = relative_tol * u.length();
  for (int it = 0; it < max_iters; ++it) {
    if (u.closure_gap().norm() < target) return;
    const Vec3 mean = u.units().rowwise().mean();
    u.units().colwise() -= mean;
    u.units().colwise().normalize();
  }
}

TangentField tangents_of(const ClosedCurve& curve) {
  const Eigen::Index n = curve.size();
  Points units(3, n);
  const double floor = std::numeric_limits<double>::epsilon() * curve.length();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 chord = curve.point(i + 1) - curve.point(i);
    const double len = chord.norm();
    if (len < floor) {
      throw Error(ErrorKind::DegenerateSampling, "degenerate sampling", len);
    }
    units.col(i) = chord / len;
  }
  TangentField u(std::move(units), curve.spacing(), curve.point(0));
  project_closure(u);
  return u;
}

ClosedCurve reconstruct(const TangentField& u, double tol_close) {
  const Vec3 gap = u.closure_gap();
  if (gap.norm() > tol_close) {
    std::ostringstream msg;
    msg << "tangent field does not close: gap " << gap.norm();
    throw Error(ErrorKind::ClosureGap, msg.str(), gap.norm());
  }
  const Eigen::Index n = u.size();
  const Vec3 correction = -gap / static_cast<double>(n);
  Points points(3, n);
  points.col(0) = u.basepoint();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    points.col(i + 1) = points.col(i) + u.spacing() * u.units().col(i) + correction;
  }
  return ClosedCurve(std::move(points), u.length());
}

Eigen::VectorXd discrete_curvature(const TangentField& u) {
  Eigen::VectorXd kappa(u.size());
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    kappa(n) = (u.unit(n + 1) - u.unit(n)).norm() / u.spacing();
  }
  return kappa;
}

// --- generators -----------------------------------------------------------

ClosedCurve make_circle(double radius, const Vec3& center, const Vec3& normal,
                        Eigen::Index n) {
  if (n < ClosedCurve::kMinSamples) {
    throw Error(ErrorKind::InvalidArgument, "circle needs N >= 8");
  }
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
  }
  if (std::abs(normal.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "circle normal must be a unit vector");
  }
  // e1 × e2 = normal, so the circle turns right-handedly about the normal
  const Vec3 e1 = any_orthonormal(normal);
  const Vec3 e2 = normal.cross(e1);
  Points points(3, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    points.col(k) = center + radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
  }
  return ClosedCurve(std::move(points), 2.0 * kPi * radius);
}

ClosedCurve make_polygon(const std::vector<Vec3>& vertices, Eigen::Index n) {
  const auto count = static_cast<Eigen::Index>(vertices.size());
  if (count < 3) {
    throw Error(ErrorKind::InvalidArgument, "polygon needs at least 3 vertices");
  }
  if (n < 4 * count || n < ClosedCurve::kMinSamples) {
    throw Error(ErrorKind::InvalidArgument, "polygon needs N >= 4 * vertex count");
  }
  std::vector<double> cumulative(vertices.size() + 1, 0.0);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const double side = (vertices[(i + 1) % vertices.size()] - vertices[i]).norm();
    if (side < 1e-14) {
      throw Error(ErrorKind::InvalidArgument, "polygon has repeated consecutive vertices");
    }
    cumulative[i + 1] = cumulative[i] + side;
  }
  const double length = cumulative.back();
  const double dx = length / static_cast<double>(n);

  // half-step offset keeps samples off the corners unless a corner happens to
  // sit on a half-integer multiple of Δx, in which case shift to a quarter
  double offset = 0.5;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const double frac = cumulative[i] / dx - offset;
    if (std::abs(frac - std::round(frac)) < 1e-6) {
      offset = 0.25;
      break;
    }
  }

  Points points(3, n);
  std::size_t side = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = (static_cast<double>(k) + offset) * dx;
    while (side + 1 < vertices.size() && s >= cumulative[side + 1]) ++side;
    const Vec3& a = vertices[side];
    const Vec3& b = vertices[(side + 1) % vertices.size()];
    const double t = (s - cumulative[side]) / (cumulative[side + 1] - cumulative[side]);
    points.col(k) = a + t * (b - a);
  }
  // chords across sharper corners are shorter than the default allows
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    worst = std::max(worst, std::abs((points.col((k + 1) % n) - points.col(k)).norm() - dx) / dx);
  }
  if (worst >= 0.99) {
    throw Error(ErrorKind::InvalidArgument, "polygon corner too sharp for this N", worst);
  }
  return ClosedCurve(std::move(points), length,
                     std::max(ClosedCurve::kDefaultChordTolerance, worst + 1e-9));
}

std::vector<Vec3> unit_square_vertices() {
  return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
}

std::vector<Vec3> half_cube_vertices() {
  return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0),
          Vec3(1, 1, 1), Vec3(0, 1, 1), Vec3(0, 0, 1)};
}

ClosedCurve make_bullet(int n_twist, Eigen::Index n) {
  if (n_twist < 1) {
    throw Error(ErrorKind::InvalidArgument, "bullet twist must be >= 1");
  }
  if (n < 64 * static_cast<Eigen::Index>(n_twist)) {
    throw Error(ErrorKind::InvalidArgument, "bullet needs N >= 64 * twist");
  }
  const double k = static_cast<double>(n_twist);
  Points points(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    points.col(j) = Vec3(std::cos(k * s) / k, std::sin(k * s) / k, 0.0);
  }
  return ClosedCurve(std::move(points), 2.0 * kPi);
}

namespace {

/// Dense arclength table for p ↦ f(p): two-point Gauss per interval with
/// centred-difference speeds.
std::vector<double> arclength_table(const std::function<Vec3(double)>& f,
                                    Eigen::Index intervals) {
  const double h = 1.0 / static_cast<double>(intervals);
  const double d = 0.25 * h;
  const double g = 0.5 / std::sqrt(3.0);
  auto speed = [&](double p) {
    return (8.0 * (f(p + d) - f(p - d)) - (f(p + 2.0 * d) - f(p - 2.0 * d))).norm() / (12.0 * d);
  };
  std::vector<double> cumulative(static_cast<std::size_t>(intervals) + 1, 0.0);
  for (Eigen::Index i = 0; i < intervals; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * h;
    const double piece = 0.5 * h * (speed(mid - g * h) + speed(mid + g * h));
    cumulative[static_cast<std::size_t>(i) + 1] =
        cumulative[static_cast<std::size_t>(i)] + piece;
  }
  return cumulative;
}

}  // namespace

ClosedCurve make_parametric(const std::function<Vec3(double)>& f, Eigen::Index n) {
  if (n < ClosedCurve::kMinSamples) {
    throw Error(ErrorKind::InvalidArgument, "parametric curve needs N >= 8");
  }
  const Eigen::Index intervals = std::max<Eigen::Index>(16 * n, 4096);
  const std::vector<double> cumulative = arclength_table(f, intervals);
  const double length = cumulative.back();
  const double h = 1.0 / static_cast<double>(intervals);

  Points points(3, n);
  std::size_t i = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double target = length * static_cast<double>(k) / static_cast<double>(n);
    while (i + 2 < cumulative.size() && cumulative[i + 1] <= target) ++i;
    const double span = cumulative[i + 1] - cumulative[i];
    const double frac = span > 0.0 ? (target - cumulative[i]) / span : 0.0;
    points.col(k) = f((static_cast<double>(i) + frac) * h);
  }
  return ClosedCurve(std::move(points), length);
}

// --- helix wrapping -------------------------------------------------------

namespace {

/// Rotation-minimizing normal frame along a smooth closed base curve, with the
/// holonomy spread linearly so the frame closes.
class ClosedFrame {
 public:
  explicit ClosedFrame(const ClosedCurve& base)
      : interp_(base.points(), 1.0), grid_(4 * base.size()) {
    normals_.resize(3, grid_ + 1);
    tangents_.resize(3, grid_ + 1);
    for (Eigen::Index i = 0; i <= grid_; ++i) {
      tangents_.col(i) = tangent(static_cast<double>(i) / static_cast<double>(grid_));
    }
    normals_.col(0) = any_orthonormal(tangents_.col(0));
    for (Eigen::Index i = 0; i < grid_; ++i) {
      const Vec3 next = minimal_rotation(tangents_.col(i), tangents_.col(i + 1)) *
                        Vec3(normals_.col(i));
      const Vec3 t = tangents_.col(i + 1);
      normals_.col(i + 1) = (next - next.dot(t) * t).normalized();
    }
    const Vec3 start = normals_.col(0);
    const Vec3 end = normals_.col(grid_);
    const Vec3 t0 = tangents_.col(0);
    holonomy_ = std::atan2(t0.dot(start.cross(end)), start.dot(end));
  }

  Vec3 position(double p) const { return interp_.value(p); }

  Vec3 tangent(double p) const { return interp_.jet(p, 1)[1].normalized(); }

  /// (U, V) orthonormal normal frame at parameter p ∈ [0, 1).
  std::pair<Vec3, Vec3> frame(double p) const {
    const double wrapped = p - std::floor(p);
    auto i = static_cast<Eigen::Index>(wrapped * static_cast<double>(grid_));
    i = std::min(i, grid_ - 1);
    const Vec3 t = tangent(wrapped);
    Vec3 u = minimal_rotation(tangents_.col(i), t) * Vec3(normals_.col(i));
    u = (u - u.dot(t) * t).normalized();
    const Vec3 v = t.cross(u);
    const double twist = -holonomy_ * wrapped;
    return {std::cos(twist) * u + std::sin(twist) * v,
            -std::sin(twist) * u + std::cos(twist) * v};
  }

 private:
  PeriodicInterpolant interp_;
  Eigen::Index grid_;
  Points normals_;
  Points tangents_;
  double holonomy_ = 0.0;
};

std::function<Vec3(double)> helix_map(const ClosedFrame& frame, int turns,
                                      double tube_radius) {
  return [&frame, turns, tube_radius](double p) {
    const double theta = 2.0 * kPi * static_cast<double>(turns) * p;
    const auto [u, v] = frame.frame(p);
    return Vec3(frame.position(p) +
                tube_radius * (std::cos(theta) * u + std::sin(theta) * v));
  };
}

void check_tube(const ClosedCurve& base, double tube_radius) {
  const double limit = 0.2 * min_osculating_radius(base);
  if (tube_radius < 0.0 || tube_radius >= limit) {
    std::ostringstream msg;
    msg << "tube radius " << tube_radius << " not below 0.2 x min osculating radius ("
        << limit << "): tube self-intersects";
    throw Error(ErrorKind::TubeSelfIntersection, msg.str(), tube_radius);
  }
}

}  // namespace

HelixWrap wrap_helix(const ClosedCurve& base, int turns, double tube_radius,
                     Eigen::Index n) {
  if (turns < 8) {
    throw Error(ErrorKind::InvalidArgument, "helix wrap needs at least 8 turns");
  }
  if (n < 32 * static_cast<Eigen::Index>(turns)) {
    throw Error(ErrorKind::InvalidArgument, "helix wrap needs N >= 32 * turns");
  }
  check_tube(base, tube_radius);
  const ClosedFrame frame(base);
  ClosedCurve curve = make_parametric(helix_map(frame, turns, tube_radius), n);
  const double ratio = curve.length() / base.length();
  return HelixWrap{std::move(curve), tube_radius, turns, ratio};
}

HelixWrap wrap_helix_to_ratio(const ClosedCurve& base, int turns,
                              double target_ratio, Eigen::Index n, double rel_tol) {
  if (!(target_ratio >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "length ratio target must be >= 1");
  }
  const ClosedFrame frame(base);
  const Eigen::Index intervals = std::max<Eigen::Index>(16 * n, 4096);
  auto ratio_at = [&](double rho) {
    return arclength_table(helix_map(frame, turns, rho), intervals).back() /
           base.length();
  };
  double lo = 0.0;
  double hi = 0.2 * min_osculating_radius(base) * (1.0 - 1e-9);
  if (ratio_at(hi) < target_ratio) {
    throw Error(ErrorKind::TubeSelfIntersection,
                "length ratio target unreachable without tube self-intersection",
                target_ratio);
  }
  double rho = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double r = ratio_at(rho);
    if (std::abs(r - target_ratio) <= rel_tol * target_ratio) break;
    (r < target_ratio ? lo : hi) = rho;
    rho = 0.5 * (lo + hi);
  }
  return wrap_helix(base, turns, rho, n);
}

// --- resampling -----------------------------------------------------------

ClosedCurve resample(const ClosedCurve& curve, Eigen::Index n_new) {
  const Eigen::Index n = curve.size();
  std::vector<double> knots(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    knots[static_cast<std::size_t>(i) + 1] =
        knots[static_cast<std::size_t>(i)] + (curve.point(i + 1) - curve.point(i)).norm();
  }
  const double total = knots.back();
  auto h = [&](Eigen::Index i) {
    const auto k = static_cast<std::size_t>(wrap(i, n));
    return knots[k + 1] - knots[k];
  };

  // periodic cubic spline: solve for second derivatives at the knots
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(3 * n));
  Eigen::MatrixX3d rhs(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hl = h(i - 1);
    const double hr = h(i);
    entries.emplace_back(i, wrap(i - 1, n), hl);
    entries.emplace_back(i, i, 2.0 * (hl + hr));
    entries.emplace_back(i, wrap(i + 1, n), hr);
    const Vec3 slope_r = (curve.point(i + 1) - curve.point(i)) / hr;
    const Vec3 slope_l = (curve.point(i) - curve.point(i - 1)) / hl;
    rhs.row(i) = 6.0 * (slope_r - slope_l).transpose();
  }
  Eigen::SparseMatrix<double> system(n, n);
  system.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(system);
  const Eigen::MatrixX3d second = lu.solve(rhs);

  auto spline = [&](double p) {
    double s = (p - std::floor(p)) * total;
    auto it = std::upper_bound(knots.begin(), knots.end(), s);
    auto i = static_cast<Eigen::Index>(std::distance(knots.begin(), it)) - 1;
    i = std::clamp<Eigen::Index>(i, 0, n - 1);
    const double hi = h(i);
    const double a = (knots[static_cast<std::size_t>(i) + 1] - s) / hi;
    const double b = 1.0 - a;
    const Vec3 m0 = second.row(i).transpose();
    const Vec3 m1 = second.row(wrap(i + 1, n)).transpose();
    return Vec3(a * curve.point(i) + b * curve.point(i + 1) +
                ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (hi * hi) / 6.0);
  };
  return make_parametric(spline, n_new);
}

double min_osculating_radius(const ClosedCurve& curve) {
  const PeriodicInterpolant interp(curve.points(), curve.length());
  return 1.0 / spectral_curvature(interp).maxCoeff();
}

double hausdorff_distance(const ClosedCurve& a, const ClosedCurve& b) {
  auto one_sided = [](const Points& from, const Points& to) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.cols(); ++i) {
      const double best = (to.colwise() - from.col(i)).colwise().squaredNorm().minCoeff();
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(one_sided(a.points(), b.points()), one_sided(b.points(), a.points()));
}

ClosedCurve generate(const CurveFamily& family, Eigen::Index n) {
  struct Visitor {
    Eigen::Index n;
    ClosedCurve operator()(const CircleParams& c) const {
      return make_circle(c.radius, c.center, c.normal, n);
    }
    ClosedCurve operator()(const PolygonParams& p) const {
      return make_polygon(p.vertices, n);
    }
    ClosedCurve operator()(const BulletParams& b) const { return make_bullet(b.n_twist, n); }
    ClosedCurve operator()(const HelixWrapParams& h) const {
      const ClosedCurve base = make_circle(h.base.radius, h.base.center, h.base.normal,
                                           std::max<Eigen::Index>(256, 8 * h.turns));
      if (h.target_ratio > 0.0) return wrap_helix_to_ratio(base, h.turns, h.target_ratio, n).curve;
      return wrap_helix(base, h.turns, h.tube_radius, n).curve;
    }
  };
  return std::visit(Visitor{n}, family);
}

}  // namespace filament
