#include "filament/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "filament/spectral.hpp"

namespace filament {

namespace {

/// C(a) y = a × y.
Mat3 cross_matrix(const Vec3& a) {
  Mat3 c;
  c << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return c;
}

Vec3 axis_vector(int axis) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::InvalidArgument, "axis must be 0, 1 or 2");
  return Vec3::Unit(axis);
}

/// Largest |e × x| over the box, attained at a corner (the map is convex).
double corner_sup_axial(const Vec3& e, const Box& box) {
  double best = 0.0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 x((c & 1) ? box.hi.x() : box.lo.x(), (c & 2) ? box.hi.y() : box.lo.y(),
                 (c & 4) ? box.hi.z() : box.lo.z());
    best = std::max(best, e.cross(x).norm());
  }
  return best;
}

}  // namespace

// --- currents -------------------------------------------------------------

SampledCurrent::SampledCurrent(Points positions, Points weights) {
  if (positions.cols() != weights.cols() || positions.cols() == 0) {
    throw Error(ErrorKind::InvalidArgument, "current needs matching, non-empty atom lists");
  }
  CurrentLoop loop{std::move(positions), std::move(weights)};
  const double mass = loop.weights.colwise().norm().sum();
  const double gap = Vec3(loop.weights.rowwise().sum()).norm();
  if (!(mass > 0.0) || gap > 1e-10 * mass) {
    std::ostringstream msg;
    msg << "current has boundary: |sum w| = " << gap << " for mass " << mass;
    throw Error(ErrorKind::InvalidArgument, msg.str(), gap);
  }
  loops_.push_back(std::move(loop));
}

Eigen::Index SampledCurrent::atom_count() const {
  Eigen::Index total = 0;
  for (const auto& l : loops_) total += l.positions.cols();
  return total;
}

double SampledCurrent::mass() const {
  double total = 0.0;
  for (const auto& l : loops_) total += l.weights.colwise().norm().sum();
  return total;
}

Vec3 SampledCurrent::boundary() const {
  Vec3 total = Vec3::Zero();
  for (const auto& l : loops_) total += l.weights.rowwise().sum();
  return total;
}

SampledCurrent& SampledCurrent::append(const SampledCurrent& other) {
  loops_.insert(loops_.end(), other.loops_.begin(), other.loops_.end());
  return *this;
}

SampledCurrent SampledCurrent::scaled(double factor) const {
  SampledCurrent out = *this;
  for (auto& l : out.loops_) l.weights *= factor;
  return out;
}

SampledCurrent disjoint_union(const SampledCurrent& a, const SampledCurrent& b) {
  SampledCurrent out = a;
  out.append(b);
  return out;
}

SampledCurrent current_of(const ClosedCurve& curve) {
  const Eigen::Index n = curve.size();
  Points w(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w.col(i) = 0.5 * (curve.point(i + 1) - curve.point(i - 1));
  }
  return SampledCurrent(curve.points(), std::move(w));
}

Vec3 VarifoldSample::first_moment_total() const {
  Vec3 total = Vec3::Zero();
  for (Eigen::Index i = 0; i < size(); ++i) total += weights(i) * directions.col(i);
  return total;
}

VarifoldSample varifold_of(const SampledCurrent& current) {
  VarifoldSample v;
  const Eigen::Index n = current.atom_count();
  v.positions.resize(3, n);
  v.directions.resize(3, n);
  v.weights.resize(n);
  v.site.resize(static_cast<std::size_t>(n));
  Eigen::Index k = 0;
  for (const auto& loop : current.loops()) {
    for (Eigen::Index i = 0; i < loop.positions.cols(); ++i, ++k) {
      const double len = loop.weights.col(i).norm();
      v.positions.col(k) = loop.positions.col(i);
      v.directions.col(k) = len > 0.0 ? Vec3(loop.weights.col(i) / len) : Vec3::UnitX();
      v.weights(k) = len;
      v.site[static_cast<std::size_t>(k)] = k;
    }
  }
  return v;
}

// --- fields ---------------------------------------------------------------

std::string_view to_string(FieldFamily family) {
  switch (family) {
    case FieldFamily::Momentum: return "momentum";
    case FieldFamily::Angular: return "angular";
    case FieldFamily::GaussianBump: return "gaussian-bump";
    case FieldFamily::GradientBump: return "gradient-bump";
    case FieldFamily::CutoffShifted: return "cutoff-shifted";
  }
  return "unknown";
}

Box Box::around(const Points& points, double margin) {
  Box b;
  b.lo = (points.rowwise().minCoeff().array() - margin).matrix();
  b.hi = (points.rowwise().maxCoeff().array() + margin).matrix();
  return b;
}

double Cutoff::value(double rho) const {
  const double r = scale / 6.0;
  const double a = 0.5 * scale;
  const double k = 3.0 / scale;
  if (rho <= a) return 1.0;
  if (rho >= scale) return 0.0;
  if (rho < a + r) {
    const double u = (rho - a) / r;
    return 1.0 - k * r * (u * u * u - 0.5 * u * u * u * u);
  }
  if (rho < a + 2 * r) return 1.0 - k * (0.5 * r + (rho - a - r));
  const double u = (rho - a - 2 * r) / r;
  return 1.0 - k * (1.5 * r + r * (u - u * u * u + 0.5 * u * u * u * u));
}

double Cutoff::d1(double rho) const {
  const double r = scale / 6.0;
  const double a = 0.5 * scale;
  const double k = 3.0 / scale;
  if (rho <= a || rho >= scale) return 0.0;
  if (rho < a + r) {
    const double u = (rho - a) / r;
    return -k * u * u * (3.0 - 2.0 * u);
  }
  if (rho < a + 2 * r) return -k;
  const double u = (rho - a - 2 * r) / r;
  return -k * (1.0 - u * u * (3.0 - 2.0 * u));
}

double Cutoff::d2(double rho) const {
  const double r = scale / 6.0;
  const double a = 0.5 * scale;
  const double k = 3.0 / scale;
  if (rho <= a || rho >= scale) return 0.0;
  if (rho < a + r) {
    const double u = (rho - a) / r;
    return -k * 6.0 * u * (1.0 - u) / r;
  }
  if (rho < a + 2 * r) return 0.0;
  const double u = (rho - a - 2 * r) / r;
  return k * 6.0 * u * (1.0 - u) / r;
}

TestField::TestField(FieldFamily family, std::string name, VecFn value, VecFn curl, MatFn dcurl,
                     Box box, double sup_value, double sup_curl)
    : family_(family),
      name_(std::move(name)),
      value_(std::move(value)),
      curl_(std::move(curl)),
      dcurl_(std::move(dcurl)),
      box_(box),
      sup_value_(sup_value),
      sup_curl_(sup_curl) {}

double grid_sup(const std::function<Vec3(const Vec3&)>& f, const Box& box, int per_axis) {
  double best = 0.0;
  const Vec3 step = (box.hi - box.lo) / static_cast<double>(per_axis - 1);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      for (int k = 0; k < per_axis; ++k) {
        const Vec3 x = box.lo + Vec3(i * step.x(), j * step.y(), k * step.z());
        best = std::max(best, f(x).norm());
      }
    }
  }
  return best;
}

TestField TestField::momentum(int axis, const Box& box) {
  const Vec3 e = axis_vector(axis);
  return TestField(
      FieldFamily::Momentum, "X" + std::to_string(axis + 1),
      [e](const Vec3& x) -> Vec3 { return e.cross(x); },
      [e](const Vec3&) -> Vec3 { return 2.0 * e; }, [](const Vec3&) -> Mat3 { return Mat3::Zero(); },
      box, corner_sup_axial(e, box), 2.0);
}

TestField TestField::angular(int axis, const Box& box) {
  const Vec3 e = axis_vector(axis);
  auto value = [e](const Vec3& x) -> Vec3 { return x.cross(x.cross(e)); };
  const Mat3 d = 3.0 * cross_matrix(e);
  return TestField(
      FieldFamily::Angular, "Y" + std::to_string(axis + 1), value,
      [e](const Vec3& x) -> Vec3 { return 3.0 * e.cross(x); },
      [d](const Vec3&) -> Mat3 { return d; }, box, grid_sup(value, box),
      3.0 * corner_sup_axial(e, box));
}

TestField TestField::gaussian_bump(const Vec3& center, const Vec3& amplitude, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  const double w2 = width * width;
  const Mat3 ca = cross_matrix(amplitude);
  Box box{(center.array() - 6.0 * width).matrix(), (center.array() + 6.0 * width).matrix()};
  return TestField(
      FieldFamily::GaussianBump, "gaussian",
      [=](const Vec3& x) -> Vec3 {
        return amplitude * std::exp(-(x - center).squaredNorm() / (2.0 * w2));
      },
      [=](const Vec3& x) -> Vec3 {
        const Vec3 v = x - center;
        const double phi = std::exp(-v.squaredNorm() / (2.0 * w2));
        return -(phi / w2) * v.cross(amplitude);
      },
      [=](const Vec3& x) -> Mat3 {
        const Vec3 v = x - center;
        const double phi = std::exp(-v.squaredNorm() / (2.0 * w2));
        return (phi / w2) * ((v.cross(amplitude) * v.transpose()) / w2 + ca);
      },
      box, amplitude.norm(), amplitude.norm() * std::exp(-0.5) / width);
}

TestField TestField::gradient_bump(const Vec3& center, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  const double w2 = width * width;
  Box box{(center.array() - 6.0 * width).matrix(), (center.array() + 6.0 * width).matrix()};
  return TestField(
      FieldFamily::GradientBump, "gradient",
      [=](const Vec3& x) -> Vec3 {
        const Vec3 v = x - center;
        return -(v / w2) * std::exp(-v.squaredNorm() / (2.0 * w2));
      },
      [](const Vec3&) -> Vec3 { return Vec3::Zero(); },
      [](const Vec3&) -> Mat3 { return Mat3::Zero(); }, box, std::exp(-0.5) / width, 0.0);
}

TestField TestField::cutoff_shifted(int axis, const Vec3& a, const Vec3& b, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "cut-off scale must be positive");
  const Vec3 e = axis_vector(axis);
  const Cutoff chi{scale};

  auto value_at = [e, chi](const Vec3& y) -> Vec3 { return chi.value(y.norm()) * e.cross(y); };
  auto curl_at = [e, chi](const Vec3& y) -> Vec3 {
    const double rho = y.norm();
    const double c0 = chi.value(rho);
    const double c1 = chi.d1(rho);
    if (c1 == 0.0) return 2.0 * c0 * e;
    return (c1 * rho + 2.0 * c0) * e - (c1 / rho) * y * y.dot(e);
  };
  auto dcurl_at = [e, chi](const Vec3& y) -> Mat3 {
    const double rho = y.norm();
    const double c1 = chi.d1(rho);
    const double c2 = chi.d2(rho);
    if (c1 == 0.0 && c2 == 0.0) return Mat3::Zero();
    const double h = c1 / rho;
    const double gp = c2 * rho + 3.0 * c1;
    const double hp = c2 / rho - c1 / (rho * rho);
    const Vec3 yhat = y / rho;
    const double ye = y.dot(e);
    return gp * e * yhat.transpose() - hp * ye * y * yhat.transpose() -
           h * (ye * Mat3::Identity() + y * e.transpose());
  };

  auto value = [=](const Vec3& x) -> Vec3 { return value_at(x - a) - value_at(x - b); };
  Box box{(a.cwiseMin(b).array() - scale).matrix(), (a.cwiseMax(b).array() + scale).matrix()};
  auto curl = [=](const Vec3& x) -> Vec3 { return curl_at(x - a) - curl_at(x - b); };
  return TestField(
      FieldFamily::CutoffShifted, "cutoff-X" + std::to_string(axis + 1), value, curl,
      [=](const Vec3& x) -> Mat3 { return dcurl_at(x - a) - dcurl_at(x - b); }, box,
      grid_sup(value, box), grid_sup(curl, box));
}

// --- functionals ----------------------------------------------------------

double pair(const SampledCurrent& current, const TestField& field) {
  double total = 0.0;
  for (const auto& loop : current.loops()) {
    double part = 0.0;
    for (Eigen::Index i = 0; i < loop.positions.cols(); ++i) {
      part += field.value(loop.positions.col(i)).dot(loop.weights.col(i));
    }
    total += part;
  }
  return total;
}

Vec3 momentum(const SampledCurrent& current) {
  Vec3 total = Vec3::Zero();
  for (const auto& loop : current.loops()) {
    Vec3 part = Vec3::Zero();
    for (Eigen::Index i = 0; i < loop.positions.cols(); ++i) {
      part += Vec3(loop.positions.col(i)).cross(Vec3(loop.weights.col(i)));
    }
    total += part;
  }
  return total;
}

namespace {

// Σ g(x_n, γ_s(x_n)) Δx with the spectral derivative.
template <class F>
Vec3 spectral_quadrature(const ClosedCurve& curve, F g) {
  const Points d1 = PeriodicInterpolant(curve.points(), curve.length()).derivative_at_nodes(1);
  Vec3 total = Vec3::Zero();
  for (Eigen::Index i = 0; i < curve.size(); ++i) total += g(curve.point(i), Vec3(d1.col(i)));
  return total * curve.spacing();
}

}  // namespace

Vec3 momentum(const ClosedCurve& curve) {
  return spectral_quadrature(curve, [](const Vec3& x, const Vec3& t) { return x.cross(t); });
}

Vec3 angular_momentum(const SampledCurrent& current) {
  Vec3 total = Vec3::Zero();
  for (const auto& loop : current.loops()) {
    Vec3 part = Vec3::Zero();
    for (Eigen::Index i = 0; i < loop.positions.cols(); ++i) {
      const Vec3 x = loop.positions.col(i);
      part += x.cross(x.cross(Vec3(loop.weights.col(i))));
    }
    total += part;
  }
  return total;
}

Vec3 angular_momentum(const ClosedCurve& curve) {
  return spectral_quadrature(curve, [](const Vec3& x, const Vec3& t) { return x.cross(x.cross(t)); });
}

namespace {

Box box_of(const SampledCurrent& current) {
  Box b{Vec3::Constant(0.0), Vec3::Constant(0.0)};
  bool first = true;
  for (const auto& loop : current.loops()) {
    const Box lb = Box::around(loop.positions, 0.0);
    b.lo = first ? lb.lo : Vec3(b.lo.cwiseMin(lb.lo));
    b.hi = first ? lb.hi : Vec3(b.hi.cwiseMax(lb.hi));
    first = false;
  }
  return b;
}

}  // namespace

Vec3 momentum_by_pairing(const SampledCurrent& current) {
  const Box box = box_of(current);
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    const TestField field(
        FieldFamily::Momentum, "X", [e](const Vec3& x) -> Vec3 { return e.cross(x); },
        [e](const Vec3&) -> Vec3 { return 2.0 * e; },
        [](const Vec3&) -> Mat3 { return Mat3::Zero(); }, box, 0.0, 2.0);
    out(i) = pair(current, field);
  }
  return out;
}

Vec3 angular_momentum_by_pairing(const SampledCurrent& current) {
  const Box box = box_of(current);
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    const Mat3 d = 3.0 * cross_matrix(e);
    const TestField field(
        FieldFamily::Angular, "Y", [e](const Vec3& x) -> Vec3 { return x.cross(x.cross(e)); },
        [e](const Vec3& x) -> Vec3 { return 3.0 * e.cross(x); },
        [d](const Vec3&) -> Mat3 { return d; }, box, 0.0, 0.0);
    out(i) = pair(current, field);
  }
  return out;
}

double weak_rhs(const ClosedCurve& curve, const TestField& field) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < curve.size(); ++n) {
    const Vec3 chord = curve.point(n + 1) - curve.point(n - 1);
    const Vec3 tau = chord.normalized();
    total += tau.dot(field.dcurl(curve.point(n)) * tau);
  }
  return total * curve.spacing();
}

double weakform_residual(const Trajectory& traj, const TestField& field, double t, double delta) {
  const double min_delta = 2.0 * std::abs(traj.frame_interval());
  if (delta <= 0.0) delta = 4.0 * std::abs(traj.frame_interval());
  if (delta < min_delta * (1.0 - 1e-9)) {
    throw Error(ErrorKind::InvalidArgument, "time difference must span at least two strides",
                delta);
  }
  const Frame& before = traj.at(t - delta);
  const Frame& now = traj.at(t);
  const Frame& after = traj.at(t + delta);
  const double span = after.t - before.t;
  const double rate = (pair(current_of(after.curve), field) - pair(current_of(before.curve), field)) / span;
  return rate + weak_rhs(now.curve, field);
}

double flat_pair_ratio(const Trajectory& traj, const TestField& field, double t1, double t2) {
  if (t1 == t2) throw Error(ErrorKind::DegeneratePair, "flat pair ratio needs t1 != t2", t1);
  const Frame& a = traj.at(t1);
  const Frame& b = traj.at(t2);
  if (a.step == b.step) throw Error(ErrorKind::DegeneratePair, "both times map to one frame", t1);
  if (!(field.sup_curl() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "field has vanishing curl norm");
  }
  const double mass0 = current_of(traj.frames.front().curve).mass();
  const double diff = std::abs(pair(current_of(a.curve), field) - pair(current_of(b.curve), field));
  return diff / (field.sup_curl() * std::sqrt(mass0) * std::sqrt(std::abs(a.t - b.t)));
}

double directed_hausdorff(const Points& from, const Points& to) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < from.cols(); ++i) {
    const double best = (to.colwise() - from.col(i)).colwise().squaredNorm().minCoeff();
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

SpeedBoundReport speed_bound_check(const Trajectory& traj) {
  const Frame& first = traj.frames.front();
  const SampledCurrent t0 = current_of(first.curve);
  SpeedBoundReport report;
  report.mass = t0.mass();
  report.momentum = momentum(t0).norm();
  if (report.momentum <= 1e-10 * report.mass * report.mass) {
    throw Error(ErrorKind::BoundInapplicable, "initial momentum vanishes; speed bound does not apply",
                report.momentum);
  }
  report.bound_ratio = std::pow(report.mass, 3) / (report.momentum * report.momentum);
  for (const Frame& f : traj.frames) {
    const double dt = f.t - first.t;
    if (dt == 0.0) continue;
    const double d = directed_hausdorff(f.curve.points(), first.curve.points());
    report.times.push_back(f.t);
    report.displacement.push_back(d);
    report.max_speed = std::max(report.max_speed, d / std::abs(dt));
  }
  report.c_hat = report.max_speed / report.bound_ratio;
  return report;
}

}  // namespace filament
