#include "filament/recurrence.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace filament {

Points mollified_tangents(const ClosedCurve& curve, double smoothing) {
  const Eigen::Index n = curve.size();
  Points u(3, n);
  for (Eigen::Index i = 0; i < n; ++i) u.col(i) = (curve.point(i + 1) - curve.point(i)).normalized();
  if (smoothing <= 0.0) return u;

  Eigen::FFT<double> fft;
  std::vector<double> row(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> spectrum;
  const double sigma = smoothing * static_cast<double>(n);  // in samples
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = u(c, i);
    fft.fwd(spectrum, row);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double freq = static_cast<double>(k <= n / 2 ? k : k - n);
      const double arg = 2.0 * std::numbers::pi * freq * sigma / static_cast<double>(n);
      spectrum[static_cast<std::size_t>(k)] *= std::exp(-0.5 * arg * arg);
    }
    fft.inv(row, spectrum);
    for (Eigen::Index i = 0; i < n; ++i) u(c, i) = row[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double len = u.col(i).norm();
    if (len > 0.0) u.col(i) /= len;
  }
  return u;
}

PolygonalityAnalysis analyze_polygonality(const ClosedCurve& curve, const DefectOptions& options) {
  const Eigen::Index n = curve.size();
  const double dx = curve.spacing();
  const Points u = mollified_tangents(curve, options.smoothing);

  PolygonalityAnalysis out;
  out.curvature.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.curvature(i) = (u.col(wrap(i + 1, n)) - u.col(i)).norm() / dx;
  }
  out.total_curvature = out.curvature.sum() * dx;

  if (options.threshold > 0.0) {
    out.threshold = options.threshold;
  } else {
    std::vector<double> sorted(out.curvature.data(), out.curvature.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double median = sorted[static_cast<std::size_t>(n / 2)];
    out.threshold = std::max(options.threshold_factor * median, out.total_curvature / curve.length());
  }

  std::vector<char> mask(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = out.curvature(i) >= out.threshold;
  auto in = [&](Eigen::Index i) { return mask[static_cast<std::size_t>(wrap(i, n))] != 0; };

  double outside = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!in(i)) outside += out.curvature(i) * dx;
  }
  out.defect = out.total_curvature > 0.0 ? outside / out.total_curvature : 1.0;

  // Runs, starting from a sample outside every run so none is split.
  Eigen::Index start = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!in(i)) {
      start = i;
      break;
    }
  }
  if (start < 0) return out;  // every sample is a corner: no structure to report
  for (Eigen::Index k = 1; k <= n; ++k) {
    const Eigen::Index i = wrap(start + k, n);
    if (!in(i) || in(i - 1)) continue;
    CornerCluster c;
    c.first = i;
    Vec3 weighted = Vec3::Zero();
    Eigen::Index j = i;
    while (in(j)) {
      const double w = out.curvature(wrap(j, n)) * dx;
      c.turning += w;
      weighted += w * 0.5 * (curve.point(j) + curve.point(j + 1));
      c.last = wrap(j, n);
      ++j;
    }
    c.position = c.turning > 0.0 ? Vec3(weighted / c.turning) : curve.point(i);
    out.corners.push_back(c);
  }
  return out;
}

double polygonality_defect(const ClosedCurve& curve, const DefectOptions& options) {
  return analyze_polygonality(curve, options).defect;
}

double prominence(const std::vector<double>& v, std::size_t i) {
  double left = v[i];
  for (std::size_t j = i; j-- > 0;) {
    if (v[j] < v[i]) break;
    left = std::max(left, v[j]);
  }
  double right = v[i];
  for (std::size_t j = i + 1; j < v.size(); ++j) {
    if (v[j] < v[i]) break;
    right = std::max(right, v[j]);
  }
  return std::min(left, right) - v[i];
}

RecurrenceScanner::RecurrenceScanner(DefectOptions options, double min_prominence)
    : options_(options), min_prominence_(min_prominence) {}

double RecurrenceScanner::rotation_of(const std::vector<CornerCluster>& corners, const Vec3& center,
                                      int fold) const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (fold < 1 || corners.empty() || initial_corners_.empty()) return nan;
  auto phase = [&](auto positions, const Vec3& c, double& coherence) {
    std::complex<double> acc = 0.0;
    std::size_t count = 0;
    for (const Vec3& p : positions) {
      const Vec3 d = p - c;
      acc += std::polar(1.0, fold * std::atan2(d.dot(e2_), d.dot(e1_)));
      ++count;
    }
    coherence = std::abs(acc) / static_cast<double>(count);
    return std::arg(acc) / fold;
  };
  std::vector<Vec3> now;
  for (const auto& c : corners) now.push_back(c.position);
  double coh_now = 0.0;
  double coh_ref = 0.0;
  const double phi = phase(now, center, coh_now);
  const double phi0 = phase(initial_corners_, initial_center_, coh_ref);
  if (coh_now < 0.5 || coh_ref < 0.5) return nan;
  const double period = 2.0 * std::numbers::pi / fold;
  double rot = std::fmod(phi - phi0, period);
  if (rot < 0.0) rot += period;
  if (period - rot < 1e-12) rot = 0.0;
  return rot;
}

void RecurrenceScanner::add(double t, const ClosedCurve& curve) {
  if (!samples_.empty() && !(t > samples_.back().t)) {
    throw Error(ErrorKind::InvalidArgument, "recurrence frames must arrive in time order", t);
  }
  const PolygonalityAnalysis a = analyze_polygonality(curve, options_);
  const Vec3 center = curve.centroid();
  if (!have_plane_) {
    const Points centered = curve.points().colwise() - center;
    Eigen::SelfAdjointEigenSolver<Mat3> eig(centered * centered.transpose());
    e1_ = eig.eigenvectors().col(2);
    // orient the plane by the curve's own circulation so angles keep their sign
    Vec3 area = Vec3::Zero();
    for (Eigen::Index n = 0; n < curve.size(); ++n) area += (curve.point(n) - center).cross(curve.point(n + 1) - curve.point(n));
    const Vec3 normal = area.norm() > 1e-9 * curve.length() * curve.length() ? Vec3(area.normalized())
                                                                             : Vec3(eig.eigenvectors().col(0));
    e1_ = (e1_ - e1_.dot(normal) * normal).normalized();
    e2_ = normal.cross(e1_);
    for (const auto& c : a.corners) initial_corners_.push_back(c.position);
    initial_center_ = center;
    have_plane_ = true;
  }
  Sample s;
  s.t = t;
  s.defect = a.defect;
  s.corners = static_cast<int>(a.corners.size());
  s.rotation = rotation_of(a.corners, center, s.corners);
  s.vertices.resize(3, s.corners);
  double radius = 0.0;
  for (int k = 0; k < s.corners; ++k) {
    s.vertices.col(k) = a.corners[static_cast<std::size_t>(k)].position;
    radius += (s.vertices.col(k) - center).norm();
  }
  s.circumradius = s.corners > 0 ? radius / s.corners : 0.0;
  samples_.push_back(std::move(s));
}

RecurrenceReport RecurrenceScanner::report() const {
  return report(std::numeric_limits<double>::infinity());
}

RecurrenceReport RecurrenceScanner::report(double t_max) const {
  RecurrenceReport out;
  for (const auto& s : samples_) {
    if (s.t > t_max) break;
    out.times.push_back(s.t);
    out.defects.push_back(s.defect);
  }
  for (std::size_t i = 1; i + 1 < out.times.size(); ++i) {
    const auto& d = out.defects;
    if (!(d[i] < d[i - 1] && d[i] < d[i + 1])) continue;
    const double prom = prominence(d, i);
    if (prom < min_prominence_) continue;
    const Sample& s = samples_[i];
    out.events.push_back(
        RecurrenceEvent{s.t, s.defect, prom, s.corners, s.rotation, s.circumradius, s.vertices});
  }
  return out;
}

RecurrenceReport recurrence_scan(const Trajectory& traj, const DefectOptions& options,
                                 double min_prominence) {
  RecurrenceScanner scanner(options, min_prominence);
  for (const Frame& f : traj.frames) scanner.add(f.t, f.curve);
  return scanner.report();
}

}  // namespace filament
