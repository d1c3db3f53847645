#include "filament/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace filament {

double security_radius(const ClosedCurve& curve) {
  const Eigen::Index n = curve.size();
  const double dx = curve.spacing();
  const double r_osc = min_osculating_radius(curve);
  auto too_singular = [&](double value) {
    std::ostringstream msg;
    msg << "reference too singular: reach estimate " << value << " below 10 dx = " << 10 * dx;
    return Error(ErrorKind::ReferenceTooSingular, msg.str(), value);
  };
  if (r_osc < 10.0 * dx) throw too_singular(r_osc);

  // Chords between arcs closer than π R_min cannot be double normals.
  const double window = std::numbers::pi * r_osc * (1.0 + 1e-3);
  const Points& x = curve.points();
  auto dist2 = [&](Eigen::Index i, Eigen::Index j) {
    return (x.col(wrap(i, n)) - x.col(wrap(j, n))).squaredNorm();
  };
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::Index gap = std::min(j - i, n - (j - i));
      if (static_cast<double>(gap) * dx <= window) continue;
      const double d = dist2(i, j);
      if (d >= best) continue;
      bool local_min = true;
      for (int a = -1; a <= 1 && local_min; ++a) {
        for (int b = -1; b <= 1; ++b) {
          if ((a != 0 || b != 0) && dist2(i + a, j + b) < d) {
            local_min = false;
            break;
          }
        }
      }
      if (local_min) best = d;
    }
  }
  const double bottleneck = 0.95 * 0.5 * std::sqrt(best);
  const double rs = std::min(r_osc, bottleneck);
  if (rs < 10.0 * dx) throw too_singular(rs);
  return rs;
}

double tube_profile(double d2, double r) {
  const double r2 = r * r;
  if (d2 >= r2) return 0.0;
  const double q = 1.0 - d2 / r2;
  return q * q * q;
}

TubeSlice::TubeSlice(PeriodicInterpolant curve, Points nodes, double tube_radius)
    : curve_(std::move(curve)),
      nodes_(std::move(nodes)),
      r_(tube_radius),
      spacing_(curve_.period() / static_cast<double>(nodes_.cols())) {}

Projection TubeSlice::project(const Vec3& x) const {
  Eigen::Index nearest = 0;
  (nodes_.colwise() - x).colwise().squaredNorm().minCoeff(&nearest);
  double s = spacing_ * static_cast<double>(nearest);
  for (int it = 0; it < 30; ++it) {
    const auto j = curve_.jet(s, 2);
    const Vec3 diff = j[0] - x;
    const double g = diff.dot(j[1]);
    const double gp = j[1].squaredNorm() + diff.dot(j[2]);
    if (!(gp > 0.0)) break;
    const double step = std::clamp(-g / gp, -spacing_, spacing_);
    s += step;
    if (std::abs(step) < 1e-15 * curve_.period()) break;
  }
  const auto j = curve_.jet(s, 1);
  Projection p;
  p.s = s;
  p.point = j[0];
  p.tangent = j[1].normalized();
  p.distance = (j[0] - x).norm();
  return p;
}

Vec3 TubeSlice::field(const Vec3& x) const {
  const double node_d2 = (nodes_.colwise() - x).colwise().squaredNorm().minCoeff();
  const double reach = r_ + spacing_;
  if (node_d2 >= reach * reach) return Vec3::Zero();
  const Projection p = project(x);
  const double f = tube_profile(p.distance * p.distance, r_);
  if (f == 0.0) return Vec3::Zero();
  return f * p.tangent;
}

ReferenceFlow::ReferenceFlow(const Trajectory& traj) : flow_(traj) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < flow_.frame_count(); ++k) {
    const PeriodicInterpolant& p = flow_.frame(k);
    ReferenceFrameInfo info;
    info.t = flow_.frame_time(k);
    info.sup_curvature = spectral_curvature(p).maxCoeff();
    info.sup_third = p.derivative_at_nodes(3).colwise().norm().maxCoeff();
    info.security_radius = security_radius(traj.frames[k].curve);
    r = std::min(r, std::min(1.0 / info.sup_curvature, info.security_radius));
    sup_third_ = std::max(sup_third_, info.sup_third);
    info_.push_back(info);
  }
  r_ = 0.5 * r;
  frame_interval_ =
      (flow_.t_end() - flow_.t_begin()) / static_cast<double>(flow_.frame_count() - 1);
}

TubeSlice ReferenceFlow::slice(double t) const {
  return TubeSlice(flow_.slice_at(t), flow_.nodes_at(t), r_);
}

double K_constant(double tube_radius, double sup_third) {
  return 54.0 / (tube_radius * tube_radius) + 14.0 * sup_third;
}

double K_constant(const ReferenceFlow& ref) { return K_constant(ref.tube_radius(), ref.sup_third()); }

namespace {

void check_directions(const VarifoldSample& sample) {
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double len = sample.directions.col(i).norm();
    if (std::abs(len - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "varifold atom direction is not a unit vector", len);
    }
  }
}

}  // namespace

FG compute_FG(const TubeSlice& slice, const VarifoldSample& sample, double mass0) {
  check_directions(sample);
  double pairing = 0.0;
  double weight = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double theta = sample.weights(i);
    pairing += theta * slice.field(sample.positions.col(i)).dot(sample.directions.col(i));
    weight += theta;
  }
  return FG{weight - pairing, mass0 - pairing};
}

FG compute_FG(const ReferenceFlow& ref, const VarifoldSample& sample, double t, double mass0) {
  return compute_FG(ref.slice(t), sample, mass0);
}

FLowerBounds f_lower_bounds(const TubeSlice& slice, const VarifoldSample& sample) {
  check_directions(sample);
  const double r = slice.tube_radius();
  FLowerBounds out;
  out.integrand.resize(sample.size());
  out.tilt.resize(sample.size());
  out.distance.resize(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const Vec3 x = sample.positions.col(i);
    const Vec3 xi = sample.directions.col(i);
    const Vec3 X = slice.field(x);
    out.integrand(i) = 1.0 - X.dot(xi);
    if (X.isZero(0.0)) {
      // f vanishes only at d ≥ r
      out.tilt(i) = 1.0;
      out.distance(i) = 1.0;
      continue;
    }
    const Projection p = slice.project(x);
    const double c = p.tangent.dot(xi);
    out.tilt(i) = c >= 0.0 ? 0.5 * (p.tangent - xi).squaredNorm() : 1.0;
    out.distance(i) = std::min(p.distance * p.distance / (r * r), 1.0);
  }
  return out;
}

WaouTerms waou_terms(const ReferenceFlow& ref, const Vec3& x, const Vec3& xi, double t, double h,
                     double ht, double K) {
  if (std::abs(xi.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "direction must be a unit vector", xi.norm());
  }
  if (h <= 0.0) h = ref.tube_radius() / 200.0;
  if (ht <= 0.0) ht = ref.frame_interval() / 4.0;
  if (K <= 0.0) K = K_constant(ref);

  const TubeSlice now = ref.slice(t);
  const Vec3 X0 = now.field(x);

  const Vec3 dXdt = (ref.field(x, t - 2 * ht) - 8.0 * ref.field(x, t - ht) +
                     8.0 * ref.field(x, t + ht) - ref.field(x, t + 2 * ht)) /
                    (12.0 * ht);

  // Hessians H[l](j, k) = ∂_j ∂_k X_l by fourth-order central differences.
  Mat3 H[3];
  const int offsets[4] = {-2, -1, 1, 2};
  const double c1[4] = {1.0, -8.0, 8.0, -1.0};
  for (int j = 0; j < 3; ++j) {
    const Vec3 ej = h * Vec3::Unit(j);
    const Vec3 d2 = (-now.field(x + 2 * ej) + 16.0 * now.field(x + ej) - 30.0 * X0 +
                     16.0 * now.field(x - ej) - now.field(x - 2 * ej)) /
                    (12.0 * h * h);
    for (int l = 0; l < 3; ++l) H[l](j, j) = d2(l);
    for (int k = j + 1; k < 3; ++k) {
      const Vec3 ek = h * Vec3::Unit(k);
      Vec3 acc = Vec3::Zero();
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          acc += c1[a] * c1[b] * now.field(x + offsets[a] * ej + offsets[b] * ek);
        }
      }
      acc /= 144.0 * h * h;
      for (int l = 0; l < 3; ++l) {
        H[l](j, k) = acc(l);
        H[l](k, j) = acc(l);
      }
    }
  }
  // D(curl X)_ij = ε_ikl ∂_j ∂_k X_l
  Mat3 dcurl = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    const int k = (i + 1) % 3;
    const int l = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) dcurl(i, j) = H[l](j, k) - H[k](j, l);
  }
  WaouTerms w;
  w.lhs = std::abs(dXdt.dot(xi) - xi.dot(dcurl * xi));
  w.rhs = K * (1.0 - X0.dot(xi));
  w.margin = w.rhs - w.lhs;
  return w;
}

double waou_margin(const ReferenceFlow& ref, const Vec3& x, const Vec3& xi, double t, double h,
                   double ht) {
  return waou_terms(ref, x, xi, t, h, ht).margin;
}

FGReport gronwall_check(const ReferenceFlow& ref, const Trajectory& tested, double slack,
                        double K) {
  FGReport report;
  report.K = K > 0.0 ? K : K_constant(ref);
  report.slack = slack;
  report.mass0 = current_of(tested.frames.front().curve).mass();
  const double floor = 1e-12 * report.mass0;
  const double slice_slack = 1e-12 * std::max(1.0, std::abs(ref.t_end()));
  for (const Frame& f : tested.frames) {
    if (f.t < ref.t_begin() - slice_slack || f.t > ref.t_end() + slice_slack) continue;
    const FG fg = compute_FG(ref, varifold_of(current_of(f.curve)), f.t, report.mass0);
    report.t.push_back(f.t);
    report.F.push_back(fg.F);
    report.G.push_back(fg.G);
  }
  if (report.t.empty()) {
    throw Error(ErrorKind::OutOfRange, "tested flow has no frame inside the reference window");
  }
  const double g0 = report.G.front();
  const double t0 = report.t.front();
  for (std::size_t k = 0; k < report.t.size(); ++k) {
    const double env = g0 * std::exp(report.K * (report.t[k] - t0));
    report.envelope.push_back(env);
    if (report.G[k] > env * (1.0 + slack) + floor) report.envelope_ok = false;
    if (env > 0.0) report.worst_envelope_ratio = std::max(report.worst_envelope_ratio, report.G[k] / env);
    if (report.F[k] < -floor || report.F[k] > report.G[k] + floor) report.ordering_ok = false;
    if (k + 1 < report.t.size()) {
      const double dt = report.t[k + 1] - report.t[k];
      const double rate = std::abs(report.G[k + 1] - report.G[k]) / dt;
      const double bound = report.K * std::max(report.F[k], report.F[k + 1]);
      if (rate > bound * (1.0 + slack) + floor / dt) report.derivative_ok = false;
      if (bound > 0.0) {
        report.worst_derivative_ratio = std::max(report.worst_derivative_ratio, rate / bound);
      }
    }
  }
  return report;
}

}  // namespace filament
