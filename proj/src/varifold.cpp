#include "filament/varifold.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace filament {

double a_min(double m) {
  if (!(m >= 1.0)) throw Error(ErrorKind::InvalidArgument, "mass ratio m must be >= 1", m);
  return 0.5 * (3.0 / m - m);
}

ModifiedSpeedParams alpha_beta(double m, double a) {
  const double lo = a_min(m);
  const double tol = 1e-14 * std::max(1.0, std::abs(m));
  if (!(a >= lo - tol && a <= m + tol)) {
    std::ostringstream msg;
    msg << "moment problem infeasible: a = " << a << " outside [" << lo << ", " << m << "]";
    throw Error(ErrorKind::MomentProblemInfeasible, msg.str(), a);
  }
  ModifiedSpeedParams p;
  p.m = m;
  p.a = a;
  p.alpha = (2.0 * a + 3.0 + m) / (3.0 * (1.0 + m));
  p.beta = std::max(0.0, (m * p.alpha - 1.0) / (1.0 + p.alpha));
  return p;
}

namespace {

/// Orthonormal e1, e2 completing ξ₀ to a right-handed frame.
void complete_frame(const Vec3& xi0, Vec3& e1, Vec3& e2) {
  const Vec3 seed = std::abs(xi0.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (seed - seed.dot(xi0) * xi0).normalized();
  e2 = xi0.cross(e1);
}

Vec3 unit_or_throw(const Vec3& v) {
  const double n = v.norm();
  if (std::abs(n - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "direction must be a unit vector", n);
  }
  return v / n;
}

}  // namespace

SphereMeasure circle_measure(const Vec3& xi0_in, double alpha, int n_quad) {
  if (n_quad < 3) throw Error(ErrorKind::InvalidArgument, "circle quadrature needs >= 3 nodes");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "circle height alpha must lie in (0, 1]", alpha);
  }
  const Vec3 xi0 = unit_or_throw(xi0_in);
  SphereMeasure w;
  w.xi0 = xi0;
  w.n_quad = n_quad;
  if (alpha == 1.0) {
    w.directions = xi0;
    w.weights = Eigen::VectorXd::Constant(1, 1.0);
    return w;
  }
  Vec3 e1, e2;
  complete_frame(xi0, e1, e2);
  const double radius = std::sqrt(1.0 - alpha * alpha);
  w.directions.resize(3, n_quad);
  w.weights = Eigen::VectorXd::Constant(n_quad, 1.0 / (alpha * n_quad));
  for (int k = 0; k < n_quad; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_quad;
    w.directions.col(k) = (alpha * xi0 + radius * (std::cos(th) * e1 + std::sin(th) * e2)).normalized();
  }
  return w;
}

SphereMeasure build_W(double m, double a, const Vec3& xi0, int n_quad) {
  if (n_quad < 16) throw Error(ErrorKind::InvalidArgument, "n_quad must be >= 16", n_quad);
  const ModifiedSpeedParams p = alpha_beta(m, a);
  SphereMeasure w = circle_measure(xi0, p.alpha, n_quad);
  w.weights *= 1.0 + p.beta;
  if (p.beta > 0.0) {
    const Eigen::Index k = w.size();
    w.directions.conservativeResize(3, k + 1);
    w.weights.conservativeResize(k + 1);
    w.directions.col(k) = -w.xi0;
    w.weights(k) = p.beta;
  }
  w.m = m;
  w.a = a;
  w.n_quad = n_quad;
  return w;
}

SphereMoments moments(const SphereMeasure& w) {
  SphereMoments out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const Vec3 xi = w.directions.col(i);
    out.first += w.weights(i) * xi;
    out.second += w.weights(i) * (xi * xi.transpose());
  }
  return out;
}

double implied_a(const SphereMoments& mom, const Vec3& xi0) {
  const double m = mom.second.trace();
  return 0.5 * (3.0 * xi0.dot(mom.second * xi0) - m);
}

SphereMoments expected_moments(double m, double a, const Vec3& xi0) {
  SphereMoments out;
  out.first = xi0;
  out.second = a * (xi0 * xi0.transpose()) + (m - a) / 3.0 * Mat3::Identity();
  return out;
}

namespace {

void attach(VarifoldSample& v, const SampledCurrent& current, double m, double a, int n_quad,
            double scale, Eigen::Index site_offset) {
  // every W^{m,a}[τ] has the same atom count
  const Eigen::Index per_atom = build_W(m, a, Vec3::UnitZ(), n_quad).size();
  Eigen::Index k0 = v.size();
  const Eigen::Index total = k0 + per_atom * current.atom_count();
  v.positions.conservativeResize(3, total);
  v.directions.conservativeResize(3, total);
  v.weights.conservativeResize(total);
  Eigen::Index site = site_offset;
  for (const auto& loop : current.loops()) {
    for (Eigen::Index n = 0; n < loop.positions.cols(); ++n, ++site, k0 += per_atom) {
      const Vec3 wv = loop.weights.col(n);
      const double len = wv.norm();
      const SphereMeasure W = build_W(m, a, wv / len, n_quad);
      const Eigen::Index k = W.size();
      for (Eigen::Index j = 0; j < k; ++j) {
        v.positions.col(k0 + j) = loop.positions.col(n);
        v.directions.col(k0 + j) = W.directions.col(j);
        v.weights(k0 + j) = scale * len * W.weights(j);
        v.site.push_back(site);
      }
    }
  }
}

}  // namespace

ModifiedFlowSample modified_undercurrent(const FlowInterpolant& ref, double m, double a, double t,
                                         int n_quad) {
  alpha_beta(m, a);
  ModifiedFlowSample out;
  out.reference_time = a * t;
  out.current = current_of(ref.curve_at(out.reference_time));
  out.varifold.positions.resize(3, 0);
  out.varifold.directions.resize(3, 0);
  out.varifold.weights.resize(0);
  attach(out.varifold, out.current, m, a, n_quad, 1.0, 0);
  return out;
}

ModifiedFlowSample mixture(const FlowInterpolant& ref, double m, const std::vector<double>& a_nodes,
                           const std::vector<double>& rho, double t, int n_quad) {
  if (a_nodes.size() != rho.size() || a_nodes.empty()) {
    throw Error(ErrorKind::InvalidArgument, "mixture needs matching, non-empty nodes and weights");
  }
  double total = 0.0;
  for (double r : rho) {
    if (r < 0.0) throw Error(ErrorKind::InvalidArgument, "mixture weights must be nonnegative", r);
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "mixture weights must sum to one", total);
  }
  ModifiedFlowSample out;
  out.reference_time = t;
  out.varifold.positions.resize(3, 0);
  out.varifold.directions.resize(3, 0);
  out.varifold.weights.resize(0);
  Eigen::Index sites = 0;
  for (std::size_t k = 0; k < a_nodes.size(); ++k) {
    alpha_beta(m, a_nodes[k]);
    const SampledCurrent slice = current_of(ref.curve_at(a_nodes[k] * t));
    attach(out.varifold, slice, m, a_nodes[k], n_quad, rho[k], sites);
    sites += slice.atom_count();
    out.current.append(slice.scaled(rho[k]));
  }
  return out;
}

void uniform_mixture(double m, int count, std::vector<double>& a_nodes, std::vector<double>& rho) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "mixture needs at least one node");
  const double lo = a_min(m);
  const double width = (m - lo) / count;
  a_nodes.resize(static_cast<std::size_t>(count));
  rho.assign(static_cast<std::size_t>(count), 1.0 / count);
  for (int k = 0; k < count; ++k) a_nodes[static_cast<std::size_t>(k)] = lo + (k + 0.5) * width;
}

double StepSpeed::at(double tau) const {
  if (breaks.size() != values.size() || breaks.empty() || breaks.front() != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "step speed needs breaks starting at 0, one per value");
  }
  if (tau < 0.0) throw Error(ErrorKind::OutOfRange, "step speed defined for tau >= 0", tau);
  std::size_t i = 0;
  while (i + 1 < breaks.size() && tau >= breaks[i + 1]) ++i;
  return values[i];
}

double StepSpeed::integral(double tau) const {
  at(tau);
  double total = 0.0;
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const double lo = breaks[i];
    if (tau <= lo) break;
    const double hi = i + 1 < breaks.size() ? std::min(tau, breaks[i + 1]) : tau;
    total += values[i] * (hi - lo);
  }
  return total;
}

ModifiedFlowSample reparametrized(const FlowInterpolant& ref, double m, const StepSpeed& speed,
                                  double tau, int n_quad) {
  const double lo = a_min(m);
  bool positive = speed.values.front() > 0.0;
  for (double a : speed.values) {
    if (a < lo || a > m) {
      throw Error(ErrorKind::MomentProblemInfeasible, "step speed value outside [a_m, m]", a);
    }
    if (a == 0.0 || (a > 0.0) != positive) {
      throw Error(ErrorKind::InvalidArgument, "step speed must keep one sign away from zero", a);
    }
  }
  const double a = speed.at(tau);
  const double t = speed.integral(tau) / a;
  return modified_undercurrent(ref, m, a, t, n_quad);
}

}  // namespace filament
