#include "filament/spectral.hpp"

#include <cmath>
#include <numbers>

namespace filament {

PeriodicInterpolant::PeriodicInterpolant(const Points& samples, double period)
    : n_(samples.cols()), period_(period) {
  if (n_ < 3 || !(period > 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "periodic interpolant needs >= 3 samples and a positive period");
  }
  const Eigen::Index k_max = (n_ - 1) / 2;
  has_nyquist_ = (n_ % 2 == 0);
  cos_.setZero(3, k_max);
  sin_.setZero(3, k_max);
  mean_ = samples.rowwise().mean();

  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n_);
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    for (Eigen::Index j = 0; j < n_; ++j) {
      // reduce k*j mod n first so the angle stays small and exact
      const double angle = two_pi_over_n * static_cast<double>((k * j) % n_);
      a += samples.col(j) * std::cos(angle);
      b += samples.col(j) * std::sin(angle);
    }
    cos_.col(k - 1) = a * (2.0 / static_cast<double>(n_));
    sin_.col(k - 1) = b * (2.0 / static_cast<double>(n_));
  }
  if (has_nyquist_) {
    Vec3 acc = Vec3::Zero();
    for (Eigen::Index j = 0; j < n_; ++j) {
      acc += (j % 2 == 0 ? 1.0 : -1.0) * samples.col(j);
    }
    nyquist_ = acc / static_cast<double>(n_);
  }
}

PeriodicInterpolant PeriodicInterpolant::combine(
    std::span<const double> weights,
    std::span<const PeriodicInterpolant* const> parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "combine: size mismatch");
  }
  PeriodicInterpolant out;
  const PeriodicInterpolant& first = *parts.front();
  out.n_ = first.n_;
  out.period_ = first.period_;
  out.has_nyquist_ = first.has_nyquist_;
  out.cos_.setZero(3, first.cos_.cols());
  out.sin_.setZero(3, first.sin_.cols());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const PeriodicInterpolant& p = *parts[i];
    if (p.n_ != out.n_) {
      throw Error(ErrorKind::InvalidArgument, "combine: sample count mismatch");
    }
    out.mean_ += weights[i] * p.mean_;
    out.cos_ += weights[i] * p.cos_;
    out.sin_ += weights[i] * p.sin_;
    out.nyquist_ += weights[i] * p.nyquist_;
  }
  return out;
}

std::array<Vec3, 4> PeriodicInterpolant::jet(double s, int order) const {
  const double omega = 2.0 * std::numbers::pi / period_;
  const Eigen::Index k_max = cos_.cols();
  std::array<Vec3, 4> out{mean_, Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  // cos/sin of kωs by rotation; refreshed every 64 steps to bound drift
  const double base = omega * s;
  const double c1 = std::cos(base);
  const double s1 = std::sin(base);
  double ck = c1;
  double sk = s1;
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    if (k % 64 == 0) {
      ck = std::cos(base * static_cast<double>(k));
      sk = std::sin(base * static_cast<double>(k));
    }
    const auto a = cos_.col(k - 1);
    const auto b = sin_.col(k - 1);
    const double w = omega * static_cast<double>(k);
    out[0] += a * ck + b * sk;
    if (order >= 1) out[1] += w * (-a * sk + b * ck);
    if (order >= 2) out[2] += (w * w) * (-a * ck - b * sk);
    if (order >= 3) out[3] += (w * w * w) * (a * sk - b * ck);
    const double next_c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = next_c;
  }
  if (has_nyquist_) {
    const double w = omega * static_cast<double>(n_ / 2);
    const double c = std::cos(w * s);
    const double sn = std::sin(w * s);
    out[0] += nyquist_ * c;
    if (order >= 1) out[1] += -w * nyquist_ * sn;
    if (order >= 2) out[2] += -(w * w) * nyquist_ * c;
    if (order >= 3) out[3] += (w * w * w) * nyquist_ * sn;
  }
  return out;
}

Points PeriodicInterpolant::derivative_at_nodes(int order) const {
  Points out(3, n_);
  const double h = period_ / static_cast<double>(n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    out.col(j) = jet(h * static_cast<double>(j), order)[static_cast<std::size_t>(order)];
  }
  return out;
}

Eigen::VectorXd spectral_curvature(const PeriodicInterpolant& p) {
  const Points d1 = p.derivative_at_nodes(1);
  const Points d2 = p.derivative_at_nodes(2);
  Eigen::VectorXd kappa(d1.cols());
  for (Eigen::Index j = 0; j < d1.cols(); ++j) {
    const Vec3 v = d1.col(j);
    const double speed = v.norm();
    kappa(j) = v.cross(Vec3(d2.col(j))).norm() / (speed * speed * speed);
  }
  return kappa;
}

}  // namespace filament
