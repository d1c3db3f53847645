#include "filament/flow.hpp"

#include <algorithm>
#include <sstream>

namespace filament {

FlowInterpolant::FlowInterpolant(const Trajectory& traj) {
  if (traj.frames.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "flow interpolation needs at least two frames");
  }
  length_ = traj.frames.front().curve.length();
  samples_ = traj.frames.front().curve.size();
  for (const Frame& f : traj.frames) {
    if (f.curve.size() != samples_) {
      throw Error(ErrorKind::InvalidArgument, "frames differ in sample count");
    }
    if (!times_.empty() && !(f.t > times_.back())) {
      throw Error(ErrorKind::InvalidArgument, "frame times must increase");
    }
    times_.push_back(f.t);
    PeriodicInterpolant p(f.curve.points(), length_);
    const Points d1 = p.derivative_at_nodes(1);
    const Points d2 = p.derivative_at_nodes(2);
    Points v(3, samples_);
    for (Eigen::Index n = 0; n < samples_; ++n) {
      v.col(n) = Vec3(d1.col(n)).cross(Vec3(d2.col(n)));
    }
    nodes_.push_back(f.curve.points());
    velocity_interp_.emplace_back(v, length_);
    velocity_.push_back(std::move(v));
    position_.push_back(std::move(p));
  }
}

FlowInterpolant::Weights FlowInterpolant::hermite(double t) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t < times_.front() - slack || t > times_.back() + slack) {
    std::ostringstream msg;
    msg << "t = " << t << " outside [" << times_.front() << ", " << times_.back() << "]";
    throw Error(ErrorKind::OutOfRange, msg.str(), t);
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  k = std::min(k, times_.size() - 2);
  const double h = times_[k + 1] - times_[k];
  const double th = std::clamp((t - times_[k]) / h, 0.0, 1.0);
  const double th2 = th * th;
  const double th3 = th2 * th;
  return Weights{k,
                 {2 * th3 - 3 * th2 + 1, h * (th3 - 2 * th2 + th), -2 * th3 + 3 * th2,
                  h * (th3 - th2)}};
}

Points FlowInterpolant::nodes_at(double t) const {
  const Weights hw = hermite(t);
  const std::size_t k = hw.k;
  if (hw.w[0] == 1.0 && hw.w[1] == 0.0) return nodes_[k];
  return hw.w[0] * nodes_[k] + hw.w[1] * velocity_[k] + hw.w[2] * nodes_[k + 1] +
         hw.w[3] * velocity_[k + 1];
}

ClosedCurve FlowInterpolant::curve_at(double t) const {
  return ClosedCurve(nodes_at(t), length_);
}

PeriodicInterpolant FlowInterpolant::slice_at(double t) const {
  const Weights hw = hermite(t);
  const std::size_t k = hw.k;
  const double weights[4] = {hw.w[0], hw.w[1], hw.w[2], hw.w[3]};
  const PeriodicInterpolant* parts[4] = {&position_[k], &velocity_interp_[k], &position_[k + 1],
                                         &velocity_interp_[k + 1]};
  return PeriodicInterpolant::combine(weights, parts);
}

}  // namespace filament
