#pragma once

#include <vector>

#include "filament/solver.hpp"
#include "filament/spectral.hpp"

namespace filament {

/// A trajectory as a function of (s, t): trigonometric in s, cubic Hermite
/// in t with the binormal velocity γ_s × γ_ss as nodal slopes.
class FlowInterpolant {
 public:
  explicit FlowInterpolant(const Trajectory& traj);

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  double length() const { return length_; }
  Eigen::Index samples() const { return samples_; }
  std::size_t frame_count() const { return times_.size(); }
  double frame_time(std::size_t k) const { return times_[k]; }
  const PeriodicInterpolant& frame(std::size_t k) const { return position_[k]; }

  /// Node positions at time t. Exact at frame times.
  Points nodes_at(double t) const;
  ClosedCurve curve_at(double t) const;
  /// The curve at time t as a function of arclength.
  PeriodicInterpolant slice_at(double t) const;

 private:
  struct Weights {
    std::size_t k;
    double w[4];  // p_k, v_k, p_{k+1}, v_{k+1}
  };
  Weights hermite(double t) const;

  std::vector<double> times_;
  std::vector<Points> nodes_;
  std::vector<Points> velocity_;
  std::vector<PeriodicInterpolant> position_;
  std::vector<PeriodicInterpolant> velocity_interp_;
  double length_;
  Eigen::Index samples_;
};

}  // namespace filament
