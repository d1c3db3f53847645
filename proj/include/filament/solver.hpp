#pragma once

#include <functional>
#include <vector>

#include "filament/curve.hpp"

namespace filament {

struct SolverConfig {
  /// Time step; negative values integrate backwards.
  double dt = 0.0;
  /// Stability ratio: |Δt| ≤ σ Δx² is required.
  double sigma = 0.5;
  /// Sup-norm tolerance between consecutive fixed-point iterates.
  double fp_tol = 1e-13;
  int fp_max_iters = 200;
  /// Renormalize |u_n| after every step. The scheme conserves the norms on
  /// its own; this only exists to measure the difference.
  bool renormalize = false;

  /// Throws ErrorKind::CflViolation / InvalidArgument.
  void validate(double spacing) const;

  /// Δt = ratio · Δx², other fields default.
  static SolverConfig for_spacing(double spacing, double ratio = 0.5);
};

struct ConservationLedger {
  Vec3 mean = Vec3::Zero();  // Σ_n u_n
  double h1 = 0.0;           // Σ_n |u_n - u_{n+1}|²
};

/// Drift of the scheme's three conserved quantities relative to the ledger.
struct ConservationReport {
  double norm_drift = 0.0;            // max_n | |u_n| - 1 |
  Vec3 mean_drift = Vec3::Zero();     // |Σu_n - Σu_n(0)| per component
  double h1_drift = 0.0;              // |H¹ - H¹(0)|

  double max_mean_drift() const { return mean_drift.maxCoeff(); }
};

struct FlowState {
  TangentField u;
  double t = 0.0;
  Vec3 centroid = Vec3::Zero();
  long step_count = 0;
  ConservationLedger ledger;
};

double h1_seminorm(const TangentField& u);
ConservationLedger ledger_of(const TangentField& u);

/// Tangents of the curve (after closure projection), centroid of the curve,
/// ledger frozen at t = 0.
FlowState initial_state(const ClosedCurve& curve);

ConservationReport conserved_report(const FlowState& state);

/// Centroid velocity (1/N) Σ u_n × (u_{n+1} - u_{n-1}) / (2Δx).
Vec3 centroid_velocity(const TangentField& u);

/// reconstruct(u) translated so its centroid is the integrated centroid.
ClosedCurve curve_of(const FlowState& state);

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Crank–Nicolson integrator for ∂t u = u × ∂ss u, resolved by Jacobi
/// fixed-point sweeps. Holds scratch buffers; one instance per thread.
class Integrator {
 public:
  Integrator(SolverConfig config, double spacing);

  const SolverConfig& config() const { return config_; }

  /// Advance in place by one step.
  StepStats advance(FlowState& state);

 private:
  SolverConfig config_;
  double spacing_;
  Points frozen_;   // (u_{n-1} + u_{n+1}) / (2Δx²) at time level j
  Points iterate_;
};

/// One step on a copy of `state`.
FlowState step(const FlowState& state, const SolverConfig& config);

struct Frame {
  double t = 0.0;
  long step = 0;
  ClosedCurve curve;
  ConservationReport conserved;
  /// Largest fixed-point iteration count since the previous frame.
  int fp_iterations = 0;
};

struct Trajectory {
  SolverConfig config;
  long stride = 1;
  std::vector<Frame> frames;

  /// Time between consecutive output frames.
  double frame_interval() const { return config.dt * static_cast<double>(stride); }
  double t_begin() const { return frames.front().t; }
  double t_end() const { return frames.back().t; }
  /// The frame at time t (within half a solver step); ErrorKind::OutOfRange
  /// otherwise.
  const Frame& at(double t) const;
  /// Index of the frame closest in time to t.
  std::size_t nearest(double t) const;
};

using FrameSink = std::function<void(const Frame&)>;

/// Step until t ≥ t_end, emitting a frame whenever the global step count is a
/// multiple of `stride`, and at the final step. Returns the final state.
FlowState run_streaming(FlowState state, const SolverConfig& config, double t_end,
                        long stride, const FrameSink& sink);

Trajectory run(const ClosedCurve& initial, const SolverConfig& config, double t_end,
               long stride);

/// Frames on [t_begin, t_end] with t_begin ≤ 0 ≤ t_end, integrating backwards
/// from the initial curve for the negative part.
Trajectory run_span(const ClosedCurve& initial, const SolverConfig& config,
                    double t_begin, double t_end, long stride);

/// Thread cap from FILAMENT_LAB_THREADS (default: all available).
int solver_threads();

}  // namespace filament
