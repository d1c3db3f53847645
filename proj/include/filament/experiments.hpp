#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "filament/diagnostics.hpp"
#include "filament/recurrence.hpp"

namespace filament {

// --- polygon recurrence -----------------------------------------------------

struct PolygonRunOptions {
  Eigen::Index samples = 1024;
  double t_end = 0.16;
  /// Defect sampling interval (time units).
  double defect_interval = 1e-4;
  /// Stored frame interval; a multiple of the defect interval.
  double frame_interval = 5e-4;
  double sigma = 0.5;
  double fp_tol = 1e-13;
  DefectOptions defect;
  double min_prominence = 0.05;
  /// Receives progress lines when set.
  std::function<void(const std::string&)> log;
};

struct PolygonRunResult {
  SolverConfig config;
  RecurrenceScanner scanner;
  RecurrenceReport report;
  Trajectory frames;
};

/// dt is the largest value ≤ σΔx² dividing the defect interval.
SolverConfig polygon_solver_config(double spacing, const PolygonRunOptions& options);

PolygonRunResult polygon_recurrence(const std::vector<Vec3>& vertices, const PolygonRunOptions& options);

/// Observed minimum matched to a reference time (nullopt: nothing within tol).
struct MinimumMatch {
  double expected = 0.0;
  std::optional<RecurrenceEvent> event;
};

/// For each expected time the reported minimum closest to it within the
/// relative tolerance.
std::vector<MinimumMatch> match_minima(const RecurrenceReport& report, const std::vector<double>& expected,
                                       double rel_tol);

// --- bullet -----------------------------------------------------------------

struct BulletReport {
  int n_twist = 0;
  Eigen::Index samples = 0;
  double t_end = 0.0;
  double speed = 0.0;          // fitted axial centroid speed
  double momentum = 0.0;       // |P(T_0)|
  double expected_speed = 0.0; // n
  double expected_momentum = 0.0;  // 2π/n
};

BulletReport bullet_experiment(int n_twist = 3, Eigen::Index samples = 1536, double t_end = 0.01);

// --- helix wrapped circle ---------------------------------------------------

struct HelixRun {
  int turns = 0;
  Eigen::Index samples = 0;
  double tube_radius = 0.0;
  double m_measured = 0.0;  // ℓ_wrapped / ℓ_base
  double horizon = 0.0;     // fit window
  double speed = 0.0;       // fitted centroid speed along the base normal
};

struct HelixSpeedReport {
  double m_target = 0.0;
  double predicted = 0.0;   // a_min(m) · 2π / ℓ_base
  std::vector<HelixRun> runs;
};

/// Unit circle base; N = samples_per_turn · N_h samples per run. The
/// centroid wobbles with the period 2π/κ² of the helix, so each run lasts
/// `periods` of those and the speed is a straight-line fit over that window.
HelixSpeedReport helix_speed_experiment(double m_target, const std::vector<int>& turns, double periods = 3.0,
                                        int samples_per_turn = 64);

// --- two circles ------------------------------------------------------------

struct TwoCirclesReport {
  double r1 = 1.0;
  double r2 = 2.0;
  std::vector<double> times;
  std::vector<double> separation;  // axial centroid separation
  double separation_rate = 0.0;    // least-squares slope
  double expected_rate = 0.0;      // |1/r1 - 1/r2|
  // additivity residuals at the final time: |f(sum) - f(1) - f(2)|
  double momentum_residual = 0.0;
  double angular_residual = 0.0;
  double mass_residual = 0.0;
  double pairing_residual = 0.0;
};

/// Circles of radii r1, r2 in the plane z = 0 touching at one point, both
/// with normal ẑ, evolved independently with a common Δt.
TwoCirclesReport two_circles_experiment(double r1 = 1.0, double r2 = 2.0, double t_end = 0.2,
                                        double spacing = 2.0 * 3.141592653589793 / 256.0);

// --- field dictionaries ----------------------------------------------------

/// Twenty fields inside `box`: X_1..3, Y_1..3, eight Gaussian bumps, two
/// gradient bumps and four cut-off differences, placed by a seeded generator.
std::vector<TestField> standard_dictionary(const Box& box, std::uint64_t seed = 1);

/// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace filament
