#pragma once

#include <vector>

#include "filament/solver.hpp"

namespace filament {

struct DefectOptions {
  /// Gaussian mollification width of the tangent field, as a fraction of ℓ.
  /// Zero uses the raw chords.
  double smoothing = 1.0 / 128.0;
  /// Corner threshold as a multiple of the median curvature (floored at the
  /// mean curvature).
  double threshold_factor = 5.0;
  /// Absolute threshold; overrides the factor when positive.
  double threshold = 0.0;
};

struct CornerCluster {
  Eigen::Index first = 0;  // first and last sample of the run (cyclic)
  Eigen::Index last = 0;
  double turning = 0.0;    // Σ κ Δx over the run
  Vec3 position = Vec3::Zero();
};

struct PolygonalityAnalysis {
  /// Curvature outside corner clusters over total curvature, in [0, 1].
  double defect = 1.0;
  double total_curvature = 0.0;
  double threshold = 0.0;
  std::vector<CornerCluster> corners;
  Eigen::VectorXd curvature;
};

/// Unit tangents mollified at width σ = smoothing · ℓ (forward chords when 0).
Points mollified_tangents(const ClosedCurve& curve, double smoothing);

PolygonalityAnalysis analyze_polygonality(const ClosedCurve& curve, const DefectOptions& options = {});
double polygonality_defect(const ClosedCurve& curve, const DefectOptions& options = {});

struct RecurrenceEvent {
  double t = 0.0;
  double defect = 0.0;
  double prominence = 0.0;
  int corners = 0;
  /// In-plane rotation of the M-fold corner pattern against frame 0, in
  /// [0, 2π/M); NaN when the pattern has no clear M-fold phase.
  double rotation = 0.0;
  double circumradius = 0.0;
  Points vertices;
};

struct RecurrenceReport {
  std::vector<RecurrenceEvent> events;
  std::vector<double> times;
  std::vector<double> defects;
};

/// Feeds frames in time order and reports prominent strict local minima of
/// the defect.
class RecurrenceScanner {
 public:
  explicit RecurrenceScanner(DefectOptions options = {}, double min_prominence = 0.05);

  void add(double t, const ClosedCurve& curve);
  RecurrenceReport report() const;
  /// As if the scan had stopped after the last sample at or before t_max.
  RecurrenceReport report(double t_max) const;

 private:
  struct Sample {
    double t;
    double defect;
    int corners;
    double rotation;
    double circumradius;
    Points vertices;
  };
  double rotation_of(const std::vector<CornerCluster>& corners, const Vec3& center, int fold) const;

  DefectOptions options_;
  double min_prominence_;
  bool have_plane_ = false;
  Vec3 e1_ = Vec3::UnitX();
  Vec3 e2_ = Vec3::UnitY();
  std::vector<Vec3> initial_corners_;
  Vec3 initial_center_ = Vec3::Zero();
  std::vector<Sample> samples_;
};

RecurrenceReport recurrence_scan(const Trajectory& traj, const DefectOptions& options = {},
                                 double min_prominence = 0.05);

/// Prominence of the minimum at index i: the smaller of the highest values
/// on the way (left, right) to a lower sample or the series end, minus v[i].
double prominence(const std::vector<double>& v, std::size_t i);

}  // namespace filament
