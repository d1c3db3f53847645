#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "filament/diagnostics.hpp"
#include "filament/solver.hpp"
#include "filament/stability.hpp"
#include "filament/varifold.hpp"

namespace filament {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  CurveFamily generator = CircleParams{};
  Eigen::Index samples = 256;
  SolverConfig solver;
  double t_end = 0.1;
  /// Solver steps between stored frames.
  long stride = 1;
  std::string experiment = "simulate";
  std::string output_dir = "run";
  std::uint64_t seed = 0;
};

bool operator==(const RunConfig& a, const RunConfig& b);

json generator_to_json(const CurveFamily& family);
CurveFamily generator_from_json(const json& j);
json solver_to_json(const SolverConfig& cfg);
SolverConfig solver_from_json(const json& j);
json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j);

json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const json& j);

// --- curve files ------------------------------------------------------------

/// `# filament-lab curve v1, N=<n>, length=<l>` then `x,y,z` rows, 17
/// significant digits.
void write_curve_csv(const fs::path& path, const ClosedCurve& curve);
ClosedCurve read_curve_csv(const fs::path& path);

// --- trajectory directories -------------------------------------------------

struct ManifestFrame {
  double t = 0.0;
  long step = 0;
  std::string file;
  double defect = 0.0;
  ConservationReport conserved;
};

struct Manifest {
  int version = 1;
  RunConfig config;
  ConservationLedger ledger;
  std::vector<ManifestFrame> frames;
};

json to_json(const Manifest& m);
Manifest manifest_from_json(const json& j);
Manifest read_manifest(const fs::path& dir);

/// One run directory: frame CSVs plus manifest.json, rewritten after every
/// frame so an interrupted run stays readable.
class TrajectoryWriter {
 public:
  TrajectoryWriter(fs::path dir, RunConfig config, ConservationLedger ledger);
  /// Continue an existing directory.
  explicit TrajectoryWriter(fs::path dir);

  void add(const Frame& frame, double defect);
  const Manifest& manifest() const { return manifest_; }
  const fs::path& directory() const { return dir_; }

 private:
  void flush() const;

  fs::path dir_;
  Manifest manifest_;
};

/// Run `config` from its generator, writing every stride-th frame.
FlowState run_to_directory(const RunConfig& config);
/// Continue a run directory from its last frame up to `t_end`, starting from
/// the exact solver state saved next to the manifest.
FlowState resume_directory(const fs::path& dir, double t_end);
Trajectory load_trajectory(const fs::path& dir);

// --- reports ----------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

/// CSV with a header row; all columns must have equal length.
void write_columns_csv(const fs::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns);
/// Same data as a JSON object of arrays.
json columns_to_json(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns);

void write_sphere_measure_csv(const fs::path& path, const SphereMeasure& w);
void write_fg_csv(const fs::path& path, const FGReport& report);

struct MarginSample {
  Vec3 x;
  Vec3 xi;
  double margin;
};
void write_margins_csv(const fs::path& path, const std::vector<MarginSample>& samples);

void write_varifold_csv(const fs::path& path, const VarifoldSample& v);

struct VarifoldFrame {
  double t = 0.0;
  ModifiedFlowSample sample;
};
/// Frame CSVs `x,y,z,xi1,xi2,xi3,weight` and a manifest.json holding
/// `header` plus per-frame time, file, mass and undercurrent mass.
void write_varifold_frames(const fs::path& dir, const json& header, const std::vector<VarifoldFrame>& frames);

/// {"family": ..., parameters..., "box": {"lo": [...], "hi": [...]}}.
TestField field_from_json(const json& j);
std::vector<TestField> fields_from_json(const json& j);

}  // namespace filament
