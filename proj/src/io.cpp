#include "filament/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "filament/recurrence.hpp"

namespace filament {

namespace {

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
  throw Error(ErrorKind::Io, what + ": " + path.string());
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, const fs::path& path) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) io_fail("malformed number '" + std::string(s) + "'", path);
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail("cannot write", path);
  return out;
}

json points_to_json(const Points& p) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < p.cols(); ++i) rows.push_back(vec_to_json(p.col(i)));
  return rows;
}

Points points_from_json(const json& j) {
  Points p(3, static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p.col(static_cast<Eigen::Index>(i)) = vec_from_json(j[i]);
  return p;
}

json report_to_json(const ConservationReport& r) {
  return {{"norm_drift", r.norm_drift}, {"mean_drift", vec_to_json(r.mean_drift)}, {"h1_drift", r.h1_drift}};
}

ConservationReport report_from_json(const json& j) {
  ConservationReport r;
  r.norm_drift = j.at("norm_drift").get<double>();
  r.mean_drift = vec_from_json(j.at("mean_drift"));
  r.h1_drift = j.at("h1_drift").get<double>();
  return r;
}

json circle_to_json(const CircleParams& c) {
  return {{"radius", c.radius}, {"center", vec_to_json(c.center)}, {"normal", vec_to_json(c.normal)}};
}

CircleParams circle_from_json(const json& j) {
  CircleParams c;
  c.radius = j.value("radius", 1.0);
  if (j.contains("center")) c.center = vec_from_json(j["center"]);
  if (j.contains("normal")) c.normal = vec_from_json(j["normal"]);
  return c;
}

std::string frame_file(long index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06ld.csv", index);
  return buf;
}

}  // namespace

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorKind::InvalidArgument, "expected a 3-vector, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json generator_to_json(const CurveFamily& family) {
  return std::visit(
      [](const auto& g) -> json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CircleParams>) {
          json j = circle_to_json(g);
          j["family"] = "circle";
          return j;
        } else if constexpr (std::is_same_v<T, PolygonParams>) {
          json verts = json::array();
          for (const Vec3& v : g.vertices) verts.push_back(vec_to_json(v));
          return {{"family", "polygon"}, {"vertices", verts}};
        } else if constexpr (std::is_same_v<T, BulletParams>) {
          return {{"family", "bullet"}, {"n_twist", g.n_twist}};
        } else {
          return {{"family", "helix"},
                  {"base", circle_to_json(g.base)},
                  {"turns", g.turns},
                  {"target_ratio", g.target_ratio},
                  {"tube_radius", g.tube_radius}};
        }
      },
      family);
}

CurveFamily generator_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "circle") return circle_from_json(j);
  if (family == "polygon") {
    PolygonParams p;
    for (const auto& v : j.at("vertices")) p.vertices.push_back(vec_from_json(v));
    return p;
  }
  if (family == "square") return PolygonParams{unit_square_vertices()};
  if (family == "halfcube") return PolygonParams{half_cube_vertices()};
  if (family == "bullet") return BulletParams{j.value("n_twist", 1)};
  if (family == "helix") {
    HelixWrapParams h;
    if (j.contains("base")) h.base = circle_from_json(j["base"]);
    h.turns = j.value("turns", h.turns);
    h.target_ratio = j.value("target_ratio", 0.0);
    h.tube_radius = j.value("tube_radius", 0.0);
    return h;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown generator family '" + family + "'");
}

json solver_to_json(const SolverConfig& c) {
  return {{"dt", c.dt},
          {"sigma", c.sigma},
          {"fp_tol", c.fp_tol},
          {"fp_max_iters", c.fp_max_iters},
          {"renormalize", c.renormalize}};
}

SolverConfig solver_from_json(const json& j) {
  SolverConfig c;
  c.dt = j.value("dt", c.dt);
  c.sigma = j.value("sigma", c.sigma);
  c.fp_tol = j.value("fp_tol", c.fp_tol);
  c.fp_max_iters = j.value("fp_max_iters", c.fp_max_iters);
  c.renormalize = j.value("renormalize", c.renormalize);
  return c;
}

json to_json(const RunConfig& c) {
  return {{"generator", generator_to_json(c.generator)},
          {"samples", c.samples},
          {"solver", solver_to_json(c.solver)},
          {"t_end", c.t_end},
          {"stride", c.stride},
          {"experiment", c.experiment},
          {"output_dir", c.output_dir},
          {"seed", c.seed}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (j.contains("generator")) c.generator = generator_from_json(j["generator"]);
  c.samples = j.value("samples", c.samples);
  if (j.contains("solver")) c.solver = solver_from_json(j["solver"]);
  c.t_end = j.value("t_end", c.t_end);
  c.stride = j.value("stride", c.stride);
  c.experiment = j.value("experiment", c.experiment);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.seed = j.value("seed", c.seed);
  return c;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

// --- curve files ------------------------------------------------------------

void write_curve_csv(const fs::path& path, const ClosedCurve& curve) {
  std::ofstream out = open_out(path);
  out << "# filament-lab curve v1, N=" << curve.size() << ", length=" << fmt17(curve.length()) << '\n';
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    const Vec3 p = curve.point(i);
    out << fmt17(p.x()) << ',' << fmt17(p.y()) << ',' << fmt17(p.z()) << '\n';
  }
  if (!out) io_fail("write failed", path);
}

ClosedCurve read_curve_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot read", path);
  std::string header;
  std::getline(in, header);
  const std::string magic = "# filament-lab curve v1, N=";
  if (header.rfind(magic, 0) != 0) io_fail("not a curve file", path);
  const auto comma = header.find(", length=");
  if (comma == std::string::npos) io_fail("curve header lacks length", path);
  const auto n = static_cast<Eigen::Index>(
      parse_double(std::string_view(header).substr(magic.size(), comma - magic.size()), path));
  const double length = parse_double(std::string_view(header).substr(comma + 9), path);

  Points pts(3, n);
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= n) io_fail("more rows than N", path);
    std::string_view rest(line);
    for (int c = 0; c < 3; ++c) {
      const auto cut = rest.find(',');
      if ((c < 2) != (cut != std::string_view::npos)) io_fail("expected three columns", path);
      pts(c, row) = parse_double(rest.substr(0, cut), path);
      if (c < 2) rest.remove_prefix(cut + 1);
    }
    ++row;
  }
  if (row != n) io_fail("fewer rows than N", path);
  return ClosedCurve(std::move(pts), length);
}

// --- trajectory directories -------------------------------------------------

json to_json(const Manifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) {
    frames.push_back({{"t", f.t},
                      {"step", f.step},
                      {"file", f.file},
                      {"defect", f.defect},
                      {"conserved", report_to_json(f.conserved)}});
  }
  return {{"version", m.version},
          {"config", to_json(m.config)},
          {"generator", generator_to_json(m.config.generator)},
          {"ledger", {{"mean", vec_to_json(m.ledger.mean)}, {"h1", m.ledger.h1}}},
          {"frames", frames}};
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw Error(ErrorKind::Io, "unsupported manifest version", m.version);
  m.config = run_config_from_json(j.at("config"));
  m.ledger.mean = vec_from_json(j.at("ledger").at("mean"));
  m.ledger.h1 = j.at("ledger").at("h1").get<double>();
  for (const auto& f : j.at("frames")) {
    m.frames.push_back(ManifestFrame{f.at("t").get<double>(), f.at("step").get<long>(),
                                     f.at("file").get<std::string>(), f.at("defect").get<double>(),
                                     report_from_json(f.at("conserved"))});
  }
  return m;
}

Manifest read_manifest(const fs::path& dir) { return manifest_from_json(read_json(dir / "manifest.json")); }

TrajectoryWriter::TrajectoryWriter(fs::path dir, RunConfig config, ConservationLedger ledger)
    : dir_(std::move(dir)) {
  manifest_.config = std::move(config);
  manifest_.ledger = ledger;
  fs::create_directories(dir_);
  flush();
}

TrajectoryWriter::TrajectoryWriter(fs::path dir) : dir_(std::move(dir)), manifest_(read_manifest(dir_)) {}

void TrajectoryWriter::add(const Frame& frame, double defect) {
  const std::string file = frame_file(static_cast<long>(manifest_.frames.size()));
  write_curve_csv(dir_ / file, frame.curve);
  manifest_.frames.push_back(ManifestFrame{frame.t, frame.step, file, defect, frame.conserved});
  flush();
}

void TrajectoryWriter::flush() const { write_json(dir_ / "manifest.json", to_json(manifest_)); }

namespace {

// Exact solver state, so a resumed run continues bit-for-bit.
void write_checkpoint(const fs::path& dir, const FlowState& s) {
  write_json(dir / "checkpoint.json", {{"t", s.t},
                                       {"step", s.step_count},
                                       {"spacing", s.u.spacing()},
                                       {"basepoint", vec_to_json(s.u.basepoint())},
                                       {"centroid", vec_to_json(s.centroid)},
                                       {"tangents", points_to_json(s.u.units())}});
}

FlowState read_checkpoint(const fs::path& dir, const ConservationLedger& ledger) {
  const json j = read_json(dir / "checkpoint.json");
  FlowState s{TangentField(points_from_json(j.at("tangents")), j.at("spacing").get<double>(),
                           vec_from_json(j.at("basepoint"))),
              j.at("t").get<double>(), vec_from_json(j.at("centroid")), j.at("step").get<long>(), ledger};
  return s;
}

FlowState advance_to_directory(FlowState state, const SolverConfig& cfg, double t_end, long stride,
                               TrajectoryWriter& writer, bool emit_start) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "output stride must be >= 1");
  Integrator integrator(cfg, state.u.spacing());
  const double span = t_end - state.t;
  if (!(span / cfg.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must lie ahead of the current time", t_end);
  const long last = state.step_count + static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
  int worst = 0;
  auto emit = [&](const fs::path& out) {
    Frame f{state.t, state.step_count, curve_of(state), conserved_report(state), worst};
    writer.add(f, polygonality_defect(f.curve));
    write_checkpoint(out, state);
    worst = 0;
  };
  const fs::path out = writer.directory();
  if (emit_start) emit(out);
  while (state.step_count < last) {
    worst = std::max(worst, integrator.advance(state).iterations);
    if (state.step_count % stride == 0 || state.step_count == last) emit(out);
  }
  return state;
}

}  // namespace

FlowState run_to_directory(const RunConfig& config_in) {
  RunConfig config = config_in;
  const ClosedCurve initial = generate(config.generator, config.samples);
  if (config.solver.dt == 0.0) {
    const SolverConfig resolved = SolverConfig::for_spacing(initial.spacing(), config.solver.sigma);
    config.solver.dt = resolved.dt;
  }
  config.solver.validate(initial.spacing());
  const FlowState start = initial_state(initial);
  TrajectoryWriter writer(config.output_dir, config, start.ledger);
  return advance_to_directory(start, config.solver, config.t_end, config.stride, writer, true);
}

FlowState resume_directory(const fs::path& dir, double t_end) {
  TrajectoryWriter writer(dir);
  const Manifest& m = writer.manifest();
  if (m.frames.empty()) throw Error(ErrorKind::Io, "nothing to resume in " + dir.string());
  const FlowState state = read_checkpoint(dir, m.ledger);
  if (state.step_count != m.frames.back().step) {
    throw Error(ErrorKind::Io, "checkpoint does not match the last frame", static_cast<double>(state.step_count));
  }
  return advance_to_directory(state, m.config.solver, t_end, m.config.stride, writer, false);
}

Trajectory load_trajectory(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  Trajectory traj{m.config.solver, m.config.stride, {}};
  for (const auto& f : m.frames) {
    traj.frames.push_back(Frame{f.t, f.step, read_curve_csv(dir / f.file), f.conserved, 0});
  }
  return traj;
}

// --- reports ----------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) io_fail("write failed", path);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot read", path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    io_fail(std::string("malformed JSON (") + e.what() + ")", path);
  }
}

void write_columns_csv(const fs::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size() || columns.empty()) {
    throw Error(ErrorKind::InvalidArgument, "one name per column required");
  }
  const std::size_t rows = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw Error(ErrorKind::InvalidArgument, "columns differ in length");
  }
  std::ofstream out = open_out(path);
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << fmt17(columns[k][r]);
    out << '\n';
  }
  if (!out) io_fail("write failed", path);
}

json columns_to_json(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
  json j = json::object();
  for (std::size_t k = 0; k < names.size() && k < columns.size(); ++k) j[names[k]] = columns[k];
  return j;
}

void write_sphere_measure_csv(const fs::path& path, const SphereMeasure& w) {
  std::vector<std::vector<double>> cols(4);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (int c = 0; c < 3; ++c) cols[static_cast<std::size_t>(c)].push_back(w.directions(c, i));
    cols[3].push_back(w.weights(i));
  }
  write_columns_csv(path, {"xi1", "xi2", "xi3", "weight"}, cols);
}

void write_fg_csv(const fs::path& path, const FGReport& r) {
  write_columns_csv(path, {"t", "F", "G", "envelope"}, {r.t, r.F, r.G, r.envelope});
}

void write_margins_csv(const fs::path& path, const std::vector<MarginSample>& samples) {
  std::vector<std::vector<double>> cols(7);
  for (const auto& s : samples) {
    for (int c = 0; c < 3; ++c) {
      cols[static_cast<std::size_t>(c)].push_back(s.x(c));
      cols[static_cast<std::size_t>(3 + c)].push_back(s.xi(c));
    }
    cols[6].push_back(s.margin);
  }
  write_columns_csv(path, {"x", "y", "z", "xi1", "xi2", "xi3", "margin"}, cols);
}

void write_varifold_csv(const fs::path& path, const VarifoldSample& v) {
  std::vector<std::vector<double>> cols(7);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      cols[static_cast<std::size_t>(c)].push_back(v.positions(c, i));
      cols[static_cast<std::size_t>(3 + c)].push_back(v.directions(c, i));
    }
    cols[6].push_back(v.weights(i));
  }
  write_columns_csv(path, {"x", "y", "z", "xi1", "xi2", "xi3", "weight"}, cols);
}

void write_varifold_frames(const fs::path& dir, const json& header, const std::vector<VarifoldFrame>& frames) {
  json manifest = {{"version", 1}, {"kind", "varifold"}, {"header", header}, {"frames", json::array()}};
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string file = frame_file(static_cast<long>(k));
    write_varifold_csv(dir / file, frames[k].sample.varifold);
    manifest["frames"].push_back({{"t", frames[k].t},
                                  {"file", file},
                                  {"reference_time", frames[k].sample.reference_time},
                                  {"mass", frames[k].sample.varifold.mass()},
                                  {"undercurrent_mass", frames[k].sample.current.mass()}});
  }
  write_json(dir / "manifest.json", manifest);
}

// --- field dictionaries -----------------------------------------------------

namespace {

Box box_from_json(const json& j, const Box& fallback) {
  if (!j.contains("box")) return fallback;
  return Box{vec_from_json(j["box"].at("lo")), vec_from_json(j["box"].at("hi"))};
}

int axis_from_json(const json& j) {
  const int axis = j.value("axis", 0);
  if (axis < 0 || axis > 2) throw Error(ErrorKind::InvalidArgument, "axis must be 0, 1 or 2", axis);
  return axis;
}

}  // namespace

TestField field_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  const Box box = box_from_json(j, Box{});
  if (family == "momentum") return TestField::momentum(axis_from_json(j), box);
  if (family == "angular") return TestField::angular(axis_from_json(j), box);
  if (family == "gaussian_bump") {
    return TestField::gaussian_bump(vec_from_json(j.at("center")), vec_from_json(j.at("amplitude")),
                                    j.at("width").get<double>());
  }
  if (family == "gradient_bump") {
    return TestField::gradient_bump(vec_from_json(j.at("center")), j.at("width").get<double>());
  }
  if (family == "cutoff_shifted") {
    return TestField::cutoff_shifted(axis_from_json(j), vec_from_json(j.at("a")), vec_from_json(j.at("b")),
                                     j.at("scale").get<double>());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown field family '" + family + "'");
}

std::vector<TestField> fields_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("fields") ? j["fields"] : j;
  if (!list.is_array()) throw Error(ErrorKind::InvalidArgument, "field dictionary must be an array");
  std::vector<TestField> out;
  for (const auto& f : list) out.push_back(field_from_json(f));
  return out;
}

}  // namespace filament
