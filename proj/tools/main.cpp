#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"

#include "filament/experiments.hpp"
#include "filament/io.hpp"
#include "filament/stability.hpp"
#include "filament/varifold.hpp"

using namespace filament;

namespace {

struct GeneratorFlags {
  std::string family = "circle";
  double radius = 1.0;
  int n_twist = 3;
  int turns = 16;
  double ratio = 0.0;
  double tube = 0.0;
  std::string vertices_file;
};

CurveFamily make_family(const GeneratorFlags& g) {
  if (g.family == "circle") return CircleParams{g.radius, Vec3::Zero(), Vec3::UnitZ()};
  if (g.family == "square") return PolygonParams{unit_square_vertices()};
  if (g.family == "halfcube") return PolygonParams{half_cube_vertices()};
  if (g.family == "bullet") return BulletParams{g.n_twist};
  if (g.family == "helix") return HelixWrapParams{CircleParams{g.radius}, g.turns, g.ratio, g.tube};
  if (g.family == "polygon") {
    const json j = read_json(g.vertices_file);
    PolygonParams p;
    for (const auto& v : j) p.vertices.push_back(vec_from_json(v));
    return p;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown generator '" + g.family + "'");
}

void add_generator_flags(CLI::App* app, GeneratorFlags& g) {
  app->add_option("--generator", g.family, "Initial curve family")
      ->check(CLI::IsMember({"circle", "square", "halfcube", "bullet", "helix", "polygon"}));
  app->add_option("--radius", g.radius, "Circle (or helix base) radius")->check(CLI::PositiveNumber);
  app->add_option("--n-twist", g.n_twist, "Bullet winding number")->check(CLI::PositiveNumber);
  app->add_option("--turns", g.turns, "Helix windings")->check(CLI::PositiveNumber);
  app->add_option("--ratio", g.ratio, "Helix length ratio (bisects the tube radius)");
  app->add_option("--tube", g.tube, "Helix tube radius");
  app->add_option("--vertices", g.vertices_file, "JSON array of polygon vertices")->check(CLI::ExistingFile);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json trajectory_summary(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  double norm = 0.0, mean = 0.0, h1 = 0.0;
  for (const auto& f : m.frames) {
    norm = std::max(norm, f.conserved.norm_drift);
    mean = std::max(mean, f.conserved.max_mean_drift());
    h1 = std::max(h1, f.conserved.h1_drift);
  }
  return {{"directory", dir.string()},
          {"frames", m.frames.size()},
          {"t_end", m.frames.empty() ? 0.0 : m.frames.back().t},
          {"max_norm_drift", norm},
          {"max_mean_drift", mean},
          {"max_h1_drift", h1}};
}

// --- simulate ---------------------------------------------------------------

struct SimulateFlags {
  GeneratorFlags gen;
  RunConfig cfg;
  std::string config_file;
  std::string resume;
  double t_end = 0.1;
  double ratio = 0.5;
};

int simulate(SimulateFlags& f, const CLI::App& app) {
  if (!f.resume.empty()) {
    resume_directory(f.resume, f.t_end);
    print_json(trajectory_summary(f.resume));
    return 0;
  }
  RunConfig cfg = f.config_file.empty() ? f.cfg : run_config_from_json(read_json(f.config_file));
  if (f.config_file.empty() || app.count("--generator")) cfg.generator = make_family(f.gen);
  if (f.config_file.empty() || app.count("--t-end")) cfg.t_end = f.t_end;
  if (app.count("--n")) cfg.samples = f.cfg.samples;
  if (app.count("--dt")) cfg.solver.dt = f.cfg.solver.dt;
  if (app.count("--sigma")) cfg.solver.sigma = f.cfg.solver.sigma;
  if (app.count("--stride")) cfg.stride = f.cfg.stride;
  if (app.count("--out")) cfg.output_dir = f.cfg.output_dir;
  if (app.count("--seed")) cfg.seed = f.cfg.seed;
  if (cfg.solver.dt == 0.0) {
    const ClosedCurve probe = generate(cfg.generator, cfg.samples);
    cfg.solver.dt = f.ratio * probe.spacing() * probe.spacing();
  }
  run_to_directory(cfg);
  print_json(trajectory_summary(cfg.output_dir));
  return 0;
}

// --- diagnose ---------------------------------------------------------------

struct DiagnoseFlags {
  std::string run;
  std::string fields;
  std::string out;
  std::uint64_t seed = 1;
  double delta = 0.0;
};

int diagnose(const DiagnoseFlags& f) {
  const Trajectory traj = load_trajectory(f.run);
  const fs::path out = f.out.empty() ? fs::path(f.run) / "diagnostics" : fs::path(f.out);
  Box box = Box::around(traj.frames.front().curve.points(), 0.5);
  for (const Frame& fr : traj.frames) {
    const Box b = Box::around(fr.curve.points(), 0.5);
    box.lo = box.lo.cwiseMin(b.lo);
    box.hi = box.hi.cwiseMax(b.hi);
  }
  const std::vector<TestField> fields =
      f.fields.empty() ? standard_dictionary(box, f.seed) : fields_from_json(read_json(f.fields));

  std::vector<double> t;
  std::vector<std::vector<double>> P(3), Q(3);
  std::vector<double> mass;
  for (const Frame& fr : traj.frames) {
    t.push_back(fr.t);
    const Vec3 p = momentum(fr.curve);
    const Vec3 q = angular_momentum(fr.curve);
    for (int c = 0; c < 3; ++c) {
      P[static_cast<std::size_t>(c)].push_back(p(c));
      Q[static_cast<std::size_t>(c)].push_back(q(c));
    }
    mass.push_back(current_of(fr.curve).mass());
  }
  json report = {{"run", f.run}, {"fields", json::array()}};
  auto twin = [&](const std::string& name, const std::vector<double>& values) {
    write_columns_csv(out / (name + ".csv"), {"t", "value"}, {t, values});
  };
  const char* axes[] = {"x", "y", "z"};
  for (std::size_t c = 0; c < 3; ++c) {
    twin(std::string("momentum_") + axes[c], P[c]);
    twin(std::string("angular_momentum_") + axes[c], Q[c]);
  }
  twin("mass", mass);

  // weak-form residuals wherever the centred difference fits
  const double delta = f.delta > 0.0 ? f.delta : 4.0 * traj.frame_interval();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const TestField& field = fields[k];
    char tag[16];
    std::snprintf(tag, sizeof tag, "%02zu_", k);
    const std::string stem = tag + field.name();
    std::vector<double> pairing;
    for (const Frame& fr : traj.frames) pairing.push_back(pair(current_of(fr.curve), field));
    twin("pair_" + stem, pairing);
    std::vector<double> rt, rv;
    for (const Frame& fr : traj.frames) {
      if (fr.t - delta < traj.t_begin() - 1e-12 || fr.t + delta > traj.t_end() + 1e-12) continue;
      rt.push_back(fr.t);
      rv.push_back(weakform_residual(traj, field, fr.t, delta));
    }
    double worst = 0.0;
    for (double v : rv) worst = std::max(worst, std::abs(v));
    if (!rt.empty()) write_columns_csv(out / ("residual_" + stem + ".csv"), {"t", "value"}, {rt, rv});
    report["fields"].push_back({{"name", stem},
                                {"family", std::string(to_string(field.family()))},
                                {"sup_curl", field.sup_curl()},
                                {"max_abs_residual", worst}});
  }
  try {
    const SpeedBoundReport sb = speed_bound_check(traj);
    report["speed_bound"] = {{"mass", sb.mass},           {"momentum", sb.momentum},
                             {"bound_ratio", sb.bound_ratio}, {"max_speed", sb.max_speed},
                             {"c_hat", sb.c_hat}};
    write_columns_csv(out / "displacement.csv", {"t", "value"}, {sb.times, sb.displacement});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BoundInapplicable) throw;
    report["speed_bound"] = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }
  write_json(out / "report.json", report);
  print_json(report);
  return 0;
}

// --- stability --------------------------------------------------------------

struct StabilityFlags {
  std::string reference;
  std::string tested;
  std::string out;
  int samples = 1000;
  std::uint64_t seed = 1;
  double slack = 0.1;
};

int stability(const StabilityFlags& f) {
  const Trajectory ref_traj = load_trajectory(f.reference);
  const ReferenceFlow ref(ref_traj);
  const fs::path out = f.out.empty() ? fs::path(f.reference) / "stability" : fs::path(f.out);
  const double r = ref.tube_radius();
  const double K = K_constant(ref);

  std::mt19937_64 rng(f.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  std::vector<MarginSample> margins;
  double worst = std::numeric_limits<double>::infinity();
  const double lo = ref.t_begin() + 0.25 * (ref.t_end() - ref.t_begin());
  const double hi = ref.t_end() - 0.25 * (ref.t_end() - ref.t_begin());
  for (int k = 0; k < f.samples; ++k) {
    const double t = lo + (hi - lo) * unit(rng);
    const PeriodicInterpolant slice = ref.flow().slice_at(t);
    const auto jet = slice.jet(unit(rng) * slice.period(), 1);
    Vec3 offset(gauss(rng), gauss(rng), gauss(rng));
    offset -= offset.dot(jet[1].normalized()) * jet[1].normalized();
    const Vec3 x = jet[0] + offset.normalized() * (0.9 * r * std::cbrt(unit(rng)));
    const Vec3 xi = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    const double m = waou_terms(ref, x, xi, t, 0.0, 0.0, K).margin;
    worst = std::min(worst, m);
    margins.push_back({x, xi, m});
  }
  write_margins_csv(out / "margins.csv", margins);
  json report = {{"reference", f.reference}, {"tube_radius", r}, {"K", K}, {"samples", f.samples},
                 {"min_margin", worst}};
  if (!f.tested.empty()) {
    const FGReport fg = gronwall_check(ref, load_trajectory(f.tested), f.slack, K);
    write_fg_csv(out / "fg.csv", fg);
    report["gronwall"] = {{"passed", fg.passed()},
                          {"envelope_ok", fg.envelope_ok},
                          {"derivative_ok", fg.derivative_ok},
                          {"ordering_ok", fg.ordering_ok},
                          {"worst_envelope_ratio", fg.worst_envelope_ratio},
                          {"worst_derivative_ratio", fg.worst_derivative_ratio},
                          {"F0", fg.F.empty() ? 0.0 : fg.F.front()},
                          {"G0", fg.G.empty() ? 0.0 : fg.G.front()}};
  }
  write_json(out / "report.json", report);
  print_json(report);
  return 0;
}

// --- varifold ---------------------------------------------------------------

struct VarifoldFlags {
  double m = 2.0;
  double a = 1.0;
  int n_quad = 64;
  std::vector<double> xi0{0.0, 0.0, 1.0};
  bool moments = false;
  std::string out;
  std::string reference;
  int nodes = 1;
  std::vector<double> times{0.0};
};

int varifold(const VarifoldFlags& f) {
  const Vec3 xi0 = Vec3(f.xi0[0], f.xi0[1], f.xi0[2]).normalized();
  const SphereMeasure w = build_W(f.m, f.a, xi0, f.n_quad);
  const ModifiedSpeedParams p = alpha_beta(f.m, f.a);
  json report = {{"m", f.m},         {"a", f.a},       {"a_min", a_min(f.m)}, {"alpha", p.alpha},
                 {"beta", p.beta},   {"atoms", w.size()}, {"mass", w.mass()}, {"xi0", vec_to_json(xi0)}};
  if (f.moments) {
    const SphereMoments got = moments(w);
    const SphereMoments want = expected_moments(f.m, f.a, xi0);
    json second = json::array();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        second.push_back({{"i", i + 1}, {"j", j + 1}, {"measured", got.second(i, j)},
                          {"expected", want.second(i, j)}});
      }
    }
    report["first_moment"] = {{"measured", vec_to_json(got.first)}, {"expected", vec_to_json(want.first)},
                              {"error", (got.first - want.first).cwiseAbs().maxCoeff()}};
    report["second_moment"] = {{"entries", second},
                               {"error", (got.second - want.second).cwiseAbs().maxCoeff()}};
    report["implied_a"] = implied_a(got, xi0);
    if (!f.out.empty()) {
      std::vector<std::vector<double>> cols(4);
      for (const auto& e : second) {
        cols[0].push_back(e["i"].get<double>());
        cols[1].push_back(e["j"].get<double>());
        cols[2].push_back(e["measured"].get<double>());
        cols[3].push_back(e["expected"].get<double>());
      }
      write_columns_csv(fs::path(f.out) / "moments.csv", {"i", "j", "measured", "expected"}, cols);
    }
  }
  if (!f.reference.empty()) {
    const FlowInterpolant ref(load_trajectory(f.reference));
    std::vector<double> a_nodes{f.a}, rho{1.0};
    if (f.nodes > 1) uniform_mixture(f.m, f.nodes, a_nodes, rho);
    std::vector<VarifoldFrame> frames;
    json masses = json::array();
    for (double t : f.times) {
      frames.push_back({t, f.nodes > 1 ? mixture(ref, f.m, a_nodes, rho, t, f.n_quad)
                                       : modified_undercurrent(ref, f.m, f.a, t, f.n_quad)});
      masses.push_back({{"t", t},
                        {"mass", frames.back().sample.varifold.mass()},
                        {"undercurrent_mass", frames.back().sample.current.mass()}});
    }
    report["frames"] = masses;
    const fs::path dir = (f.out.empty() ? fs::path(f.reference) : fs::path(f.out)) / "varifold";
    write_varifold_frames(dir, {{"m", f.m}, {"a", f.a}, {"nodes", a_nodes}, {"rho", rho}, {"n_quad", f.n_quad}},
                          frames);
  }
  if (!f.out.empty()) {
    write_sphere_measure_csv(fs::path(f.out) / "sphere_measure.csv", w);
    write_json(fs::path(f.out) / "report.json", report);
  }
  print_json(report);
  return 0;
}

// --- experiments ------------------------------------------------------------

struct ExperimentFlags {
  Eigen::Index n = 0;
  double t_end = 0.0;
  std::string out;
  double m = 2.0;
  std::vector<int> turns{16, 32, 64};
  double periods = 3.0;
};

json events_json(const RecurrenceReport& rep) {
  json events = json::array();
  for (const auto& e : rep.events) {
    json verts = json::array();
    for (Eigen::Index k = 0; k < e.vertices.cols(); ++k) verts.push_back(vec_to_json(e.vertices.col(k)));
    events.push_back({{"t", e.t},
                      {"defect", e.defect},
                      {"prominence", e.prominence},
                      {"corners", e.corners},
                      {"rotation", std::isnan(e.rotation) ? json(nullptr) : json(e.rotation)},
                      {"circumradius", e.circumradius},
                      {"vertices", verts}});
  }
  return events;
}

int polygon_experiment(const std::string& which, const ExperimentFlags& f) {
  PolygonRunOptions o;
  o.samples = f.n > 0 ? f.n : 1024;
  const bool square = which == "square";
  o.t_end = f.t_end > 0.0 ? f.t_end : (square ? 0.16 : 0.7);
  o.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const PolygonRunResult res = polygon_recurrence(square ? unit_square_vertices() : half_cube_vertices(), o);
  const fs::path out = f.out.empty() ? fs::path(which) : fs::path(f.out);
  RunConfig cfg;
  cfg.generator = PolygonParams{square ? unit_square_vertices() : half_cube_vertices()};
  cfg.samples = o.samples;
  cfg.solver = res.config;
  cfg.t_end = o.t_end;
  cfg.stride = res.frames.stride;
  cfg.experiment = which;
  cfg.output_dir = out.string();
  TrajectoryWriter writer(out, cfg, ledger_of(tangents_of(res.frames.frames.front().curve)));
  for (const Frame& fr : res.frames.frames) writer.add(fr, polygonality_defect(fr.curve, o.defect));
  write_columns_csv(out / "defect.csv", {"t", "value"}, {res.report.times, res.report.defects});
  const json report = {{"experiment", which}, {"samples", o.samples}, {"dt", res.config.dt},
                       {"minima", events_json(res.report)}};
  write_json(out / "recurrence.json", report);
  std::vector<std::vector<double>> cols(5);
  for (const auto& e : res.report.events) {
    cols[0].push_back(e.t);
    cols[1].push_back(e.defect);
    cols[2].push_back(e.prominence);
    cols[3].push_back(e.corners);
    cols[4].push_back(e.rotation);
  }
  write_columns_csv(out / "recurrence.csv", {"t", "defect", "prominence", "corners", "rotation"}, cols);
  print_json(report);
  return 0;
}

int experiment(const std::string& which, const ExperimentFlags& f) {
  if (which == "square" || which == "halfcube") return polygon_experiment(which, f);
  const fs::path out = f.out.empty() ? fs::path(which) : fs::path(f.out);
  json report;
  if (which == "bullet") {
    const BulletReport r = bullet_experiment(3, f.n > 0 ? f.n : 1536, f.t_end > 0.0 ? f.t_end : 0.01);
    report = {{"experiment", which},  {"n_twist", r.n_twist},   {"samples", r.samples},
              {"t_end", r.t_end},     {"speed", r.speed},       {"expected_speed", r.expected_speed},
              {"momentum", r.momentum}, {"expected_momentum", r.expected_momentum}};
  } else if (which == "helix") {
    const HelixSpeedReport r = helix_speed_experiment(f.m, f.turns, f.periods);
    json runs = json::array();
    std::vector<std::vector<double>> cols(4);
    for (const auto& run : r.runs) {
      runs.push_back({{"turns", run.turns}, {"samples", run.samples}, {"tube_radius", run.tube_radius},
                      {"m_measured", run.m_measured}, {"horizon", run.horizon}, {"speed", run.speed}});
      cols[0].push_back(run.turns);
      cols[1].push_back(run.m_measured);
      cols[2].push_back(run.tube_radius);
      cols[3].push_back(run.speed);
    }
    write_columns_csv(out / "helix.csv", {"turns", "m", "tube_radius", "speed"}, cols);
    report = {{"experiment", which}, {"m_target", r.m_target}, {"predicted", r.predicted}, {"runs", runs}};
  } else {
    const TwoCirclesReport r = two_circles_experiment(1.0, 2.0, f.t_end > 0.0 ? f.t_end : 0.2);
    write_columns_csv(out / "separation.csv", {"t", "value"}, {r.times, r.separation});
    report = {{"experiment", which},
              {"separation_rate", r.separation_rate},
              {"expected_rate", r.expected_rate},
              {"momentum_residual", r.momentum_residual},
              {"angular_residual", r.angular_residual},
              {"mass_residual", r.mass_residual},
              {"pairing_residual", r.pairing_residual}};
  }
  write_json(out / "report.json", report);
  print_json(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binormal curvature flow laboratory"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Evolve a curve and write a trajectory directory");
  add_generator_flags(s, sim.gen);
  s->add_option("--n", sim.cfg.samples, "Samples")->check(CLI::Range(8, 1 << 24));
  s->add_option("--t-end", sim.t_end, "Final time");
  s->add_option("--dt", sim.cfg.solver.dt, "Time step (default ratio * dx^2)");
  s->add_option("--dt-ratio", sim.ratio, "Default dt as a multiple of dx^2")->check(CLI::PositiveNumber);
  s->add_option("--sigma", sim.cfg.solver.sigma, "Stability ratio")->check(CLI::PositiveNumber);
  s->add_option("--stride", sim.cfg.stride, "Steps between frames")->check(CLI::PositiveNumber);
  s->add_option("--out", sim.cfg.output_dir, "Output directory");
  s->add_option("--seed", sim.cfg.seed, "Recorded seed");
  s->add_option("--config", sim.config_file, "RunConfig JSON")->check(CLI::ExistingFile);
  s->add_option("--resume", sim.resume, "Continue an existing run directory to --t-end")
      ->check(CLI::ExistingDirectory);

  DiagnoseFlags dia;
  auto* d = app.add_subcommand("diagnose", "Momenta, pairings and weak-form residuals of a run");
  d->add_option("--run", dia.run, "Trajectory directory")->required()->check(CLI::ExistingDirectory);
  d->add_option("--fields", dia.fields, "Field dictionary JSON")->check(CLI::ExistingFile);
  d->add_option("--out", dia.out, "Output directory (default <run>/diagnostics)");
  d->add_option("--seed", dia.seed, "Seed of the default dictionary");
  d->add_option("--delta", dia.delta, "Half-width of the time difference");

  StabilityFlags st;
  auto* b = app.add_subcommand("stability", "Pointwise estimate sweep and Gronwall check");
  b->add_option("--reference", st.reference, "Smooth reference run")->required()->check(CLI::ExistingDirectory);
  b->add_option("--tested", st.tested, "Run compared against the reference")->check(CLI::ExistingDirectory);
  b->add_option("--out", st.out, "Output directory (default <reference>/stability)");
  b->add_option("--samples", st.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  b->add_option("--seed", st.seed, "Monte Carlo seed");
  b->add_option("--slack", st.slack, "Relative envelope slack")->check(CLI::NonNegativeNumber);

  VarifoldFlags vf;
  auto* v = app.add_subcommand("varifold", "Direction measure of a modified-speed flow");
  v->add_option("--m", vf.m, "Mass ratio")->required();
  v->add_option("--a", vf.a, "Speed factor")->required();
  v->add_option("--n-quad", vf.n_quad, "Circle quadrature nodes")->check(CLI::Range(16, 1 << 20));
  v->add_option("--xi0", vf.xi0, "Axis direction")->expected(3);
  v->add_flag("--moments", vf.moments, "Report first and second moments");
  v->add_option("--out", vf.out, "Output directory");
  v->add_option("--reference", vf.reference, "Reference run for undercurrent frames")
      ->check(CLI::ExistingDirectory);
  v->add_option("--nodes", vf.nodes, "Speed nodes of a uniform mixture (1: single speed --a)")
      ->check(CLI::PositiveNumber);
  v->add_option("--times", vf.times, "Times of the varifold frames");

  ExperimentFlags ex;
  std::string which;
  auto* e = app.add_subcommand("experiment", "Reproducible experiment recipes");
  e->add_option("name", which, "Experiment")
      ->required()
      ->check(CLI::IsMember({"square", "halfcube", "bullet", "helix", "two-circles"}));
  e->add_option("--n", ex.n, "Samples")->check(CLI::Range(8, 1 << 24));
  e->add_option("--t-end", ex.t_end, "Final time");
  e->add_option("--out", ex.out, "Output directory");
  e->add_option("--m", ex.m, "Helix mass ratio");
  e->add_option("--turns", ex.turns, "Helix windings per run");
  e->add_option("--periods", ex.periods, "Helix fit window in wobble periods")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*s) return simulate(sim, *s);
    if (*d) return diagnose(dia);
    if (*b) return stability(st);
    if (*v) return varifold(vf);
    if (*e) return experiment(which, ex);
  } catch (const Error& err) {
    const json j = {{"error", std::string(to_string(err.kind()))}, {"message", err.what()}, {"value", err.value()}};
    std::cerr << j.dump() << '\n';
    return 1;
  } catch (const fs::filesystem_error& err) {
    const json j = {{"error", "io"}, {"message", err.what()}, {"value", 0.0}};
    std::cerr << j.dump() << '\n';
    return 1;
  }
  return 2;
}
