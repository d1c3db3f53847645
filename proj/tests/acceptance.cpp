// One line per acceptance criterion: "criterion <k> PASS|FAIL  <summary>",
// followed by indented detail lines.
//
//   acceptance [--square-samples N] [--only k]

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "filament/experiments.hpp"
#include "filament/stability.hpp"
#include "filament/varifold.hpp"

using namespace filament;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "miss  ") + what);
  }
  void note(const std::string& what) { details.push_back("info  " + what); }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ClosedCurve perturbed_circle(double delta, Eigen::Index n) {
  return make_parametric(
      [=](double p) {
        const double th = 2.0 * pi * p;
        const double r = 1.0 + delta * std::cos(3.0 * th);
        return Vec3(r * std::cos(th), r * std::sin(th), delta * std::sin(2.0 * th));
      },
      n);
}

Trajectory fifty_frames(const ClosedCurve& c, double t_end) {
  const SolverConfig cfg = SolverConfig::for_spacing(c.spacing());
  return run(c, cfg, t_end, std::max(1L, std::lround(t_end / cfg.dt / 50.0)));
}

// --- 1 ----------------------------------------------------------------------

Outcome scheme_conservation() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ClosedCurve sq = make_polygon(unit_square_vertices(), 512);
  SolverConfig cfg = SolverConfig::for_spacing(sq.spacing(), 0.5 * 0.5);
  cfg.fp_tol = 1e-13;
  FlowState s = initial_state(sq);
  Integrator integ(cfg, sq.spacing());
  int worst_iters = 0;
  for (int j = 0; j < 1000; ++j) worst_iters = std::max(worst_iters, integ.advance(s).iterations);
  const ConservationReport r = conserved_report(s);
  const double secs = seconds_since(t0);
  o.require(r.norm_drift <= 1e-10, fmt("norm drift %.3g <= 1e-10", r.norm_drift));
  o.require(r.max_mean_drift() <= 1e-10, fmt("mean drift %.3g <= 1e-10 per component", r.max_mean_drift()));
  o.require(r.h1_drift / s.ledger.h1 <= 1e-8, fmt("relative H1 drift %.3g <= 1e-8", r.h1_drift / s.ledger.h1));
  o.require(secs <= 10.0, fmt("runtime %.2f s <= 10 s", secs));
  o.note(fmt("largest fixed-point iteration count %d", worst_iters));
  o.summary = fmt("square N=512, 1000 steps: drifts %.2g / %.2g / %.2g", r.norm_drift, r.max_mean_drift(),
                  r.h1_drift / s.ledger.h1);
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome traveling_circle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 256);
  const SolverConfig cfg = SolverConfig::for_spacing(c.spacing());
  const Trajectory traj = run(c, cfg, 0.1, 100);
  const double secs = seconds_since(t0);
  const Frame& last = traj.frames.back();
  const double disp = (last.curve.centroid() - c.centroid()).z();
  double radius_drift = 0.0, length_drift = 0.0;
  const double r0 = (c.points().colwise() - c.centroid()).colwise().norm().mean();
  for (const Frame& f : traj.frames) {
    const Eigen::RowVectorXd rad = (f.curve.points().colwise() - f.curve.centroid()).colwise().norm();
    radius_drift = std::max(radius_drift, (rad.array() - r0).abs().maxCoeff());
    length_drift = std::max(length_drift, std::abs(f.curve.polygon_length() - traj.frames.front().curve.polygon_length()));
  }
  o.require(std::abs(disp - 0.1) <= 1e-3, fmt("displacement %.6f at t = %.6f, 0.1 +- 1e-3", disp, last.t));
  o.require(radius_drift <= 1e-4, fmt("radius drift %.3g <= 1e-4", radius_drift));
  o.require(length_drift <= 1e-6, fmt("length drift %.3g <= 1e-6", length_drift));
  o.require(secs <= 30.0, fmt("runtime %.2f s <= 30 s", secs));
  o.summary = fmt("unit circle N=256 to t=0.1: displacement %.6f", disp);
  return o;
}

// --- 3 ----------------------------------------------------------------------

Outcome bullet() {
  Outcome o;
  const BulletReport b = bullet_experiment(3, 1536, 0.01);
  o.require(std::abs(b.speed - 3.0) <= 0.05 * 3.0, fmt("speed %.6f, 3 +- 5%%", b.speed));
  o.require(std::abs(b.momentum - 2.0 * pi / 3.0) <= 1e-6,
            fmt("|P| %.12f vs 2pi/3 = %.12f (+- 1e-6)", b.momentum, 2.0 * pi / 3.0));
  o.summary = fmt("n=3, N=1536, t in [0, %.3g]: speed %.4f, |P| error %.2g", b.t_end, b.speed,
                  std::abs(b.momentum - 2.0 * pi / 3.0));
  return o;
}

// --- 4 ----------------------------------------------------------------------

Outcome weak_form() {
  Outcome o;
  const TestField bump = TestField::gaussian_bump(Vec3(0.8, 0.3, 0.05), Vec3(0.2, 1.0, -0.3), 0.5);
  const Box box{Vec3::Constant(-3.0), Vec3::Constant(3.0)};
  std::vector<double> res;
  double worst_momentum = 0.0;
  for (Eigen::Index n : {64, 128, 256}) {
    const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), n);
    const SolverConfig cfg = SolverConfig::for_spacing(c.spacing());
    const double delta = 0.02 * 64.0 / static_cast<double>(n);
    const long stride = std::max(1L, std::lround(delta / 4.0 / cfg.dt));
    const Trajectory traj = run(c, cfg, 0.06, stride);
    const double t = traj.frames[traj.nearest(0.03)].t;
    const double dt = 4.0 * traj.frame_interval();
    res.push_back(std::abs(weakform_residual(traj, bump, t, dt)));
    for (int i = 0; i < 3; ++i) {
      for (double tt : {0.02, 0.03, 0.04}) {
        worst_momentum =
            std::max(worst_momentum,
                     std::abs(weakform_residual(traj, TestField::momentum(i, box), traj.frames[traj.nearest(tt)].t, dt)));
      }
    }
    o.note(fmt("N=%ld, dt=%.3g: bump residual %.4g", static_cast<long>(n), dt, res.back()));
  }
  const double order = std::log2(res[1] / res[2]);
  o.require(res[2] <= 1e-3, fmt("bump residual at N=256 %.3g <= 1e-3", res[2]));
  o.require(order >= 1.8, fmt("order %.3f (64->128: %.3f) >= 1.8", order, std::log2(res[0] / res[1])));
  o.require(worst_momentum <= 1e-6, fmt("momentum-field residuals %.3g <= 1e-6", worst_momentum));
  o.summary = fmt("translating circle: residual %.3g at N=256, order %.2f", res[2], order);
  return o;
}

// --- 5 ----------------------------------------------------------------------

Outcome varifold_moments() {
  Outcome o;
  const std::pair<double, double> cases[] = {{2.0, 1.0}, {2.0, -0.25}, {1.5, a_min(1.5)}, {3.0, 3.0}};
  double worst1 = 0.0, worst2 = 0.0, worst_mass = 0.0;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (const auto& [m, a] : cases) {
    for (const Vec3& xi0 : {Vec3(Vec3::UnitZ()), Vec3(Vec3(g(rng), g(rng), g(rng)).normalized())}) {
      const SphereMeasure W = build_W(m, a, xi0, 64);
      const SphereMoments mom = moments(W);
      const SphereMoments ref = expected_moments(m, a, xi0);
      const double e1 = (mom.first - ref.first).norm();
      const double e2 = (mom.second - ref.second).norm();
      const double em = std::abs(W.mass() - m);
      worst1 = std::max(worst1, e1);
      worst2 = std::max(worst2, e2);
      worst_mass = std::max(worst_mass, em);
    }
    o.note(fmt("(m, a) = (%g, %g)", m, a));
  }
  o.require(worst1 <= 1e-12, fmt("first moment error %.3g <= 1e-12", worst1));
  o.require(worst2 <= 1e-10, fmt("second moment error %.3g <= 1e-10", worst2));
  o.require(worst_mass <= 1e-12, fmt("mass error %.3g <= 1e-12", worst_mass));
  o.summary = fmt("four (m, a) pairs, n_quad=64: errors %.2g / %.2g / %.2g", worst1, worst2, worst_mass);
  return o;
}

// --- 6 ----------------------------------------------------------------------

Outcome stability_machinery() {
  Outcome o;
  const Trajectory ref_traj = fifty_frames(make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 256), 0.05);
  const ReferenceFlow ref(ref_traj);
  const double r = ref.tube_radius();
  o.note(fmt("reference: r = %.4f, K = %.2f", r, K_constant(ref)));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst = 1e300;
  for (int k = 0; k < 1000; ++k) {
    const double t = ref.t_begin() + (0.05 + 0.9 * u(rng)) * (ref.t_end() - ref.t_begin());
    const double th = 2.0 * pi * u(rng);
    const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Vec3 x = ref.flow().curve_at(t).centroid() + Vec3(std::cos(th), std::sin(th), 0.0) +
                   r * std::cbrt(u(rng)) * dir;
    const Vec3 xi = Vec3(g(rng), g(rng), g(rng)).normalized();
    worst = std::min(worst, waou_margin(ref, x, xi, t));
  }
  o.require(worst >= -1e-6, fmt("min margin over 1000 in-tube samples %.3g >= -1e-6", worst));

  std::vector<double> F0;
  for (double delta : {1e-3, 5e-4}) {
    const Trajectory tested = fifty_frames(perturbed_circle(delta, 256), 0.05);
    const FGReport rep = gronwall_check(ref, tested, 0.1);
    F0.push_back(rep.F.front());
    if (delta == 1e-3) {
      o.require(rep.passed(), fmt("Gronwall, delta = 1e-3, slack 0.1: envelope ratio %.4f, derivative ratio %.4f",
                                  rep.worst_envelope_ratio, rep.worst_derivative_ratio));
    }
  }
  const double scale = F0[0] / F0[1];
  o.require(scale >= 3.5 && scale <= 4.5, fmt("F(0) ratio under delta -> delta/2: %.4f in [3.5, 4.5]", scale));
  o.summary = fmt("circle reference: min margin %.2g, F(0) ratio %.3f", worst, scale);
  return o;
}

// --- 7 ----------------------------------------------------------------------

const std::vector<double> kSquareTimes = {0.05296, 0.07948, 0.10591, 0.15878};

void describe(Outcome& o, const RecurrenceReport& rep, const std::string& label) {
  std::string line = label + ":";
  for (const RecurrenceEvent& e : rep.events) {
    line += fmt(" %.4f(%d", e.t, e.corners);
    if (std::isfinite(e.rotation) && e.rotation != 0.0) line += fmt(", rot %.1f deg", e.rotation * 180.0 / pi);
    line += ")";
  }
  o.note(line);
}

Outcome square_recurrence(Eigen::Index samples) {
  Outcome o;
  auto run_square = [](Eigen::Index n, double t_end) {
    PolygonRunOptions opt;
    opt.samples = n;
    opt.t_end = t_end;
    const auto t0 = std::chrono::steady_clock::now();
    PolygonRunResult r = polygon_recurrence(unit_square_vertices(), opt);
    return std::make_pair(std::move(r), seconds_since(t0));
  };

  // scan a little past 0.16 so that a minimum sitting on the end is visible
  const double t_judge = 0.16;
  const auto [main, secs] = run_square(samples, 0.175);
  const RecurrenceReport rep = main.scanner.report(t_judge);
  describe(o, rep, fmt("N=%ld minima up to t=%.2f (%.0f s)", static_cast<long>(samples), t_judge, secs));
  const auto match = match_minima(rep, kSquareTimes, 0.10);
  for (std::size_t k = 0; k < match.size(); ++k) {
    const auto& m = match[k];
    if (m.event) {
      o.require(true, fmt("minimum %.4f near %.5f (%+.1f%%), %d corners", m.event->t, m.expected,
                          100.0 * (m.event->t / m.expected - 1.0), m.event->corners));
    } else {
      o.require(false, fmt("no minimum within 10%% of %.5f", m.expected));
    }
  }
  if (match[3].event) {
    const RecurrenceEvent& e = *match[3].event;
    o.require(e.corners == 4, fmt("fourth minimum has %d corners (4)", e.corners));
    const double deg = e.rotation * 180.0 / pi;
    o.require(std::isfinite(deg) && std::abs(deg - 45.0) <= 5.0, fmt("fourth minimum rotation %.2f deg (45 +- 5)", deg));
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (!match[k].event) continue;
    const int c = match[k].event->corners;
    o.require(c == 8 || c == 12, fmt("minimum near %.5f has %d corners (8 or 12)", match[k].expected, c));
  }

  // beyond the judged window, and against half the reference times
  describe(o, main.report, fmt("N=%ld minima up to t=0.175", static_cast<long>(samples)));
  std::vector<double> halves;
  for (double t : kSquareTimes) halves.push_back(t / 2.0);
  for (const auto& m : match_minima(main.report, halves, 0.10)) {
    if (m.event) {
      o.note(fmt("half time %.5f: minimum %.4f (%+.1f%%), %d corners, rotation %.1f deg", m.expected, m.event->t,
                 100.0 * (m.event->t / m.expected - 1.0), m.event->corners, m.event->rotation * 180.0 / pi));
    } else {
      o.note(fmt("half time %.5f: no minimum within 10%%", m.expected));
    }
  }

  if (samples != 1024) {
    const auto [fb, fsecs] = run_square(1024, t_judge);
    const auto fm = match_minima(fb.report, kSquareTimes, 0.20);
    int found = 0;
    for (const auto& m : fm) found += m.event.has_value();
    describe(o, fb.report, fmt("fallback N=1024 (%.0f s)", fsecs));
    o.note(fmt("fallback N=1024: %d of 4 reference times have a minimum within 20%% (%s)", found,
               found == 4 ? "met" : "not met"));
  }
  int hits = 0;
  for (const auto& m : match) hits += m.event.has_value();
  o.summary = fmt("square N=%ld to t=0.16: %d of 4 times matched within 10%%", static_cast<long>(samples), hits);
  return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome flat_proxy() {
  Outcome o;
  PolygonRunOptions opt;
  opt.samples = 512;
  opt.defect_interval = 1e-4;
  opt.frame_interval = 1e-4;
  const ClosedCurve sq = make_polygon(unit_square_vertices(), opt.samples);
  const SolverConfig cfg = polygon_solver_config(sq.spacing(), opt);
  const Trajectory traj = run(sq, cfg, 1e-2 + 1e-4, std::lround(1e-4 / cfg.dt));
  // twenty bumps at the corners, where the flow is least regular
  std::vector<TestField> corner_fields;
  const Vec3 dirs[] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), Vec3(1.0, 1.0, 0.0).normalized(),
                       Vec3(1.0, -1.0, 1.0).normalized()};
  for (const Vec3& corner : unit_square_vertices()) {
    for (const Vec3& d : dirs) corner_fields.push_back(TestField::gaussian_bump(corner, d, 0.25));
  }
  const auto standard = standard_dictionary(Box::around(sq.points(), 0.5), 1);

  auto sweep_of = [&](const std::vector<TestField>& fields, int& used) {
    std::vector<double> sweep;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
      double worst = 0.0;
      used = 0;
      for (const TestField& f : fields) {
        if (!(f.sup_curl() > 0.0)) continue;  // curl-free: pairs to zero, ratio undefined
        ++used;
        worst = std::max(worst, flat_pair_ratio(traj, f, 0.0, traj.at(dt).t));
      }
      sweep.push_back(worst);
    }
    return sweep;
  };
  int used = 0, used_std = 0;
  const std::vector<double> sweep = sweep_of(corner_fields, used);
  const std::vector<double> sweep_std = sweep_of(standard, used_std);
  o.note(fmt("corner bumps (%d): ratios %.4f, %.4f, %.4f at dt = 1e-2, 1e-3, 1e-4", used, sweep[0], sweep[1], sweep[2]));
  o.note(fmt("standard dictionary (%d of %zu with curl): ratios %.4f, %.4f, %.4f", used_std, standard.size(),
             sweep_std[0], sweep_std[1], sweep_std[2]));
  const double peak = *std::max_element(sweep.begin(), sweep.end());
  o.require(peak <= 2.0 * sweep[0], fmt("max over sweep %.4f <= 2 x %.4f", peak, sweep[0]));
  o.summary = fmt("square N=512, 20 corner bumps: C-hat %.4f", peak);
  return o;
}

// --- 9 ----------------------------------------------------------------------

Outcome backward_ring() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const HelixSpeedReport rep = helix_speed_experiment(2.0, {16, 32, 64});
  bool monotone = true;
  for (std::size_t k = 0; k < rep.runs.size(); ++k) {
    const HelixRun& r = rep.runs[k];
    o.note(fmt("N_h=%d: m=%.4f, tube %.5f, speed %.5f over %.4g", r.turns, r.m_measured, r.tube_radius, r.speed,
               r.horizon));
    if (k > 0 && !(r.speed < rep.runs[k - 1].speed)) monotone = false;
  }
  o.require(monotone, "speed decreases with N_h");
  o.require(rep.runs.back().speed < 0.0, fmt("speed at N_h=64 %.5f < 0", rep.runs.back().speed));
  o.note(fmt("predicted limit a_min(2) 2pi/l = %.4f; %.0f s", rep.predicted, seconds_since(t0)));
  o.summary = fmt("m=2: speeds %.4f, %.4f, %.4f", rep.runs[0].speed, rep.runs[1].speed, rep.runs[2].speed);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Eigen::Index square_samples = 5000;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--square-samples") && i + 1 < argc) {
      square_samples = std::atol(argv[++i]);
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--square-samples N] [--only k]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::function<Outcome()>> criteria = {
      scheme_conservation, traveling_circle, bullet,     weak_form,
      varifold_moments,    stability_machinery,
      [&] { return square_recurrence(square_samples); }, flat_proxy, backward_ring};

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k + 1) != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const Error& e) {
      o.pass = false;
      o.summary = std::string("error ") + std::string(to_string(e.kind())) + ": " + e.what();
    }
    std::printf("criterion %zu %s  %s  [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", o.summary.c_str(),
                seconds_since(t0));
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
