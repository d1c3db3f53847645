#include "filament/experiments.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "filament/varifold.hpp"

namespace filament {

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "slope fit needs two or more paired samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "slope fit needs distinct abscissae");
  return sxy / sxx;
}

// --- polygon recurrence -----------------------------------------------------

SolverConfig polygon_solver_config(double spacing, const PolygonRunOptions& o) {
  if (!(o.defect_interval > 0.0 && o.frame_interval >= o.defect_interval)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < defect interval <= frame interval");
  }
  const double cap = o.sigma * spacing * spacing;
  SolverConfig cfg;
  cfg.sigma = o.sigma;
  cfg.fp_tol = o.fp_tol;
  cfg.dt = o.defect_interval / std::ceil(o.defect_interval / cap * (1.0 - 1e-12));
  return cfg;
}

PolygonRunResult polygon_recurrence(const std::vector<Vec3>& vertices, const PolygonRunOptions& o) {
  const ClosedCurve initial = make_polygon(vertices, o.samples);
  PolygonRunResult out{SolverConfig{}, RecurrenceScanner(o.defect, o.min_prominence), {}, {}};
  out.config = polygon_solver_config(initial.spacing(), o);
  const long defect_stride = std::lround(o.defect_interval / out.config.dt);
  const long frame_every = std::max(1L, std::lround(o.frame_interval / o.defect_interval));
  out.frames.config = out.config;
  out.frames.stride = defect_stride * frame_every;

  RecurrenceScanner& scanner = out.scanner;
  long count = 0;
  const long total = std::lround(o.t_end / o.defect_interval);
  run_streaming(initial_state(initial), out.config, o.t_end, defect_stride, [&](const Frame& f) {
    scanner.add(f.t, f.curve);
    if (f.step % out.frames.stride == 0) out.frames.frames.push_back(f);
    if (o.log && count % 100 == 0) {
      std::ostringstream line;
      line << "t = " << f.t << " (" << count << "/" << total << ")";
      o.log(line.str());
    }
    ++count;
  });
  out.report = scanner.report();
  return out;
}

std::vector<MinimumMatch> match_minima(const RecurrenceReport& report, const std::vector<double>& expected,
                                       double rel_tol) {
  std::vector<MinimumMatch> out;
  for (double t : expected) {
    MinimumMatch m{t, std::nullopt};
    for (const auto& e : report.events) {
      if (std::abs(e.t - t) > rel_tol * t) continue;
      if (!m.event || std::abs(e.t - t) < std::abs(m.event->t - t)) m.event = e;
    }
    out.push_back(std::move(m));
  }
  return out;
}

// --- bullet -----------------------------------------------------------------

namespace {

// Frames of a short run with the centroid component along `axis`.
void centroid_series(const ClosedCurve& initial, double t_end, int frames, const Vec3& axis,
                     std::vector<double>& t, std::vector<double>& z) {
  const SolverConfig cfg = SolverConfig::for_spacing(initial.spacing());
  const long steps = static_cast<long>(std::ceil(t_end / cfg.dt));
  const long stride = std::max(1L, steps / frames);
  run_streaming(initial_state(initial), cfg, t_end, stride, [&](const Frame& f) {
    t.push_back(f.t);
    z.push_back(f.curve.centroid().dot(axis));
  });
}

}  // namespace

BulletReport bullet_experiment(int n_twist, Eigen::Index samples, double t_end) {
  if (n_twist < 1) throw Error(ErrorKind::InvalidArgument, "bullet needs n >= 1", n_twist);
  BulletReport r;
  r.n_twist = n_twist;
  r.samples = samples;
  r.t_end = t_end;
  const ClosedCurve initial = make_bullet(n_twist, samples);
  r.momentum = momentum(initial).norm();
  std::vector<double> t, z;
  centroid_series(initial, t_end, 50, Vec3::UnitZ(), t, z);
  r.speed = fitted_slope(t, z);
  r.expected_speed = n_twist;
  r.expected_momentum = 2.0 * std::numbers::pi / n_twist;
  return r;
}

// --- helix ------------------------------------------------------------------

HelixSpeedReport helix_speed_experiment(double m_target, const std::vector<int>& turns, double periods,
                                        int samples_per_turn) {
  if (!(periods > 0.0)) throw Error(ErrorKind::InvalidArgument, "periods must be positive", periods);
  if (!(m_target > 1.0 && m_target <= 3.0)) {
    throw Error(ErrorKind::InvalidArgument, "helix experiment needs m in (1, 3]", m_target);
  }
  HelixSpeedReport rep;
  rep.m_target = m_target;
  const CircleParams base_params;
  const double base_length = 2.0 * std::numbers::pi * base_params.radius;
  rep.predicted = a_min(m_target) * 2.0 * std::numbers::pi / base_length;
  for (int nh : turns) {
    const Eigen::Index n = static_cast<Eigen::Index>(samples_per_turn) * nh;
    const ClosedCurve base = make_circle(base_params.radius, base_params.center, base_params.normal, n);
    const HelixWrap wrap = wrap_helix_to_ratio(base, nh, m_target, n);
    HelixRun run;
    run.turns = nh;
    run.samples = n;
    run.tube_radius = wrap.tube_radius;
    run.m_measured = wrap.length_ratio;
    const double pitch = base_params.radius / nh;
    const double kappa = wrap.tube_radius / (wrap.tube_radius * wrap.tube_radius + pitch * pitch);
    run.horizon = periods * 2.0 * std::numbers::pi / (kappa * kappa);
    std::vector<double> t, z;
    centroid_series(wrap.curve, run.horizon, 200, base_params.normal, t, z);
    run.speed = fitted_slope(t, z);
    rep.runs.push_back(run);
  }
  return rep;
}

// --- two circles ------------------------------------------------------------

TwoCirclesReport two_circles_experiment(double r1, double r2, double t_end, double spacing) {
  if (!(r1 > 0.0 && r2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
  TwoCirclesReport rep;
  rep.r1 = r1;
  rep.r2 = r2;
  rep.expected_rate = std::abs(1.0 / r1 - 1.0 / r2);
  auto samples = [&](double r) {
    return std::max<Eigen::Index>(ClosedCurve::kMinSamples,
                                  std::lround(2.0 * std::numbers::pi * r / spacing));
  };
  const ClosedCurve c1 = make_circle(r1, Vec3::Zero(), Vec3::UnitZ(), samples(r1));
  const ClosedCurve c2 = make_circle(r2, Vec3(r1 + r2, 0.0, 0.0), Vec3::UnitZ(), samples(r2));
  // one Δt for both, admissible for the finer one
  const double dx = std::min(c1.spacing(), c2.spacing());
  const SolverConfig cfg = SolverConfig::for_spacing(dx);
  const long stride = std::max(1L, static_cast<long>(std::ceil(t_end / cfg.dt)) / 50);
  const Trajectory a = run(c1, cfg, t_end, stride);
  const Trajectory b = run(c2, cfg, t_end, stride);
  for (std::size_t k = 0; k < a.frames.size() && k < b.frames.size(); ++k) {
    rep.times.push_back(a.frames[k].t);
    rep.separation.push_back(b.frames[k].curve.centroid().z() - a.frames[k].curve.centroid().z());
  }
  rep.separation_rate = std::abs(fitted_slope(rep.times, rep.separation));

  const SampledCurrent t1 = current_of(a.frames.back().curve);
  const SampledCurrent t2 = current_of(b.frames.back().curve);
  const SampledCurrent sum = disjoint_union(t1, t2);
  rep.momentum_residual = (momentum(sum) - momentum(t1) - momentum(t2)).norm();
  rep.angular_residual = (angular_momentum(sum) - angular_momentum(t1) - angular_momentum(t2)).norm();
  rep.mass_residual = std::abs(sum.mass() - t1.mass() - t2.mass());
  const TestField fields[] = {
      TestField::gaussian_bump(Vec3(r1, 0.0, 0.1), Vec3(0.3, -0.2, 1.0), 0.7),
      TestField::angular(2, Box{Vec3::Constant(-5.0), Vec3::Constant(5.0)}),
  };
  for (const auto& f : fields) {
    rep.pairing_residual = std::max(rep.pairing_residual, std::abs(pair(sum, f) - pair(t1, f) - pair(t2, f)));
  }
  return rep;
}

// --- field dictionaries ----------------------------------------------------

std::vector<TestField> standard_dictionary(const Box& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 extent = box.hi - box.lo;
  const double size = extent.minCoeff();
  auto point = [&] { return Vec3(box.lo + extent.cwiseProduct(Vec3(unit(rng), unit(rng), unit(rng)))); };
  auto direction = [&] {
    std::normal_distribution<double> g;
    return Vec3(g(rng), g(rng), g(rng)).normalized();
  };
  std::vector<TestField> out;
  for (int axis = 0; axis < 3; ++axis) out.push_back(TestField::momentum(axis, box));
  for (int axis = 0; axis < 3; ++axis) out.push_back(TestField::angular(axis, box));
  for (int k = 0; k < 8; ++k) {
    out.push_back(TestField::gaussian_bump(point(), direction(), size * (0.1 + 0.2 * unit(rng))));
  }
  for (int k = 0; k < 2; ++k) out.push_back(TestField::gradient_bump(point(), size * (0.1 + 0.2 * unit(rng))));
  for (int k = 0; k < 4; ++k) {
    const Vec3 a = point();
    const Vec3 b = point();
    out.push_back(TestField::cutoff_shifted(k % 3, a, b, size * (0.3 + 0.4 * unit(rng))));
  }
  return out;
}

}  // namespace filament
