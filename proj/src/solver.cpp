#include "filament/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace filament {

void SolverConfig::validate(double spacing) const {
  if (dt == 0.0 || !std::isfinite(dt)) {
    throw Error(ErrorKind::InvalidArgument, "time step must be finite and non-zero");
  }
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  if (!(fp_tol >= 1e-15)) throw Error(ErrorKind::InvalidArgument, "fp_tol must be >= 1e-15");
  if (fp_max_iters < 1) throw Error(ErrorKind::InvalidArgument, "fp_max_iters must be >= 1");
  const double limit = sigma * spacing * spacing;
  if (std::abs(dt) > limit) {
    std::ostringstream msg;
    msg << "time step " << dt << " exceeds sigma * dx^2 = " << limit;
    throw Error(ErrorKind::CflViolation, msg.str(), std::abs(dt) / (spacing * spacing));
  }
}

SolverConfig SolverConfig::for_spacing(double spacing, double ratio) {
  SolverConfig config;
  config.dt = ratio * spacing * spacing;
  return config;
}

int solver_threads() {
  static const int threads = [] {
    int cap = 1;
#ifdef _OPENMP
    cap = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("FILAMENT_LAB_THREADS")) {
      const int requested = std::atoi(env);
      if (requested > 0) cap = std::min(cap, requested);
    }
    return std::max(cap, 1);
  }();
  return threads;
}

double h1_seminorm(const TangentField& u) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < u.size(); ++n) total += (u.unit(n) - u.unit(n + 1)).squaredNorm();
  return total;
}

ConservationLedger ledger_of(const TangentField& u) {
  return ConservationLedger{u.units().rowwise().sum(), h1_seminorm(u)};
}

FlowState initial_state(const ClosedCurve& curve) {
  TangentField u = tangents_of(curve);
  const ConservationLedger ledger = ledger_of(u);
  return FlowState{std::move(u), 0.0, curve.centroid(), 0, ledger};
}

ConservationReport conserved_report(const FlowState& state) {
  ConservationReport report;
  report.norm_drift = state.u.unit_defect();
  report.mean_drift = (Vec3(state.u.units().rowwise().sum()) - state.ledger.mean).cwiseAbs();
  report.h1_drift = std::abs(h1_seminorm(state.u) - state.ledger.h1);
  return report;
}

Vec3 centroid_velocity(const TangentField& u) {
  Vec3 acc = Vec3::Zero();
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    acc += u.unit(n).cross(u.unit(n + 1) - u.unit(n - 1));
  }
  return acc / (2.0 * u.spacing() * static_cast<double>(u.size()));
}

ClosedCurve curve_of(const FlowState& state) {
  const ClosedCurve shape = reconstruct(state.u);
  return shape.translated(state.centroid - shape.centroid());
}

// --- integrator -----------------------------------------------------------

namespace {

/// One Jacobi update of node i from the previous iterate v. With
/// a = (Δt/2) W, W the averaged neighbour term, the node equation
/// u' + a × u' = u + u × a is solved exactly (a Cayley rotation of u_j), so
/// only the neighbour coupling is left to the fixed point. Returns the
/// sup-norm change at the node.
inline double sweep_node(const double* uj, const double* a, const double* v, double* out,
                         Eigen::Index i, Eigen::Index im, Eigen::Index ip, double h,
                         double inv) {
  const double ax = h * (a[3 * i] + (v[3 * im] + v[3 * ip]) * inv);
  const double ay = h * (a[3 * i + 1] + (v[3 * im + 1] + v[3 * ip + 1]) * inv);
  const double az = h * (a[3 * i + 2] + (v[3 * im + 2] + v[3 * ip + 2]) * inv);
  const double ux = uj[3 * i];
  const double uy = uj[3 * i + 1];
  const double uz = uj[3 * i + 2];
  const double rx = ux + (uy * az - uz * ay);
  const double ry = uy + (uz * ax - ux * az);
  const double rz = uz + (ux * ay - uy * ax);
  const double ar = ax * rx + ay * ry + az * rz;
  const double scale = 1.0 / (1.0 + ax * ax + ay * ay + az * az);
  const double nx = scale * (rx - (ay * rz - az * ry) + ar * ax);
  const double ny = scale * (ry - (az * rx - ax * rz) + ar * ay);
  const double nz = scale * (rz - (ax * ry - ay * rx) + ar * az);
  const double dx = std::abs(nx - v[3 * i]);
  const double dy = std::abs(ny - v[3 * i + 1]);
  const double dz = std::abs(nz - v[3 * i + 2]);
  out[3 * i] = nx;
  out[3 * i + 1] = ny;
  out[3 * i + 2] = nz;
  const double dxy = dx > dy ? dx : dy;
  return dxy > dz ? dxy : dz;
}

}  // namespace


Integrator::Integrator(SolverConfig config, double spacing)
    : config_(config), spacing_(spacing) {
  config_.validate(spacing_);
}

StepStats Integrator::advance(FlowState& state) {
  if (std::abs(state.u.spacing() - spacing_) > 1e-14 * spacing_) {
    throw Error(ErrorKind::InvalidArgument, "state spacing differs from integrator spacing");
  }
  const Eigen::Index n = state.u.size();
  const Points& u = state.u.units();
  const double dt = config_.dt;
  const double inv = 1.0 / (2.0 * spacing_ * spacing_);
  const double h = 0.5 * dt;

  frozen_.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    frozen_.col(i) = (u.col(wrap(i - 1, n)) + u.col(wrap(i + 1, n))) * inv;
  }
  iterate_ = u;

  const Vec3 velocity_before = centroid_velocity(state.u);
  const int threads = solver_threads();

  StepStats stats;
  for (int it = 1; it <= config_.fp_max_iters; ++it) {
    // red-black sweep in place: each colour only reads the other one
    double* v = iterate_.data();
    const double* uj = u.data();
    const double* a = frozen_.data();
    double residual = 0.0;
    for (Eigen::Index colour = 0; colour < 2; ++colour) {
      if (colour == 0) residual = std::max(residual, sweep_node(uj, a, v, v, 0, n - 1, 1, h, inv));
      const Eigen::Index first = colour == 0 ? 2 : 1;
      const Eigen::Index half = (n - 1 - first + 1) / 2;  // interior nodes of this colour
      if (threads > 1 && n >= 2048) {
#pragma omp parallel for num_threads(threads) reduction(max : residual)
        for (Eigen::Index k = 0; k < half; ++k) {
          const Eigen::Index i = first + 2 * k;
          const double d = sweep_node(uj, a, v, v, i, i - 1, i + 1, h, inv);
          residual = residual > d ? residual : d;
        }
      } else {
        for (Eigen::Index k = 0; k < half; ++k) {
          const Eigen::Index i = first + 2 * k;
          const double d = sweep_node(uj, a, v, v, i, i - 1, i + 1, h, inv);
          residual = residual > d ? residual : d;
        }
      }
      if ((n - 1) % 2 == colour) residual = std::max(residual, sweep_node(uj, a, v, v, n - 1, n - 2, 0, h, inv));
    }
    stats.iterations = it;
    stats.residual = residual;
    if (!std::isfinite(residual)) break;
    if (residual <= config_.fp_tol) {
      if (!iterate_.allFinite()) break;
      state.u.units() = iterate_;
      if (config_.renormalize) state.u.units().colwise().normalize();
      const Vec3 velocity_after = centroid_velocity(state.u);
      state.centroid += 0.5 * dt * (velocity_before + velocity_after);
      state.step_count += 1;
      state.t = static_cast<double>(state.step_count) * dt;
      return stats;
    }
  }
  std::ostringstream msg;
  msg << "fixed point did not converge in " << config_.fp_max_iters
      << " iterations (last residual " << stats.residual << ")";
  throw Error(ErrorKind::FixedPointDivergence, msg.str(), stats.residual);
}

FlowState step(const FlowState& state, const SolverConfig& config) {
  FlowState next = state;
  Integrator(config, state.u.spacing()).advance(next);
  return next;
}

// --- trajectories ---------------------------------------------------------

const Frame& Trajectory::at(double t) const {
  const Frame& f = frames.at(nearest(t));
  if (std::abs(f.t - t) > 0.5 * std::abs(config.dt) + 1e-12 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "no frame at t = " << t << " (nearest " << f.t << ")";
    throw Error(ErrorKind::OutOfRange, msg.str(), t);
  }
  return f;
}

std::size_t Trajectory::nearest(double t) const {
  if (frames.empty()) throw Error(ErrorKind::OutOfRange, "empty trajectory");
  auto it = std::lower_bound(frames.begin(), frames.end(), t,
                             [](const Frame& f, double value) { return f.t < value; });
  if (it == frames.end()) return frames.size() - 1;
  if (it == frames.begin()) return 0;
  const auto before = std::prev(it);
  return (t - before->t) <= (it->t - t) ? static_cast<std::size_t>(before - frames.begin())
                                        : static_cast<std::size_t>(it - frames.begin());
}

namespace {

Frame make_frame(const FlowState& state, int iterations) {
  return Frame{state.t, state.step_count, curve_of(state), conserved_report(state), iterations};
}

}  // namespace

FlowState run_streaming(FlowState state, const SolverConfig& config, double t_end,
                        long stride, const FrameSink& sink) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "output stride must be >= 1");
  Integrator integrator(config, state.u.spacing());
  const double span = t_end - state.t;
  if (!(span / config.dt > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "t_end must lie ahead of the current time");
  }
  const auto steps = static_cast<long>(std::ceil(span / config.dt - 1e-9));
  const long last = state.step_count + steps;
  int worst = 0;
  if (state.step_count % stride == 0) sink(make_frame(state, 0));
  while (state.step_count < last) {
    worst = std::max(worst, integrator.advance(state).iterations);
    if (state.step_count % stride == 0 || state.step_count == last) {
      sink(make_frame(state, worst));
      worst = 0;
    }
  }
  return state;
}

Trajectory run(const ClosedCurve& initial, const SolverConfig& config, double t_end,
               long stride) {
  if (!(t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must be positive");
  if (!(config.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "run needs a positive dt");
  Trajectory traj{config, stride, {}};
  run_streaming(initial_state(initial), config, t_end, stride,
                [&traj](const Frame& f) { traj.frames.push_back(f); });
  return traj;
}

Trajectory run_span(const ClosedCurve& initial, const SolverConfig& config,
                    double t_begin, double t_end, long stride) {
  if (!(t_begin <= 0.0 && t_end >= 0.0 && t_end > t_begin)) {
    throw Error(ErrorKind::InvalidArgument, "run_span needs t_begin <= 0 <= t_end");
  }
  Trajectory traj{config, stride, {}};
  const FlowState start = initial_state(initial);
  if (t_begin < 0.0) {
    SolverConfig backward = config;
    backward.dt = -std::abs(config.dt);
    std::vector<Frame> past;
    run_streaming(start, backward, t_begin, stride,
                  [&past](const Frame& f) { past.push_back(f); });
    for (auto it = past.rbegin(); it != past.rend(); ++it) {
      if (it->step != 0) traj.frames.push_back(*it);
    }
  }
  if (t_end > 0.0) {
    run_streaming(start, config, t_end, stride,
                  [&traj](const Frame& f) { traj.frames.push_back(f); });
  } else {
    traj.frames.push_back(make_frame(start, 0));
  }
  return traj;
}

}  // namespace filament
