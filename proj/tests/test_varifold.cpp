#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "filament/varifold.hpp"
#include "helpers.hpp"

using namespace filament;
using std::numbers::pi;

namespace {

const FlowInterpolant& circle_flow() {
  static const FlowInterpolant flow = [] {
    const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 128);
    const SolverConfig cfg = SolverConfig::for_spacing(c.spacing());
    return FlowInterpolant(run_span(c, cfg, -0.1, 0.1, 20));
  }();
  return flow;
}

// Σ θ ξ per current site.
Points first_moment_by_site(const VarifoldSample& v, Eigen::Index sites) {
  Points out = Points::Zero(3, sites);
  for (Eigen::Index i = 0; i < v.size(); ++i) out.col(v.site[i]) += v.weights[i] * v.directions.col(i);
  return out;
}

Points weights_of(const SampledCurrent& c) {
  Points out(3, c.atom_count());
  Eigen::Index k = 0;
  for (const auto& loop : c.loops()) {
    out.middleCols(k, loop.weights.cols()) = loop.weights;
    k += loop.weights.cols();
  }
  return out;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  const Vec3 axis = testing::random_unit(rng);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  return Eigen::AngleAxisd(u(rng), axis).toRotationMatrix();
}

}  // namespace

TEST_SUITE("varifold") {

TEST_CASE("a_min") {
  CHECK(a_min(1.0) == 1.0);
  CHECK(std::abs(a_min(std::sqrt(3.0))) <= 1e-15);
  CHECK(a_min(3.0) == -1.0);
  CHECK(a_min(1.5) == 0.25);
  CHECK(a_min(2.0) == -0.25);
  CHECK(testing::error_kind_of([] { a_min(0.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("alpha and beta") {
  for (double m : {1.5, 2.0, 3.0}) {
    const ModifiedSpeedParams top = alpha_beta(m, m);
    CHECK(top.alpha == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(top.beta == doctest::Approx((m - 1.0) / 2.0).epsilon(1e-15));
    const ModifiedSpeedParams low = alpha_beta(m, a_min(m));
    CHECK(low.alpha == doctest::Approx(1.0 / m).epsilon(1e-15));
    CHECK(std::abs(low.beta) <= 1e-15);
    for (double s : {0.1, 0.5, 0.9}) {
      const ModifiedSpeedParams p = alpha_beta(m, a_min(m) + s * (m - a_min(m)));
      CHECK(p.alpha >= 1.0 / m);
      CHECK(p.alpha <= 1.0);
      CHECK(p.beta >= 0.0);
    }
  }
  const ModifiedSpeedParams p = alpha_beta(2.0, 1.0);
  CHECK(p.alpha == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
  CHECK(p.beta == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
  CHECK(testing::error_kind_of([] { alpha_beta(2.0, -0.3); }) == ErrorKind::MomentProblemInfeasible);
  CHECK(testing::error_kind_of([] { alpha_beta(2.0, 2.1); }) == ErrorKind::MomentProblemInfeasible);
}

TEST_CASE("build_W special cases") {
  const Vec3 z = Vec3::UnitZ();
  const SphereMeasure one = build_W(1.0, 1.0, z, 64);
  REQUIRE(one.size() == 1);
  CHECK((one.directions.col(0) - z).norm() == 0.0);
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const double m = 2.0;
  const SphereMeasure top = build_W(m, m, z, 64);
  REQUIRE(top.size() == 2);
  CHECK((top.directions.col(0) - z).norm() <= 1e-15);
  CHECK(top.weights[0] == doctest::Approx(1.0 + (m - 1.0) / 2.0));
  CHECK((top.directions.col(1) + z).norm() <= 1e-15);
  CHECK(top.weights[1] == doctest::Approx((m - 1.0) / 2.0));

  const SphereMeasure low = build_W(m, a_min(m), z, 64);
  CHECK(low.size() == 64);
  for (Eigen::Index i = 0; i < low.size(); ++i) CHECK(low.directions.col(i).dot(z) == doctest::Approx(1.0 / m));

  CHECK(low.m == m);
  CHECK(low.a == a_min(m));
  CHECK(low.n_quad == 64);
  CHECK(testing::error_kind_of([] { build_W(2.0, 1.0, Vec3::UnitZ(), 8); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("moments") {
  SphereMeasure delta;
  const Vec3 xi0 = Vec3(1.0, -2.0, 0.5).normalized();
  delta.directions = xi0;
  delta.weights = Eigen::VectorXd::Ones(1);
  const SphereMoments d = moments(delta);
  CHECK((d.first - xi0).norm() <= 1e-15);
  CHECK((d.second - xi0 * xi0.transpose()).norm() <= 1e-15);

  const SphereMoments w = moments(build_W(2.0, 1.0, Vec3::UnitZ(), 1024));
  CHECK((w.first - Vec3::UnitZ()).norm() <= 1e-12);
  const Mat3 expected = Vec3::UnitZ() * Vec3::UnitZ().transpose() + Mat3::Identity() / 3.0;
  CHECK((w.second - expected).norm() <= 1e-10);
}

TEST_CASE("moment identities over random parameters") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double m = 1.0 + 2.0 * u(rng);
    const double a = a_min(m) + u(rng) * (m - a_min(m));
    const Vec3 xi0 = testing::random_unit(rng);
    const int n_quad = 64 + static_cast<int>(200 * u(rng));
    const SphereMeasure W = build_W(m, a, xi0, n_quad);
    CHECK(std::abs(W.mass() - m) <= 1e-12);
    for (Eigen::Index i = 0; i < W.size(); ++i) {
      CHECK(std::abs(W.directions.col(i).norm() - 1.0) <= 1e-14);
      CHECK(W.weights[i] >= 0.0);
    }
    const SphereMoments mom = moments(W);
    const SphereMoments ref = expected_moments(m, a, xi0);
    CHECK((mom.first - ref.first).norm() <= 1e-12);
    CHECK((mom.second - ref.second).norm() <= 1e-10);
    CHECK(mom.second.trace() == doctest::Approx(m).epsilon(1e-12));
    CHECK(implied_a(mom, xi0) == doctest::Approx(a).epsilon(1e-9));

    // rotation equivariance
    const Mat3 R = random_rotation(rng);
    const SphereMoments rot = moments(build_W(m, a, R * xi0, n_quad));
    CHECK((rot.first - R * mom.first).norm() <= 1e-12);
    CHECK((rot.second - R * mom.second * R.transpose()).norm() <= 1e-10);
  }
}

TEST_CASE("no measure beats the slowest speed") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const int atoms = 2 + static_cast<int>(20 * u(rng));
    SphereMeasure w;
    w.directions.resize(3, atoms);
    w.weights.resize(atoms);
    // bias towards one hemisphere so the first moment does not vanish
    const Vec3 pole = testing::random_unit(rng);
    for (int i = 0; i < atoms; ++i) {
      w.directions.col(i) = (testing::random_unit(rng) + 0.8 * pole).normalized();
      w.weights[i] = u(rng);
    }
    const SphereMoments raw = moments(w);
    w.weights /= raw.first.norm();  // first moment is now a unit vector
    const SphereMoments mom = moments(w);
    const Vec3 xi0 = mom.first;
    const double m = mom.second.trace();
    CHECK(m >= 1.0 - 1e-12);
    CHECK(implied_a(mom, xi0) >= a_min(m) - 1e-12);
  }
}

TEST_CASE("modified undercurrent") {
  const FlowInterpolant& flow = circle_flow();
  const double t = 0.08;
  const ModifiedFlowSample same = modified_undercurrent(flow, 1.0, 1.0, t);
  const SampledCurrent direct = current_of(flow.curve_at(t));
  CHECK((weights_of(same.current) - weights_of(direct)).norm() == 0.0);

  // m = 2, a = a_min = -1/4: the reference at time -t/4, moving backwards
  const ModifiedFlowSample back = modified_undercurrent(flow, 2.0, -0.25, t);
  CHECK(back.reference_time == doctest::Approx(-t / 4.0));
  const ClosedCurve c = flow.curve_at(back.reference_time);
  CHECK(c.centroid().z() == doctest::Approx(-t / 4.0).epsilon(1e-3));

  for (double a : {-0.25, 0.5, 1.2}) {
    const ModifiedFlowSample s = modified_undercurrent(flow, 2.0, a, t);
    const Points w = weights_of(s.current);
    const Points first = first_moment_by_site(s.varifold, w.cols());
    CHECK((first - w).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(s.varifold.mass() == doctest::Approx(2.0 * s.current.mass()).epsilon(1e-12));
  }
  CHECK(testing::error_kind_of([&] { modified_undercurrent(flow, 2.0, 1.9, t); }) == ErrorKind::OutOfRange);
}

TEST_CASE("mixtures") {
  const FlowInterpolant& flow = circle_flow();
  const double m = 2.0;
  // one node reduces to the single modified flow
  const ModifiedFlowSample one = mixture(flow, m, {0.5}, {1.0}, 0.05);
  const ModifiedFlowSample single = modified_undercurrent(flow, m, 0.5, 0.05);
  CHECK((weights_of(one.current) - weights_of(single.current)).norm() == 0.0);
  CHECK((one.varifold.weights - single.varifold.weights).norm() == 0.0);

  std::vector<double> nodes, rho;
  uniform_mixture(m, 9, nodes, rho);
  CHECK(nodes.front() > a_min(m));
  CHECK(nodes.back() < m);

  const ModifiedFlowSample at0 = mixture(flow, m, nodes, rho, 0.0);
  const Vec3 total = at0.varifold.first_moment_total();
  const SampledCurrent ref0 = current_of(flow.curve_at(0.0));
  CHECK(std::abs(at0.current.mass() - ref0.mass()) <= 1e-8);
  CHECK(total.norm() <= 1e-8);
  for (int i = 0; i < 3; ++i) {
    const TestField X = TestField::momentum(i, Box{});
    CHECK(std::abs(pair(at0.current, X) - pair(ref0, X)) <= 1e-8);
  }

  const ModifiedFlowSample later = mixture(flow, m, nodes, rho, 0.04);
  const double ell = ref0.mass();
  CHECK(later.varifold.mass() == doctest::Approx(m * ell).epsilon(1e-12));
  CHECK(later.current.mass() < m * ell);
  CHECK(testing::error_kind_of([&] { mixture(flow, m, {0.5, 1.0}, {0.5, 0.6}, 0.01); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("time-reparametrized family") {
  StepSpeed speed{{0.0, 0.05}, {1.0, 0.5}};
  CHECK(speed.at(0.02) == 1.0);
  CHECK(speed.at(0.1) == 0.5);
  CHECK(speed.integral(0.1) == doctest::Approx(0.05 + 0.025));
  const FlowInterpolant& flow = circle_flow();
  // t(τ) = ∫a / a(τ) = 0.15, so the undercurrent is the reference at a t = 0.075
  const ModifiedFlowSample s = reparametrized(flow, 2.0, speed, 0.1);
  CHECK(s.reference_time == doctest::Approx(0.075).epsilon(1e-12));
  const StepSpeed constant{{0.0}, {0.5}};
  const ModifiedFlowSample c = reparametrized(flow, 2.0, constant, 0.08);
  const ModifiedFlowSample d = modified_undercurrent(flow, 2.0, 0.5, 0.08);
  CHECK(c.reference_time == doctest::Approx(d.reference_time));
  CHECK(testing::error_kind_of([&] { reparametrized(flow, 2.0, StepSpeed{{0.0, 0.1}, {1.0, -0.2}}, 0.05); }) ==
        ErrorKind::InvalidArgument);
}

}  // TEST_SUITE
