#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "filament/curve.hpp"
#include "filament/diagnostics.hpp"
#include "helpers.hpp"

using namespace filament;
using std::numbers::pi;

namespace {

// Count maximal cyclic runs of v above the threshold.
int count_runs(const Eigen::VectorXd& v, double threshold) {
  const Eigen::Index n = v.size();
  int runs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (v[i] > threshold && !(v[wrap(i - 1, n)] > threshold)) ++runs;
  }
  return runs;
}

double median(Eigen::VectorXd v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("curve") {

TEST_CASE("circle generator") {
  CHECK(testing::error_kind_of([] { make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 4); }) ==
        ErrorKind::InvalidArgument);
  const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 256);
  CHECK(c.size() == 256);
  CHECK(c.length() == doctest::Approx(2.0 * pi).epsilon(1e-15));
  for (Eigen::Index n = 0; n < c.size(); ++n) CHECK(c.point(n).norm() == doctest::Approx(1.0).epsilon(1e-14));
  // right-handed about the normal
  CHECK(c.point(0).cross(c.point(1)).z() > 0.0);

  const double eps = 0.01;
  const ClosedCurve small = make_circle(eps, Vec3::Zero(), Vec3::UnitZ(), 256);
  CHECK(current_of(small).mass() == doctest::Approx(2.0 * pi * eps).epsilon(1e-3));
}

TEST_CASE("circle tangents are within dx of the analytic tangent") {
  const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 256);
  const TangentField u = tangents_of(c);
  CHECK(u.basepoint().isApprox(c.point(0)));
  double worst = 0.0;
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    const double s = (n + 0.5) * c.spacing();
    const Vec3 exact(-std::sin(s), std::cos(s), 0.0);
    worst = std::max(worst, std::acos(std::clamp(u.unit(n).dot(exact), -1.0, 1.0)));
  }
  CHECK(worst <= c.spacing());
}

TEST_CASE("tangents of a polygon sampled at its own vertices are constant per side") {
  Points p(3, 16);
  const Vec3 corners[] = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  for (int side = 0; side < 4; ++side) {
    for (int k = 0; k < 4; ++k) {
      p.col(4 * side + k) = corners[side] + (corners[(side + 1) % 4] - corners[side]) * (k / 4.0);
    }
  }
  const TangentField u = tangents_of(ClosedCurve(p, 4.0));
  for (int side = 0; side < 4; ++side) {
    const Vec3 dir = (corners[(side + 1) % 4] - corners[side]);
    for (int k = 0; k < 4; ++k) CHECK((u.unit(4 * side + k) - dir).norm() < 1e-14);
  }
}

TEST_CASE("closure projection of the square") {
  const ClosedCurve sq = make_polygon(unit_square_vertices(), 64);
  const TangentField u = tangents_of(sq);
  CHECK(u.closure_gap().norm() <= 1e-12);
  CHECK(u.unit_defect() <= 1e-14);
}

TEST_CASE("reconstruct rejects an open tangent field") {
  const TangentField u(Points(Vec3::UnitX().replicate(1, 64)), 0.1, Vec3::Zero());
  try {
    reconstruct(u);
    FAIL("expected closure gap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ClosureGap);
    CHECK(e.value() == doctest::Approx(6.4));
  }
}

TEST_CASE("round trips") {
  const ClosedCurve c = make_circle(1.0, Vec3(0.3, -1.0, 2.0), Vec3(0, 1, 0), 256);
  const ClosedCurve back = reconstruct(tangents_of(c));
  CHECK(hausdorff_distance(c, back) <= 2.0 * c.spacing());

  const ClosedCurve sq = make_polygon(unit_square_vertices(), 400);
  const ClosedCurve sq_back = reconstruct(tangents_of(sq));
  for (const Vec3& v : unit_square_vertices()) {
    double nearest = 1e9;
    for (Eigen::Index n = 0; n < sq_back.size(); ++n) nearest = std::min(nearest, (sq_back.point(n) - v).norm());
    CHECK(nearest <= 2.0 * sq.spacing());
  }

  // tangents ∘ reconstruct ∘ tangents is the identity
  for (const ClosedCurve& curve : {c, sq, make_bullet(2, 256)}) {
    const TangentField u = tangents_of(curve);
    const TangentField v = tangents_of(reconstruct(u));
    CHECK((u.units() - v.units()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polygon generator") {
  const ClosedCurve sq = make_polygon(unit_square_vertices(), 5000);
  CHECK(sq.length() == doctest::Approx(4.0));
  CHECK(sq.spacing() == doctest::Approx(8e-4).epsilon(1e-14));

  const std::vector<Vec3> tri = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2.0, 0)};
  const ClosedCurve t = make_polygon(tri, 300);
  CHECK(t.length() == doctest::Approx(3.0));
  const Eigen::VectorXd kt = discrete_curvature(tangents_of(t));
  CHECK(count_runs(kt, 1.0) == 3);

  const ClosedCurve hc = make_polygon(half_cube_vertices(), 600);
  CHECK(hc.length() == doctest::Approx(6.0));
  const Eigen::VectorXd kh = discrete_curvature(tangents_of(hc));
  CHECK(count_runs(kh, std::max(5.0 * median(kh), kh.mean())) == 6);

  // exact per-sample chords sum to zero
  for (const ClosedCurve& p : {sq, t, hc}) {
    Vec3 sum = Vec3::Zero();
    for (Eigen::Index n = 0; n < p.size(); ++n) sum += p.point(n + 1) - p.point(n);
    CHECK(sum.norm() <= 1e-12 * p.length());
  }

  CHECK(testing::error_kind_of([] { make_polygon({Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)}, 64); }) ==
        ErrorKind::InvalidArgument);
  CHECK(testing::error_kind_of([] { make_polygon(unit_square_vertices(), 15); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("half-cube is the six-edge Petrie cycle") {
  const std::vector<Vec3> v = half_cube_vertices();
  REQUIRE(v.size() == 6);
  const Vec3 expected[] = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(1, 1, 1), Vec3(0, 1, 1), Vec3(0, 0, 1)};
  for (int i = 0; i < 6; ++i) CHECK((v[i] - expected[i]).norm() == 0.0);
}

TEST_CASE("bullet generator") {
  const ClosedCurve b1 = make_bullet(1, 256);
  for (Eigen::Index n = 0; n < b1.size(); ++n) CHECK(b1.point(n).norm() == doctest::Approx(1.0));
  CHECK(current_of(b1).mass() == doctest::Approx(2.0 * pi).epsilon(1e-3));
  for (int n : {2, 3, 5}) {
    const ClosedCurve b = make_bullet(n, 64 * n * 4);
    CHECK(b.length() == doctest::Approx(2.0 * pi));
    CHECK(current_of(b).mass() == doctest::Approx(2.0 * pi).epsilon(1e-3));
    CHECK(momentum(b).norm() == doctest::Approx(2.0 * pi / n).epsilon(1e-10));
  }
  CHECK(testing::error_kind_of([] { make_bullet(3, 100); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("helix wrap") {
  const ClosedCurve base = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 2048);
  const HelixWrap flat = wrap_helix(base, 16, 0.0, 1024);
  CHECK(flat.length_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hausdorff_distance(flat.curve, resample(base, 1024)) <= 1e-9);

  // m = 1.5 at 64 turns; independent check of the ratio from the curve itself
  const HelixWrap w = wrap_helix_to_ratio(base, 64, 1.5, 64 * 32);
  CHECK(w.length_ratio == doctest::Approx(1.5).epsilon(0.01));
  CHECK(w.curve.polygon_length() / (2.0 * pi) == doctest::Approx(1.5).epsilon(0.01));
  CHECK(w.curve.length() / base.length() == doctest::Approx(w.length_ratio).epsilon(1e-12));

  // Hausdorff distance to the base shrinks linearly with the tube radius
  const ClosedCurve ref = resample(base, 2048);
  double prev = 0.0;
  for (double rho : {0.04, 0.02, 0.01}) {
    const double d = hausdorff_distance(wrap_helix(base, 16, rho, 2048).curve, ref);
    CHECK(d == doctest::Approx(rho).epsilon(0.05));
    if (prev > 0.0) CHECK(prev / d == doctest::Approx(2.0).epsilon(0.1));
    prev = d;
  }

  CHECK(testing::error_kind_of([&] { wrap_helix(base, 16, 0.5, 1024); }) == ErrorKind::TubeSelfIntersection);
  CHECK(testing::error_kind_of([&] { wrap_helix(base, 4, 0.01, 1024); }) == ErrorKind::InvalidArgument);
  CHECK(testing::error_kind_of([&] { wrap_helix(base, 16, 0.01, 256); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("discrete curvature") {
  const double rc = 2.0;
  double prev_err = 0.0;
  for (Eigen::Index n : {64, 128, 256, 512}) {
    const Eigen::VectorXd k = discrete_curvature(tangents_of(make_circle(rc, Vec3::Zero(), Vec3::UnitZ(), n)));
    CHECK(k.minCoeff() >= 0.0);
    const double err = (k.array() - 1.0 / rc).abs().maxCoeff();
    if (prev_err > 0.0) CHECK(std::log2(prev_err / err) >= 1.9);
    prev_err = err;
  }
  // interior of a straight side
  const ClosedCurve sq = make_polygon(unit_square_vertices(), 400);
  const Eigen::VectorXd k = discrete_curvature(tangents_of(sq));
  CHECK(k[50] < 1e-10);
  CHECK(k[250] < 1e-10);
}

TEST_CASE("resample keeps the length") {
  const ClosedCurve c = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 256);
  const ClosedCurve r = resample(c, 512);
  CHECK(r.size() == 512);
  CHECK(std::abs(r.length() - c.length()) / c.length() <= 1e-6);
  CHECK(std::abs(r.length() - 2.0 * pi) / (2.0 * pi) <= 1e-6);
}

TEST_CASE("generator records") {
  HelixWrapParams h;
  h.turns = 8;
  h.tube_radius = 0.02;
  const CurveFamily families[] = {CircleParams{2.0, Vec3::Zero(), Vec3::UnitX()},
                                  PolygonParams{unit_square_vertices()}, BulletParams{2}, h};
  const double lengths[] = {4.0 * pi, 4.0, 2.0 * pi, 0.0};
  for (int i = 0; i < 4; ++i) {
    const ClosedCurve c = generate(families[i], 512);
    CHECK(c.size() == 512);
    if (lengths[i] > 0.0) CHECK(c.length() == doctest::Approx(lengths[i]));
  }
}

TEST_CASE("curves reject duplicate samples") {
  Points p = make_circle(1.0, Vec3::Zero(), Vec3::UnitZ(), 16).points();
  p.col(3) = p.col(2);
  CHECK(testing::error_kind_of([&] { ClosedCurve(p, 2.0 * pi); }) == ErrorKind::DegenerateSampling);
}

}  // TEST_SUITE
