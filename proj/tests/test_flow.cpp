#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magnetolab/flow.hpp"
#include "magnetolab/systems.hpp"

using namespace magnetolab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// v' = w J v on the flat torus with constant density: closed form.
PhasePoint flat_circle(const PhasePoint& p0, double w, double t) {
  const Mat2 J = (Mat2() << 0, -1, 1, 0).finished();
  const double c = std::cos(w * t), s = std::sin(w * t);
  const Mat2 R = (Mat2() << c, -s, s, c).finished();
  PhasePoint p = p0;
  p.v = R * p0.v;
  p.q = p0.q - J * (p.v - p0.v) / w;
  return p;
}

}  // namespace

TEST(Flow, FlatTorusCircleClosedForm) {
  const double c = 2.0, s = 0.7;
  for (double o : {1.0, -1.0}) {
    auto sys = flat_torus_constant(c, s);
    sys.surface.set_orientation(o);
    const auto p0 = make_phase_point(sys.surface, 0, Vec2(0.25, 0.5), Vec2(0.6, -0.3));
    for (double t : {0.5, 3.0, 17.0}) {
      const auto got = flow_to(sys, p0, t, 1e-12);
      const auto want = flat_circle(p0, o * s * c, t);
      EXPECT_NEAR(torus_displacement(got.q, want.q).norm(), 0.0, 1e-9) << "t=" << t << " o=" << o;
      EXPECT_NEAR((got.v - want.v).norm(), 0.0, 1e-9);
    }
  }
}

TEST(Flow, ZeroTimeIsIdentity) {
  const auto sys = builtin_system("conformal-torus");
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.1, 0.2), 0.4);
  const auto tr = integrate(sys, p0, 0.0, 1e-10);
  ASSERT_EQ(tr.samples.size(), 1u);
  EXPECT_EQ(tr.samples[0].p.q, p0.q);
}

TEST(Flow, BackwardFlowReturns) {
  const auto sys = builtin_system("elliptic-bump");
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.4, 0.45), 2.0);
  const auto p1 = flow_to(sys, flow_to(sys, p0, 3.0, 1e-12), -3.0, 1e-12);
  EXPECT_NEAR(torus_displacement(p1.q, p0.q).norm(), 0.0, 1e-9);
  EXPECT_NEAR((p1.v - p0.v).norm(), 0.0, 1e-9);
}

// Constant-curvature circles on the round sphere close after 2 pi / sqrt(1 + s^2).
TEST(Flow, SphereCirclePeriod) {
  for (double s : {0.5, 1.0, 2.0}) {
    const auto sys = symmetric_sphere(s);
    const auto p0 = unit_point(sys.surface, 0, Vec2(0.3, -0.2), 0.9);
    const double T = 2 * kPi / std::sqrt(1 + s * s);
    std::array<long, 2> w{};
    EXPECT_LT(closure_residual(sys, p0, T, 1e-12, &w), 1e-9) << s;
    EXPECT_GT(closure_residual(sys, p0, 0.5 * T, 1e-12), 1e-3) << s;
  }
}

TEST(Flow, SphereCrossesCharts) {
  const auto sys = symmetric_sphere(0.2);
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.9, 0.0), 0.0);
  const auto tr = integrate(sys, p0, 6.0, 1e-10);
  bool switched = false;
  for (const auto& s : tr.samples) switched = switched || s.p.chart == 1;
  EXPECT_TRUE(switched);
  EXPECT_LT(speed_drift(tr), 1e-9);
}

TEST(Flow, SpeedConservedProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.2, 0.8), ang(0.0, 2 * kPi);
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_system(name);
    for (int i = 0; i < 3; ++i) {
      Vec2 q(u(rng), u(rng));
      if (sys.surface.kind() == SurfaceKind::halfplane) q.y() += 0.5;
      const auto tr = integrate(sys, unit_point(sys.surface, 0, q, ang(rng)), 40.0, 1e-10);
      EXPECT_LT(speed_drift(tr), 1e-9) << name;
    }
  }
}

TEST(Flow, CurvatureMatchesDensity) {
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_system(name);
    Vec2 q(0.37, 0.21);
    if (sys.surface.kind() == SurfaceKind::halfplane) q.y() += 1.0;
    const auto tr = integrate(sys, unit_point(sys.surface, 0, q, 0.3), 5.0, 1e-11);
    double worst = 0;
    for (const auto& c : geodesic_curvature(sys, tr)) worst = std::max(worst, std::abs(c.kappa - c.expected));
    EXPECT_LT(worst, 1e-6) << name;
  }
}

TEST(Flow, CurvatureScalesWithSpeed) {
  const auto sys = flat_torus_constant(1.5, 1.0);
  const auto p0 = make_phase_point(sys.surface, 0, Vec2(0.5, 0.5), Vec2(2.0, 0.0));
  const auto tr = integrate(sys, p0, 1.0, 1e-11);
  for (const auto& c : geodesic_curvature(sys, tr)) EXPECT_NEAR(c.kappa, 1.5 / 2.0, 1e-6);
}

TEST(Flow, CircleFitRecoversCircle) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(Vec2(1.5, -0.4) + 2.5 * Vec2(std::cos(0.1 * i), std::sin(0.1 * i)));
  const auto c = fit_circle(pts);
  EXPECT_NEAR(c.radius, 2.5, 1e-12);
  EXPECT_NEAR((c.center - Vec2(1.5, -0.4)).norm(), 0.0, 1e-12);
  EXPECT_LT(c.residual, 1e-12);
  // Meets the real axis at acos(0.4 / 2.5).
  EXPECT_NEAR(boundary_angle(c), std::acos(0.4 / 2.5), 1e-12);
}

TEST(Flow, CircleMissingBoundaryIsRejected) {
  CircleFit c;
  c.center = Vec2(0.0, 3.0);
  c.radius = 1.0;
  EXPECT_THROW(boundary_angle(c), ConfigError);
}

TEST(Flow, HedlundCircleAngle) {
  const auto sys = symmetric_genus(0.5);
  const auto tr = integrate(sys, unit_point(sys.surface, 0, Vec2(0.0, 1.0), 0.0), 10.0, 1e-12);
  std::vector<Vec2> pts;
  for (const auto& s : tr.samples) pts.push_back(s.p.q);
  const auto c = fit_circle(pts);
  EXPECT_LT(c.residual, 1e-7);
  EXPECT_NEAR(boundary_angle(c), std::acos(0.5), 1e-6);
}

TEST(Flow, SectionHitsLieOnSection) {
  const auto sys = symmetric_sphere(1.0);
  SectionSpec sec;
  sec.u_min = 0.05;
  sec.u_max = 0.8;
  const auto p0 = section_point(sys, sec, 0.3, 0.7);
  const auto hits = section_hits(sys, sec, p0, 3, 20.0, 1e-11);
  ASSERT_FALSE(hits.empty());
  for (const auto& h : hits) {
    EXPECT_NEAR(h.p.q.y(), 0.0, 1e-9);
    EXPECT_GT(h.t, 0.0);
  }
}

TEST(Flow, ClosedOrbitSearchOnSphere) {
  const auto sys = symmetric_sphere(1.0);
  SectionSpec sec;
  sec.u_min = 0.05;
  sec.u_max = 0.8;
  SearchGrid g;
  g.n_u = 3;
  g.n_theta = 4;
  g.t_max = 20;
  const auto rep = find_closed_orbits(sys, sec, g, 1e-10);
  ASSERT_FALSE(rep.orbits.empty());
  for (const auto& o : rep.orbits) {
    EXPECT_NEAR(o.period, 2 * kPi / std::sqrt(2.0), 1e-6);
    EXPECT_EQ(o.homotopy, "contractible");
  }
}

TEST(Flow, BadToleranceRejected) {
  const auto sys = builtin_system("flat-torus");
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.1, 0.1), 0.0);
  EXPECT_THROW(integrate(sys, p0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(integrate(sys, p0, 1.0, -1e-8), ConfigError);
}

// The ray orbit closes up to the deck scaling by e^{-ell}.
TEST(Flow, HalfplaneRayClosesUnderDeck) {
  const auto sys = symmetric_genus(0.5);
  const auto ray = halfplane_ray_orbit(sys, 1.0);
  const auto end = flow_to(sys, ray.x0, ray.period, 1e-12);
  const double k = std::exp(-1.0);
  EXPECT_NEAR((end.q - k * ray.x0.q).norm(), 0.0, 1e-9);
  EXPECT_NEAR((end.v - k * ray.x0.v).norm(), 0.0, 1e-9);
}
