#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magnetolab/mapverify.hpp"

using namespace magnetolab;

TEST(MapCoefficients, ClosedForm) {
  for (double s : {0.1, 1.0, 10.0}) {
    for (double rho : {0.0, 0.3, 1.0, 7.0}) {
      const auto c = coefficients(s, rho);
      EXPECT_NEAR(c.c, std::sqrt(rho * rho + s * s), 1e-15);
      EXPECT_NEAR(c.a, std::sqrt(2.0 / (c.c + s)), 1e-14);
      EXPECT_LT(closed_form_residual(s, rho), 1e-12);
    }
    EXPECT_NEAR(coefficients(s, 0.0).a, 1.0 / std::sqrt(s), 1e-14);
    EXPECT_NEAR(coefficients(s, 0.0).b, -1.0 / s, 1e-14);
  }
}

TEST(MapCoefficients, RejectNonPositiveSpeed) {
  EXPECT_THROW(coefficients(0.0, 1.0), ConfigError);
  EXPECT_THROW(coefficients(-1.0, 1.0), ConfigError);
}

TEST(MapCoefficients, BContinuousAtZeroFibre) {
  for (double s : {0.1, 1.0, 10.0}) EXPECT_NEAR(coefficients(s, 1e-7).b, coefficients(s, 0.0).b, 1e-6);
}

TEST(MapVerify, GeodesicRotationIsAGroup) {
  const auto m = round_sphere();
  std::mt19937_64 rng(2);
  const auto p = random_sphere_point(rng, 0.5, 2.0, m);
  const auto a = geodesic_rotation(m, geodesic_rotation(m, p, 0.4), 0.3);
  const auto b = to_chart(m, geodesic_rotation(m, p, 0.7), a.chart);
  EXPECT_NEAR((a.q - b.q).norm(), 0.0, 1e-10);
  EXPECT_NEAR((a.v - b.v).norm(), 0.0, 1e-10);
}

TEST(MapVerify, InverseRoundTrip) {
  std::mt19937_64 rng(9);
  for (double s : {0.1, 1.0, 10.0}) {
    for (int i = 0; i < 5; ++i) {
      const auto p = random_sphere_point(rng, 0.1, 5.0);
      const auto y = apply_Fs(s, p);
      const auto inv = invert_Fs(s, y);
      EXPECT_LT(inv.residual, 1e-12);
      const auto back = to_chart(round_sphere(), inv.x, p.chart);
      EXPECT_NEAR((back.q - p.q).norm() + (back.v - p.v).norm(), 0.0, 1e-9) << s;
    }
  }
}

TEST(MapVerify, PullbackBothOrientations) {
  for (double o : {1.0, -1.0}) {
    MapOptions opt;
    opt.orientation = o;
    std::mt19937_64 rng(21);
    for (int i = 0; i < 4; ++i) {
      const auto p = random_sphere_point(rng, 0.1, 5.0, round_sphere(o));
      EXPECT_LT(pullback_residual(1.0, p, opt), 1e-8) << o;
      EXPECT_LT(phi_pullback_residual(0.6, p, opt), 1e-7) << o;
    }
  }
}

TEST(MapVerify, FiniteDifferencesConvergeQuadratically) {
  std::mt19937_64 rng(4);
  const auto p = random_sphere_point(rng, 1.0, 1.0);
  const auto c = pullback_convergence(1.0, p);
  ASSERT_EQ(c.residuals.size(), 4u);
  for (std::size_t i = 1; i < c.residuals.size(); ++i) EXPECT_LT(c.residuals[i], c.residuals[i - 1]);
  EXPECT_GT(c.order, 1.9);
}

TEST(MapVerify, RadialFlowChecks) {
  std::mt19937_64 rng(6);
  const auto p = random_sphere_point(rng, 1.0, 1.0);
  EXPECT_LT(liouville_radial_check(1.0, p, 0.5), 1e-10);
  EXPECT_LT(radial_drift(1.0, p, 5.0), 1e-10);
}

TEST(MapVerify, AppendixReportDeterministic) {
  const auto a = verify_appendix(1.0, 12, 42);
  const auto b = verify_appendix(1.0, 12, 42);
  EXPECT_EQ(a.max_pullback, b.max_pullback);
  EXPECT_EQ(a.convergence_order, b.convergence_order);
  EXPECT_EQ(a.samples, 12);
  EXPECT_LT(a.max_pullback, 1e-8);
  EXPECT_LT(a.max_inverse, 1e-10);
}
