#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "magnetolab/linearization.hpp"
#include "magnetolab/systems.hpp"
#include "oracles.hpp"

using namespace magnetolab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat2 rot(double a) { return (Mat2() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a)).finished(); }
Mat2 stretch(double a) { return (Mat2() << std::exp(a), 0, 0, std::exp(-a)).finished(); }

SymplecticPath rotation_path(double delta, double T = 1.0) {
  return SymplecticPath::from_function([=](double t) { return rot(2 * kPi * delta * t / T); }, T, 2000);
}

// turns full rotations of the frame while stretching to a hyperbolic end.
SymplecticPath twisted_hyperbolic(double turns, double a, double T = 1.0) {
  return SymplecticPath::from_function([=](double t) { return Mat2(rot(2 * kPi * turns * t / T) * stretch(a * t / T)); }, T,
                                       2000);
}

}  // namespace

TEST(Index, OracleOnKnownNormalForms) {
  EXPECT_EQ(oracles::crossing_index(rotation_path(0.38)), 1);
  EXPECT_EQ(oracles::crossing_index(rotation_path(1.3)), 3);
  EXPECT_EQ(oracles::crossing_index(twisted_hyperbolic(1.0, 1.5)), 2);
  EXPECT_EQ(oracles::crossing_index(twisted_hyperbolic(0.5, 1.5)), 1);
}

TEST(Index, EllipticRotationPath) {
  for (double d : {0.11, 0.38, 0.62, 1.45, 2.7}) {
    const auto p = rotation_path(d);
    const auto data = analyze_path(p);
    EXPECT_EQ(data.type, OrbitType::elliptic) << d;
    EXPECT_NEAR(data.delta_tilde, d, 1e-6) << d;
    EXPECT_EQ(data.mu_bar, cz_index(p)) << d;
    EXPECT_EQ(cz_index(p), oracles::crossing_index(p)) << d;
  }
}

TEST(Index, PositiveHyperbolicMuTwo) {
  const auto p = twisted_hyperbolic(1.0, 1.2);
  const auto data = analyze_path(p);
  EXPECT_EQ(data.type, OrbitType::hyperbolic);
  EXPECT_FALSE(data.negative);
  EXPECT_EQ(data.mu_bar, 2);
  EXPECT_GT(data.trace, 2.0);
}

TEST(Index, NegativeHyperbolic) {
  const auto p = twisted_hyperbolic(0.5, 1.2);
  const auto data = analyze_path(p);
  EXPECT_EQ(data.type, OrbitType::hyperbolic);
  EXPECT_TRUE(data.negative);
  EXPECT_EQ(data.mu_bar, 1);
  EXPECT_LT(data.trace, -2.0);
  EXPECT_TRUE(good_bad(data.mu_bar, data.type, 1));
  EXPECT_FALSE(good_bad(data.mu_bar, data.type, 2));
  EXPECT_TRUE(good_bad(data.mu_bar, data.type, 3));
}

TEST(Index, IterationFormulaAgainstCrossingOracle) {
  const std::vector<SymplecticPath> paths = {rotation_path(0.38), rotation_path(0.73), twisted_hyperbolic(1.0, 0.8),
                                             twisted_hyperbolic(0.5, 0.8), twisted_hyperbolic(0.0, 0.8)};
  for (const auto& p : paths) {
    const auto data = analyze_path(p);
    for (int k = 1; k <= 8; ++k) {
      if (data.type == OrbitType::elliptic) {
        const double x = k * data.delta_tilde;
        if (std::abs(x - std::round(x)) < 1e-6) continue;
      }
      EXPECT_EQ(iterate_index(data, k), oracles::crossing_index(p.iterate(k))) << "k=" << k;
    }
    EXPECT_EQ(iteration_consistency(p, data, 8).mismatches, 0);
  }
}

// Index is invariant under an increasing change of time.
TEST(Index, ReparametrizationInvariance) {
  const auto p = twisted_hyperbolic(1.0, 1.0);
  const auto q = p.reparametrized([](double s) { return 0.5 * (s + s * s); }, 1.0, 3000);
  EXPECT_EQ(cz_index(p), cz_index(q));
  const auto e = rotation_path(0.62);
  const auto f = e.reparametrized([](double s) { return 0.5 * (s + s * s * s); }, 1.0, 3000);
  EXPECT_EQ(cz_index(e), cz_index(f));
}

TEST(Index, DegenerateEndpointRejected) {
  EXPECT_THROW(cz_index(rotation_path(1.0)), DegeneracyError);
}

TEST(Index, GradingPairs) {
  EXPECT_EQ(grading(0), std::make_pair(1, 2));
  EXPECT_EQ(grading(3), std::make_pair(-2, -1));
  EXPECT_EQ(grading(1, 3), std::make_pair(1, 2));
}

TEST(Index, RotationNumberOfRotation) {
  EXPECT_NEAR(rotation_number(rotation_path(0.38)), 0.38, 1e-9);
  EXPECT_NEAR(rotation_number(rotation_path(2.21)), 2.21, 1e-9);
}

TEST(Index, PathsStaySymplectic) {
  EXPECT_LT(twisted_hyperbolic(1.0, 2.0).max_det_residual(), 1e-12);
  EXPECT_LT(twisted_hyperbolic(1.0, 2.0).iterate(5).max_det_residual(), 1e-8);
}

TEST(Index, EllipticBumpOrbit) {
  const auto sys = elliptic_bump_torus();
  const auto orbit = elliptic_bump_orbit(sys);
  EXPECT_LT(orbit.residual, 1e-9);
  const auto lin = linearized_flow(sys, orbit);
  const auto data = analyze_path(lin.path);
  EXPECT_EQ(data.type, OrbitType::elliptic);
  EXPECT_EQ(data.mu_bar, 1);
  EXPECT_NEAR(data.delta_tilde, 0.38, 1e-6);
  EXPECT_LT(lin.path.max_det_residual(), 1e-8);
}

TEST(Index, IterateOrderValidated) {
  OrbitIndexData d;
  EXPECT_THROW(iterate_index(d, 0), ConfigError);
  EXPECT_THROW(good_bad(1, OrbitType::hyperbolic, 0), ConfigError);
}
