#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magnetolab/geometry.hpp"
#include "magnetolab/systems.hpp"

using namespace magnetolab;

namespace {

std::vector<MagneticSystem> all_builtins() {
  std::vector<MagneticSystem> v;
  for (const auto& n : builtin_names()) v.push_back(builtin_system(n));
  return v;
}

Vec2 sample_q(const MagneticSystem& sys, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  if (sys.surface.kind() == SurfaceKind::sphere) return Vec2(2 * u(rng) - 1, 2 * u(rng) - 1);
  if (sys.surface.kind() == SurfaceKind::halfplane) return Vec2(4 * u(rng) - 2, 0.2 + 2 * u(rng));
  return Vec2(u(rng), u(rng));
}

}  // namespace

TEST(Geometry, SphereChartRoundTrip) {
  const auto m = SurfaceModel::sphere();
  const auto p = make_phase_point(m, 0, Vec2(0.3, -0.7), Vec2(0.4, 1.1));
  const auto back = to_chart(m, to_chart(m, p, 1), 0);
  EXPECT_NEAR((back.q - p.q).norm(), 0.0, 1e-14);
  EXPECT_NEAR((back.v - p.v).norm(), 0.0, 1e-14);
  EXPECT_NEAR(to_chart(m, p, 1).rho, p.rho, 1e-14);
}

TEST(Geometry, TransitionJacobianMatchesDifferences) {
  const auto m = SurfaceModel::sphere();
  const Vec2 q(0.6, 0.2), v(-0.3, 0.8);
  const Mat4 J = m.transition_jacobian(0, q, v);
  const double h = 1e-6;
  for (int k = 0; k < 4; ++k) {
    Vec4 x;
    x << q, v;
    Vec4 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Vec2 qp, vp, qm, vm;
    m.transition(0, xp.head<2>(), xp.tail<2>(), qp, vp);
    m.transition(0, xm.head<2>(), xm.tail<2>(), qm, vm);
    Vec4 col;
    col << (qp - qm) / (2 * h), (vp - vm) / (2 * h);
    EXPECT_NEAR((J.col(k) - col).norm(), 0.0, 1e-8) << "column " << k;
  }
}

// K = -e^{-2 phi} (phi_xx + phi_yy) with phi = log lambda, by differences.
TEST(Geometry, CurvatureFromConformalFactor) {
  const std::vector<SurfaceModel> models = {SurfaceModel::sphere(), SurfaceModel::conformal_torus(0.1),
                                            SurfaceModel::halfplane(), SurfaceModel::flat_torus()};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (const auto& m : models) {
    for (int i = 0; i < 10; ++i) {
      const Vec2 q(u(rng), u(rng) + 0.1);
      const double h = 1e-4;
      auto phi = [&](double x, double y) { return std::log(m.lambda(0, Vec2(x, y))); };
      const double lap = (phi(q.x() + h, q.y()) + phi(q.x() - h, q.y()) + phi(q.x(), q.y() + h) +
                          phi(q.x(), q.y() - h) - 4 * phi(q.x(), q.y())) /
                         (h * h);
      const double K = -lap / std::exp(2 * phi(q.x(), q.y()));
      EXPECT_NEAR(m.curvature(0, q), K, 1e-5) << to_string(m.kind());
    }
  }
}

TEST(Geometry, EulerCharacteristic) {
  EXPECT_EQ(SurfaceModel::sphere().euler_characteristic(), 2);
  EXPECT_EQ(SurfaceModel::flat_torus().euler_characteristic(), 0);
  EXPECT_EQ(SurfaceModel::conformal_torus(0.2).euler_characteristic(), 0);
}

TEST(Geometry, HalfplaneRejectsBoundary) {
  const auto m = SurfaceModel::halfplane();
  EXPECT_THROW(m.check_domain(0, Vec2(0.0, 0.0)), DomainError);
  EXPECT_THROW(m.check_domain(0, Vec2(1.0, -0.5)), DomainError);
  EXPECT_NO_THROW(m.check_domain(0, Vec2(1.0, 0.5)));
}

TEST(Geometry, SurfaceKindNames) {
  for (auto k : {SurfaceKind::sphere, SurfaceKind::flat_torus, SurfaceKind::conformal_torus, SurfaceKind::halfplane})
    EXPECT_EQ(surface_kind_from_string(to_string(k)), k);
  EXPECT_THROW(surface_kind_from_string("klein-bottle"), ConfigError);
}

TEST(Geometry, JacobianMatchesDifferences) {
  std::mt19937_64 rng(3);
  for (const auto& sys : all_builtins()) {
    const Vec2 q = sample_q(sys, rng);
    Vec4 x;
    x << q, 0.7, -0.4;
    const Mat4 J = ode_jacobian(sys, 0, x);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      Vec4 xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const Vec4 col = (ode_rhs(sys, 0, xp) - ode_rhs(sys, 0, xm)) / (2 * h);
      EXPECT_NEAR((J.col(k) - col).norm(), 0.0, 1e-6 * (1 + col.norm())) << to_string(sys.surface.kind());
    }
  }
}

// Structure relations of the frame hold everywhere the model is defined.
TEST(Geometry, FrameBracketsProperty) {
  std::mt19937_64 rng(11);
  const FrameField F[] = {FrameField::X, FrameField::Y, FrameField::H, FrameField::V};
  for (const auto& sys : all_builtins()) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 q = sample_q(sys, rng);
      const auto p = make_phase_point(sys.surface, 0, q, Vec2(0.8, 0.5));
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          EXPECT_LT(bracket_check(sys, p, F[a], F[b]), 1e-5) << to_string(sys.surface.kind()) << " " << a << b;
    }
  }
}

TEST(Geometry, CoframeIsDual) {
  const auto sys = builtin_system("conformal-torus");
  const auto p = make_phase_point(sys.surface, 0, Vec2(0.3, 0.6), Vec2(-0.2, 0.9));
  const FrameField F[] = {FrameField::X, FrameField::Y, FrameField::H, FrameField::V};
  for (int k = 0; k < 4; ++k) {
    const auto c = coframe_eval(sys, p, frame_field(sys, p, F[k]));
    const double vals[] = {c.theta, c.drho, c.eta, c.tau};
    for (int j = 0; j < 4; ++j)
      if (j != k) EXPECT_NEAR(vals[j], 0.0, 1e-12) << k << j;
    EXPECT_GT(std::abs(vals[k]), 1e-6);
  }
}

TEST(Geometry, SymplecticMatrixNondegenerate) {
  std::mt19937_64 rng(5);
  for (const auto& sys : all_builtins()) {
    const Vec2 q = sample_q(sys, rng);
    Vec4 x;
    x << q, 0.3, 0.9;
    const Mat4 W = symplectic_matrix(sys, 0, x);
    EXPECT_NEAR((W + W.transpose()).norm(), 0.0, 1e-12);
    EXPECT_GT(std::abs(W.determinant()), 1e-8);
  }
}

TEST(Geometry, UnitPointHasUnitSpeed) {
  for (const auto& sys : all_builtins()) {
    const auto p = unit_point(sys.surface, 0, Vec2(0.4, 0.7), 1.3);
    EXPECT_NEAR(p.rho, 1.0, 1e-14);
    EXPECT_NEAR(sys.surface.norm(0, p.q, p.v), 1.0, 1e-14);
  }
}

TEST(Geometry, LorentzForceIsOrthogonal) {
  const auto sys = builtin_system("elliptic-bump");
  const auto p = make_phase_point(sys.surface, 0, Vec2(0.55, 0.4), Vec2(0.3, -0.8));
  EXPECT_NEAR(sys.surface.inner(0, p.q, lorentz_force(sys, p), p.v), 0.0, 1e-14);
}
