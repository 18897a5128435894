#pragma once

#include <Eigen/Dense>
#include <vector>

namespace magnetolab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

// a*cos(2 pi k.q) + b*sin(2 pi k.q), periodic on the unit square torus.
struct FourierTerm {
  int kx = 0;
  int ky = 0;
  double a = 0.0;
  double b = 0.0;
};

struct FourierSeries {
  double c0 = 0.0;
  std::vector<FourierTerm> terms;

  double value(const Vec2& q) const;
  Vec2 gradient(const Vec2& q) const;
  Mat2 hessian(const Vec2& q) const;
  bool zero_mean() const;
};

// Smooth radial profile b(r) = exp(-P(u)), u = (r - r0)/width, supported in |u| < 1.
//   exponential: P = p u^2/(1-u^2)
//   shouldered:  P = p u^2 + c (s + k^2/s - 2k) + q u^4/(1-u^2)^2,  s = sqrt(u^2+k^2)
// Both peak at b(r0) = 1 with b''(r0) = -2p/width^2. The shouldered form lets b
// drop early with a bounded slope before the edge term closes the support.
struct BumpProfile {
  enum class Shape { exponential, shouldered };
  Shape shape = Shape::exponential;
  double r0 = 0.0;
  double width = 1.0;
  double sharpness = 1.0;        // p
  double shoulder = 0.0;         // c
  double shoulder_scale = 0.05;  // k
  double edge = 0.0;             // q

  struct Jet {
    double b = 0, db = 0, d2b = 0;
  };
  Jet eval(double r) const;
};

// Displacement q - c reduced to the fundamental domain [-1/2, 1/2)^2.
Vec2 torus_displacement(const Vec2& q, const Vec2& c);

// Scalar density on a chart: the magnetic strength f.
struct ScalarField {
  enum class Kind { constant, fourier, radial_bump, ql_density };
  Kind kind = Kind::constant;

  double constant = 0.0;   // constant kind, and offset for radial_bump
  FourierSeries fourier;   // fourier kind
  Vec2 center{0.5, 0.5};   // radial_bump / ql_density
  double amplitude = 0.0;  // radial_bump
  BumpProfile profile;     // radial_bump / ql_density
  double orientation = 1.0;  // ql_density: sign of the area form

  static ScalarField make_constant(double c);

  double value(const Vec2& q) const;
  Vec2 gradient(const Vec2& q) const;
};

// A primitive one-form beta, given by its chart components, plus an optional
// exact gauge term d(phi) with phi a Fourier series.
struct OneForm {
  enum class Kind { zero, constant, ql, poisson };
  Kind kind = Kind::zero;

  Vec2 constant{0.0, 0.0};    // constant kind: harmonic part on the torus
  Vec2 center{0.5, 0.5};      // ql
  BumpProfile profile;        // ql
  FourierSeries density;      // poisson: zero-mean f with d beta = f dx^dy
  double orientation = 1.0;   // ql / poisson
  FourierSeries gauge;        // added as d(gauge)

  // Components (beta_1, beta_2).
  Vec2 value(const Vec2& q) const;
  // Jacobian d beta_i / d q_j.
  Mat2 jacobian(const Vec2& q) const;
  // d beta_2/dq1 - d beta_1/dq2.
  double curl(const Vec2& q) const;
  bool has_gauge() const { return !gauge.terms.empty(); }
};

}  // namespace magnetolab
