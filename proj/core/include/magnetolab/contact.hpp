#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "magnetolab/flow.hpp"

namespace magnetolab {

// Covector of the contact form at p, over (dq1, dq2, dv1, dv2):
//   torus:        theta - s pi^*beta + a (tau - pi^*nu)
//   sphere/genus: theta - s pi^*beta + s tau      (beta a primitive of sigma - K mu)
// Empty when the system carries no primitive.
std::optional<Vec4> contact_form(const MagneticSystem& sys, double s, double a, const PhasePoint& p);

// alpha(X + s W) at a unit vector: 1 - s beta(v) + a (s f - nu(v)) on tori and
// 1 - s beta(v) + s^2 f otherwise. Throws ConfigError without a primitive.
double contact_value(const MagneticSystem& sys, double s, double a, const PhasePoint& p);

struct CertifyGrid {
  int n = 256;        // base-point lattice per axis
  int n_angle = 64;   // recorded only: the fibre minimum is taken in closed form
  Vec2 box_lo{-1.0, 0.2};  // half-plane sample box
  Vec2 box_hi{1.0, 5.0};
  bool refine_witness = true;
};

struct ContactCertificate {
  std::string surface;
  double s = 0.0;
  double a = 0.0;
  int grid_n = 0;
  int grid_angle = 0;
  double min_value = 0.0;   // smallest lattice value (fibre minimum is exact)
  double margin = 0.0;      // Lipschitz allowance at the cell achieving the bound
  double bound = 0.0;       // min over cells of (corner minimum - cell margin)
  bool positive = false;
  // Witness of the smallest value, refined by local minimization when failed.
  int witness_chart = 0;
  Vec2 witness_q = Vec2::Zero();
  double witness_angle = 0.0;
  double witness_value = 0.0;
};

ContactCertificate certify(const MagneticSystem& sys, double s, double a, const CertifyGrid& grid = {});

struct SBounds {
  double s_minus = std::numeric_limits<double>::infinity();
  double s_plus = 0.0;
  bool plus_applicable = false;  // only meaningful when min f > 0
};

// Positive roots of 1 - |beta| x + (min f) x^2.
SBounds s_bounds(double norm_beta, double min_f);

struct R0Options {
  int basis = 12;           // Fourier modes in the gauge search
  int grid = 256;           // lattice for the final sup-norm bound
  int search_grid = 48;     // lattice for the smoothed objective
  int sweeps = 6;
  std::vector<double> loop_radii{};  // extra circle radii for the lower bound
};

struct R0Estimate {
  double lower = 0.0;
  double upper = 0.0;
  double unbounded_max = 0.0;  // sup |beta_0| before the gauge search
  std::vector<FourierTerm> gauge;
  double best_loop_radius = 0.0;
  Vec2 best_loop_center = Vec2::Zero();
};

// Bracket of inf over primitives of sup |beta|_g for an exact torus system.
R0Estimate estimate_r0(const MagneticSystem& sys, const R0Options& opt = {});

struct QLTorusSpec {
  Vec2 center{0.5, 0.5};
  double radius = 0.2;
  double width = 0.1;
  double sharpness = 0.05;  // b''(r_delta) = -2 p / width^2
  double shoulder = 0.3;
  double shoulder_scale = 0.05;
  double edge = 0.2;
  double orientation = 1.0;
};

struct QLTorus {
  MagneticSystem system;
  ClosedOrbit delta;
  double curvature = 0.0;  // kappa of delta = 1/r_delta
  double margin = 0.0;     // kappa - |nu| on delta
  double sup_beta = 0.0;   // lattice maximum of |beta|
  // Annulus around delta on which f >= 0 (outer edge: first zero of f).
  double u_inner = 0.0;
  double u_outer = 0.0;
};

QLTorus build_ql_torus(const QLTorusSpec& spec, double tol = 1e-12);

struct Annulus {
  Vec2 center{0.5, 0.5};
  double inner = 0.0;
  double outer = 0.0;
  bool contains(const Vec2& q) const;
};

struct A0Result {
  double a0 = 0.0;
  double eps_prime = 0.0;
  double c0 = 0.0;
  bool ok = false;
  std::string diagnostic;
};

// a0 = eps'/max(0, c0) with eps' = min over the complement of U (and over the
// window s in [1-b0, 1+b0]) of 1 - s|beta|, and c0 = sup there of |nu| - s f.
A0Result a0_bound(const MagneticSystem& sys, double b0, const Annulus& region, int n = 1024);

}  // namespace magnetolab
