#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "magnetolab/geometry.hpp"
#include "magnetolab/ode.hpp"

namespace magnetolab {

struct Sample {
  double t = 0.0;
  PhasePoint p;
};

struct Trajectory {
  std::vector<Sample> samples;
  ode::Stats stats;

  const PhasePoint& back() const { return samples.back().p; }
};

struct FlowOptions {
  double max_step = std::numeric_limits<double>::infinity();
  bool record = true;   // keep every accepted step (otherwise only the endpoints)
};

// Adaptive DOP853 integration of the magnetic flow; t_end may be negative.
// The step controller runs at tol/10.
Trajectory integrate(const MagneticSystem& sys, const PhasePoint& p0, double t_end, double tol,
                     const FlowOptions& opt = {});

// Endpoint of the flow after time t.
PhasePoint flow_to(const MagneticSystem& sys, const PhasePoint& p0, double t, double tol,
                   double max_step = std::numeric_limits<double>::infinity());

// Endpoint after n equal DOP853 steps (a smooth function of p0, for differencing).
PhasePoint flow_fixed(const MagneticSystem& sys, const PhasePoint& p0, double t, int n);

// max |rho(t) - rho(0)| / rho(0) along the samples.
double speed_drift(const Trajectory& traj);

// Algebraic least-squares circle through planar points.
struct CircleFit {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double residual = 0.0;  // max |dist - radius|
};
CircleFit fit_circle(const std::vector<Vec2>& pts);

// Acute angle at which a circle meets the line y = 0: cos(angle) = |c_y| / R.
// Throws ConfigError when they do not meet.
double boundary_angle(const CircleFit& c);

struct CurvatureSample {
  double t = 0.0;
  double kappa = 0.0;     // g(nabla_v v, jhat v)/rho^3 from finite differences
  double expected = 0.0;  // s f(q)/rho
};

// Geodesic curvature at each recorded sample from a 5-point stencil of
// velocities re-integrated at equal spacing around it.
std::vector<CurvatureSample> geodesic_curvature(const MagneticSystem& sys, const Trajectory& traj);

// A straight segment in one chart: points origin + u*direction, u in [u_min, u_max].
// Crossings count when the flow passes from the right to the left side of the
// direction vector. On tori the displacement is reduced mod 1 (periodic).
struct SectionSpec {
  int chart = 0;
  Vec2 origin{0.0, 0.0};
  Vec2 direction{1.0, 0.0};
  double u_min = 0.0;
  double u_max = 1.0;
};

struct SectionHit {
  double t = 0.0;
  double u = 0.0;
  double theta = 0.0;  // chart angle of the velocity
  PhasePoint p;
};

// Unit-speed point on the section with coordinates (u, theta).
PhasePoint section_point(const MagneticSystem& sys, const SectionSpec& sec, double u, double theta);

// Integrate from p0 until max_hits section crossings or t_max.
std::vector<SectionHit> section_hits(const MagneticSystem& sys, const SectionSpec& sec, const PhasePoint& p0,
                                     int max_hits, double t_max, double tol);

struct SearchGrid {
  int n_u = 8;
  int n_theta = 16;
  double theta_min = 0.0;
  double theta_max = 6.283185307179586;
  int max_returns = 3;
  double t_max = 50.0;
  double accept_radius = 0.5;  // seed-to-return distance that triggers Newton
  int newton_iterations = 30;
  double integration_tol = 1e-12;
  double residual_tol = 1e-7;   // closure residual required of returned orbits
};

struct ClosedOrbit {
  PhasePoint x0;
  double period = 0.0;
  double residual = 0.0;
  std::string homotopy;          // "winding" (nonzero lattice class), "contractible" or "closed"
  std::array<long, 2> winding{0, 0};
  bool prime = true;
  int iterate = 1;
  double u = 0.0;
  double theta = 0.0;
  std::vector<std::array<double, 2>> crossings;  // (u, theta) of all hits within one period
};

// Flow x0 for time T and measure the return distance in the chart of x0
// (tori: modulo the integer lattice, which is reported in winding).
double closure_residual(const MagneticSystem& sys, const PhasePoint& x0, double period, double tol,
                        std::array<long, 2>* winding = nullptr);

ClosedOrbit make_closed_orbit(const MagneticSystem& sys, const PhasePoint& x0, double period, double tol);

struct OrbitSearchReport {
  std::vector<ClosedOrbit> orbits;
  std::vector<std::string> diagnostics;  // dropped candidates
};

// Newton shooting on the section return map from a grid of seeds.
OrbitSearchReport find_closed_orbits(const MagneticSystem& sys, const SectionSpec& sec, const SearchGrid& grid,
                                     double tol);

}  // namespace magnetolab
