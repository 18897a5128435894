#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "magnetolab/geometry.hpp"

namespace magnetolab {

// The fibre-rescaled geodesic rotation F_s = m_{a_s(rho)} o Phi_{b_s(rho)} on
// the tangent bundle of the round sphere, with
//   a_s(rho) = sqrt(2 (sqrt(rho^2+s^2) - s)) / rho,  b_s(rho) = -atan(rho/s)/rho.
// It carries theta + s tau to (rho^2/2 + s) tau.

struct MapCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;  // sqrt(rho^2 + s^2)
};

// Closed form, with the removable limits a = 1/sqrt(s), b = -1/s at rho = 0.
MapCoefficients coefficients(double s, double rho);

// R_s = sqrt((rho^2 + s^2)/(1 + s^2)); equal to 1 on the unit sphere bundle.
double radial_coordinate(double s, double rho);

struct MapOptions {
  double orientation = 1.0;  // of the round sphere carrying the map
  int steps = 48;            // fixed DOP853 steps for Phi_b
  double fd_step = 2e-3;     // relative central-difference step
  bool richardson = true;
};

SurfaceModel round_sphere(double orientation = 1.0);

// Time-b flow of -H: moves the base point along the geodesic in direction
// -jhat v and parallel transports v.
PhasePoint geodesic_rotation(const SurfaceModel& m, const PhasePoint& p, double b, int steps = 48);

PhasePoint apply_Fs(double s, const PhasePoint& p, const MapOptions& opt = {});

// Newton on the 4D map started from the closed-form inverse.
struct Inversion {
  PhasePoint x;
  double residual = 0.0;  // |F_s(x) - y| in the chart of y
  int iterations = 0;
};
Inversion invert_Fs(double s, const PhasePoint& y, const MapOptions& opt = {}, double tol = 1e-13, int max_iter = 20);

// Max over the unit frame X, Y, H, V (divided by rho) of
// |(rho'^2/2 + s) tau(dF w) - (theta + s tau)(w)|, dF by central differences.
double pullback_residual(double s, const PhasePoint& p, const MapOptions& opt = {});

// Max over the same frame of |tau(dPhi_b w) - (-sin(b rho)/rho theta + cos(b rho) tau)(w)|.
double phi_pullback_residual(double b, const PhasePoint& p, const MapOptions& opt = {});

// max(|c cos(b rho) - s|, |c sin(b rho) + rho|).
double closed_form_residual(double s, double rho);

struct ConvergenceOrder {
  std::vector<double> steps;
  std::vector<double> residuals;
  double order = 0.0;  // least-squares slope of log residual against log step
};
// Plain central differences at steps h0, h0/2, ... (no extrapolation).
ConvergenceOrder pullback_convergence(double s, const PhasePoint& p, double h0 = 0.08, int levels = 4,
                                      const MapOptions& opt = {});

// Integrates the Liouville field of omega_s from p (rho = 1) for time r and
// returns |R_s(endpoint) - e^r|.
double liouville_radial_check(double s, const PhasePoint& p, double r, double orientation = 1.0);

// Drift of R_s along the magnetic flow of strength s (f = 1) over time t.
double radial_drift(double s, const PhasePoint& p, double t, double orientation = 1.0);

// Uniform point on the sphere (chart 0 or 1 covering |z| <= 1) with speed in
// [rho_lo, rho_hi] and uniform direction.
PhasePoint random_sphere_point(std::mt19937_64& rng, double rho_lo, double rho_hi,
                               const SurfaceModel& m = round_sphere());

struct AppendixReport {
  double s = 0.0;
  int samples = 0;
  double max_pullback = 0.0;
  double max_phi_pullback = 0.0;
  double max_closed_form = 0.0;
  double max_speed_law = 0.0;
  double max_inverse = 0.0;
  double max_liouville = 0.0;
  double max_radial_drift = 0.0;
  double convergence_order = 0.0;
  int resampled = 0;  // points redrawn after a conditioning failure
};

// Random samples with rho in [0.1, 5]; b in [-1, 1] for the Phi check.
AppendixReport verify_appendix(double s, int samples, std::uint64_t seed, const MapOptions& opt = {});

}  // namespace magnetolab
