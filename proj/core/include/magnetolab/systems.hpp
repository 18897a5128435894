#pragma once

#include <string>
#include <vector>

#include "magnetolab/contact.hpp"
#include "magnetolab/flow.hpp"

namespace magnetolab {

// Round sphere with f = 1 (K = 1); the normalized primitive of f - K is zero.
MagneticSystem symmetric_sphere(double s);

// Half-plane model of a hyperbolic surface with f = -1 (K = -1); zero
// normalized primitive. Used for the closed genus >= 2 quotients.
MagneticSystem symmetric_genus(double s);

// Flat torus with constant f = c; no primitive unless c = 0.
MagneticSystem flat_torus_constant(double c, double s);

// Conformal torus phi = amplitude (cos 2 pi x + cos 2 pi y) with f = 1 + 0.3 cos 2 pi x.
MagneticSystem conformal_torus_system(double amplitude, double s);

// Flat torus with a radial bump in f whose circle of radius r_star about the
// center is an elliptic closed orbit with rotation number delta_tilde.
struct EllipticBump {
  Vec2 center{0.5, 0.5};
  double support = 0.45;  // bump radius
  double sharpness = 1.0;
  double r_star = 0.2;
  double delta_tilde = 0.38;
  double s = 1.0;
};
MagneticSystem elliptic_bump_torus(const EllipticBump& spec = {});
// The counter-clockwise circle of radius r_star starting at center + (r_star, 0).
ClosedOrbit elliptic_bump_orbit(const MagneticSystem& sys, const EllipticBump& spec = {}, double tol = 1e-12);

// The Euclidean ray from the origin at angle alpha = arccos(s) to the
// boundary; closed modulo the dilation z -> e^ell z, period ell / sin(alpha).
ClosedOrbit halfplane_ray_orbit(const MagneticSystem& sys, double ell = 1.0);

// Names accepted by builtin_system.
std::vector<std::string> builtin_names();
MagneticSystem builtin_system(const std::string& name);

}  // namespace magnetolab
