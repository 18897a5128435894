#include "magnetolab/systems.hpp"

#include <cmath>
#include <numbers>

namespace magnetolab {

namespace {
constexpr double kPi = std::numbers::pi;
}

MagneticSystem symmetric_sphere(double s) {
  MagneticSystem sys;
  sys.surface = SurfaceModel::sphere();
  sys.f = ScalarField::make_constant(1.0);
  sys.beta = OneForm{};
  sys.s = s;
  return sys;
}

MagneticSystem symmetric_genus(double s) {
  MagneticSystem sys;
  sys.surface = SurfaceModel::halfplane();
  sys.f = ScalarField::make_constant(-1.0);
  sys.beta = OneForm{};
  sys.s = s;
  return sys;
}

MagneticSystem flat_torus_constant(double c, double s) {
  MagneticSystem sys;
  sys.surface = SurfaceModel::flat_torus();
  sys.f = ScalarField::make_constant(c);
  if (c == 0.0) sys.beta = OneForm{};
  sys.s = s;
  return sys;
}

MagneticSystem conformal_torus_system(double amplitude, double s) {
  MagneticSystem sys;
  sys.surface = SurfaceModel::conformal_torus(amplitude);
  sys.f.kind = ScalarField::Kind::fourier;
  sys.f.fourier.c0 = 1.0;
  sys.f.fourier.terms.push_back({1, 0, 0.3, 0.0});
  sys.s = s;
  return sys;
}

MagneticSystem elliptic_bump_torus(const EllipticBump& spec) {
  if (!(spec.r_star > 0.0 && spec.r_star < spec.support && spec.support < 0.5))
    throw ConfigError("elliptic bump needs 0 < r_star < support < 1/2");
  if (!(spec.s > 0.0)) throw ConfigError("elliptic bump needs s > 0");
  MagneticSystem sys;
  sys.surface = SurfaceModel::flat_torus();
  BumpProfile b;
  b.shape = BumpProfile::Shape::exponential;
  b.r0 = 0.0;
  b.width = spec.support;
  b.sharpness = spec.sharpness;
  const auto j = b.eval(spec.r_star);
  if (!(std::abs(j.db) > 1e-12)) throw ConfigError("bump is flat at r_star");
  // Transverse Jacobi equation along the circle: y'' + (kappa^2 + s f_r) y = 0
  // with kappa = 1/r_star, so the rotation number is r_star sqrt(kappa^2 + s f_r).
  const double dt = spec.delta_tilde;
  const double amplitude = (dt * dt - 1.0) / (spec.r_star * spec.r_star) / (spec.s * j.db);
  sys.f.kind = ScalarField::Kind::radial_bump;
  sys.f.center = spec.center;
  sys.f.profile = b;
  sys.f.amplitude = amplitude;
  sys.f.constant = 1.0 / (spec.s * spec.r_star) - amplitude * j.b;
  sys.s = spec.s;
  return sys;
}

ClosedOrbit elliptic_bump_orbit(const MagneticSystem& sys, const EllipticBump& spec, double tol) {
  const PhasePoint x0 = make_phase_point(sys.surface, 0, spec.center + Vec2(spec.r_star, 0.0), Vec2(0.0, 1.0));
  return make_closed_orbit(sys, x0, 2.0 * kPi * spec.r_star, tol);
}

ClosedOrbit halfplane_ray_orbit(const MagneticSystem& sys, double ell) {
  if (sys.surface.kind() != SurfaceKind::halfplane) throw ConfigError("ray orbit lives on the half-plane");
  const double fs = sys.s * sys.density(0, Vec2(0.0, 1.0));
  const double cs = std::abs(fs);
  if (!(cs > 0.0 && cs < 1.0)) throw ConfigError("ray orbit needs 0 < s|f| < 1");
  if (!(ell > 0.0)) throw ConfigError("dilation length must be positive");
  const double alpha = std::acos(cs);
  // Walking outward along y = x tan(alpha) the curve bends left of the
  // geodesic, so a right-turning field (o f < 0) runs it toward the origin.
  const Vec2 dir(std::cos(alpha), std::sin(alpha));
  const double sense = sys.surface.orientation() * fs > 0.0 ? 1.0 : -1.0;
  ClosedOrbit o;
  o.x0 = make_phase_point(sys.surface, 0, dir, sense * dir.y() * dir);
  o.period = ell / std::sin(alpha);
  o.homotopy = "closed";
  o.theta = std::atan2(o.x0.v.y(), o.x0.v.x());
  return o;
}

std::vector<std::string> builtin_names() {
  return {"symmetric-sphere", "symmetric-genus", "flat-torus", "conformal-torus", "elliptic-bump", "ql-torus"};
}

MagneticSystem builtin_system(const std::string& name) {
  if (name == "symmetric-sphere") return symmetric_sphere(1.0);
  if (name == "symmetric-genus") return symmetric_genus(1.5);
  if (name == "flat-torus") return flat_torus_constant(1.0, 1.0);
  if (name == "conformal-torus") return conformal_torus_system(0.1, 1.0);
  if (name == "elliptic-bump") return elliptic_bump_torus();
  if (name == "ql-torus") return build_ql_torus({}).system;
  throw ConfigError("unknown built-in system " + name);
}

}  // namespace magnetolab
