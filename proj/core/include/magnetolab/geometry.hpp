#pragma once

#include <optional>
#include <string>

#include "magnetolab/errors.hpp"
#include "magnetolab/fields.hpp"

namespace magnetolab {

enum class SurfaceKind { sphere, flat_torus, conformal_torus, halfplane };

std::string to_string(SurfaceKind k);
SurfaceKind surface_kind_from_string(const std::string& s);

// phi = log(lambda) and its first two derivatives in chart coordinates.
struct ConformalJet {
  double phi = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};

// A surface carried by conformal charts, g = lambda(q)^2 * Euclidean.
//
// Sphere: stereographic coordinate z in chart 0 and w = 1/z in chart 1, both
// with lambda = 2/(1+|.|^2). Tori live on the unit square with q unwrapped in
// R^2. The half-plane uses {y > 0} with lambda = 1/y.
class SurfaceModel {
 public:
  static SurfaceModel sphere();
  static SurfaceModel flat_torus();
  // phi = amplitude * (cos 2 pi x + cos 2 pi y)
  static SurfaceModel conformal_torus(double amplitude);
  static SurfaceModel halfplane();

  SurfaceKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == SurfaceKind::flat_torus || kind_ == SurfaceKind::conformal_torus; }
  int chart_count() const { return kind_ == SurfaceKind::sphere ? 2 : 1; }
  double amplitude() const { return amplitude_; }

  // Orientation sign o: jhat = o * (rotation by +pi/2 in the chart).
  double orientation() const { return orientation_; }
  void set_orientation(double o);

  ConformalJet log_factor(int chart, const Vec2& q) const;
  double lambda(int chart, const Vec2& q) const;
  double curvature(int chart, const Vec2& q) const;
  // Gamma(u, w)_k = u_k (w.grad phi) + w_k (u.grad phi) - (u.w) d_k phi
  Vec2 christoffel(int chart, const Vec2& q, const Vec2& u, const Vec2& w) const;
  double inner(int chart, const Vec2& q, const Vec2& u, const Vec2& w) const;
  double norm(int chart, const Vec2& q, const Vec2& u) const;
  Vec2 rotate(const Vec2& v) const { return orientation_ * Vec2(-v.y(), v.x()); }

  // Euler characteristic of the closed model; undefined for the half-plane.
  int euler_characteristic() const;

  void check_domain(int chart, const Vec2& q) const;
  bool wants_switch(int chart, const Vec2& q) const;
  // Coordinates of (q, v) in the other sphere chart.
  void transition(int from, const Vec2& q, const Vec2& v, Vec2& q_out, Vec2& v_out) const;
  // Jacobian of the 4D transition map at (q, v).
  Mat4 transition_jacobian(int from, const Vec2& q, const Vec2& v) const;

 private:
  SurfaceKind kind_ = SurfaceKind::flat_torus;
  double amplitude_ = 0.0;
  double orientation_ = 1.0;
};

struct PhasePoint {
  int chart = 0;
  Vec2 q = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  double rho = 0.0;

  Vec4 state() const;
};

PhasePoint make_phase_point(const SurfaceModel& m, int chart, const Vec2& q, const Vec2& v);
PhasePoint make_phase_point(const SurfaceModel& m, int chart, const Vec4& x);
// Re-express p in the requested chart (no-op for single-chart surfaces).
PhasePoint to_chart(const SurfaceModel& m, const PhasePoint& p, int chart);
// Switch to the preferred chart when p wandered into the far region.
PhasePoint normalize_chart(const SurfaceModel& m, const PhasePoint& p);
// Unit-speed point at q with chart-angle theta of the velocity.
PhasePoint unit_point(const SurfaceModel& m, int chart, const Vec2& q, double theta);

struct MagneticSystem {
  SurfaceModel surface = SurfaceModel::flat_torus();
  ScalarField f;
  std::optional<OneForm> beta;
  double s = 1.0;
  double a = 0.0;  // torus contact parameter

  double density(int chart, const Vec2& q) const;
  Vec2 density_gradient(int chart, const Vec2& q) const;
  // Components of the primitive; throws ConfigError when no primitive is set.
  Vec2 beta_at(int chart, const Vec2& q) const;
  // nu_q(v) for the constant section e1/lambda of a torus.
  double nu(int chart, const Vec2& q, const Vec2& v) const;
  // True for sphere/half-plane models whose primitive integrates
  // sigma - K mu rather than sigma.
  bool uses_normalized_primitive() const { return !surface.is_torus(); }
  void validate() const;
};

Vec2 lorentz_force(const MagneticSystem& sys, const PhasePoint& p);

// (q', v') of the magnetic flow with strength sys.s.
Vec4 ode_rhs(const MagneticSystem& sys, int chart, const Vec4& x);
Vec4 ode_rhs(const MagneticSystem& sys, const PhasePoint& p);
// Analytic derivative of ode_rhs with respect to (q, v).
Mat4 ode_jacobian(const MagneticSystem& sys, int chart, const Vec4& x);

enum class FrameField { X, Y, H, V };
Vec4 frame_field(const MagneticSystem& sys, const PhasePoint& p, FrameField which);
Vec4 frame_field(const SurfaceModel& m, int chart, const Vec4& x, FrameField which);

struct Coframe {
  double theta = 0, drho = 0, eta = 0, tau = 0;
};
Coframe coframe_eval(const MagneticSystem& sys, const PhasePoint& p, const Vec4& w);

// Covectors of theta and tau at p, as row coefficients over (dq1, dq2, dv1, dv2).
Vec4 theta_covector(const SurfaceModel& m, const PhasePoint& p);
Vec4 tau_covector(const SurfaceModel& m, const PhasePoint& p);

// Finite-difference Lie bracket [A, B] minus its tabulated value.
double bracket_check(const MagneticSystem& sys, const PhasePoint& p, FrameField a, FrameField b,
                     double step = 1e-4);
// Tabulated value of [A, B] at p.
Vec4 bracket_expected(const MagneticSystem& sys, const PhasePoint& p, FrameField a, FrameField b);

// Matrix of omega_s = d theta - s pi^* sigma: omega(a, b) = a^T Omega b.
Mat4 symplectic_matrix(const MagneticSystem& sys, int chart, const Vec4& x);
Mat4 symplectic_matrix(const MagneticSystem& sys, const PhasePoint& p);

// Vector field Z with omega_s(Z, .) = theta + s tau.
Vec4 liouville_field(const MagneticSystem& sys, const PhasePoint& p);

// Total flux of sigma by quadrature over the model (sphere: both hemispheres).
double total_flux(const MagneticSystem& sys, int n = 400);

// max |d beta - sigma'| over an n x n sample grid (finite differences, step h).
double primitive_residual(const MagneticSystem& sys, int n = 32, double h = 1e-5);

}  // namespace magnetolab
