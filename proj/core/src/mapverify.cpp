#include "magnetolab/mapverify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "magnetolab/flow.hpp"
#include "magnetolab/ode.hpp"
#include "magnetolab/parallel.hpp"

namespace magnetolab {

namespace {

constexpr double kPi = std::numbers::pi;

// Chart switch for a bare 4-state on the sphere.
bool settle4(const SurfaceModel& m, int& chart, ode::State<4>& x) {
  if (!m.wants_switch(chart, x.head<2>())) return false;
  Vec2 q2, v2;
  m.transition(chart, x.head<2>(), x.tail<2>(), q2, v2);
  chart = 1 - chart;
  x << q2, v2;
  return true;
}

using PointMap = std::function<PhasePoint(const PhasePoint&)>;

// Map evaluated at the state x of chart `in`, read in chart `out`.
Vec4 eval_state(const SurfaceModel& m, const PointMap& F, int in, const Vec4& x, int out) {
  return to_chart(m, F(make_phase_point(m, in, x)), out).state();
}

Vec4 directional(const SurfaceModel& m, const PointMap& F, const PhasePoint& p, const Vec4& w, double h, int out) {
  const Vec4 x = p.state();
  return (eval_state(m, F, p.chart, x + h * w, out) - eval_state(m, F, p.chart, x - h * w, out)) / (2.0 * h);
}

Vec4 derivative(const SurfaceModel& m, const PointMap& F, const PhasePoint& p, const Vec4& w, double h, int out,
                bool richardson) {
  const Vec4 d1 = directional(m, F, p, w, h, out);
  if (!richardson) return d1;
  const Vec4 d2 = directional(m, F, p, w, 0.5 * h, out);
  return (4.0 * d2 - d1) / 3.0;
}

std::array<Vec4, 4> unit_frame(const SurfaceModel& m, const PhasePoint& p) {
  const Vec4 x = p.state();
  return {frame_field(m, p.chart, x, FrameField::X) / p.rho, frame_field(m, p.chart, x, FrameField::Y) / p.rho,
          frame_field(m, p.chart, x, FrameField::H) / p.rho, frame_field(m, p.chart, x, FrameField::V) / p.rho};
}

double step_for(const PhasePoint& p, double rel) { return rel * std::min(1.0, p.rho); }

double pullback_with(double s, const PhasePoint& p, const MapOptions& opt, double h, bool richardson) {
  if (!(p.rho > 0.0)) throw SingularityError("pullback needs rho > 0");
  const SurfaceModel m = round_sphere(opt.orientation);
  const PointMap F = [&](const PhasePoint& x) { return apply_Fs(s, x, opt); };
  const PhasePoint y = F(p);
  const double weight = 0.5 * y.rho * y.rho + s;
  const Vec4 tau_y = tau_covector(m, y);
  const Vec4 rhs = theta_covector(m, p) + s * tau_covector(m, p);
  double worst = 0.0;
  for (const Vec4& w : unit_frame(m, p)) {
    const Vec4 dw = derivative(m, F, p, w, h, y.chart, richardson);
    worst = std::max(worst, std::abs(weight * tau_y.dot(dw) - rhs.dot(w)));
  }
  return worst;
}

}  // namespace

MapCoefficients coefficients(double s, double rho) {
  if (s == 0.0) throw ConfigError("the map is undefined at s = 0");
  if (!(s > 0.0)) throw ConfigError("s must be positive");
  if (rho < 0.0) throw ConfigError("rho must be nonnegative");
  MapCoefficients k;
  k.c = std::hypot(rho, s);
  if (rho == 0.0) {
    k.a = 1.0 / std::sqrt(s);
    k.b = -1.0 / s;
    return k;
  }
  // sqrt(2(c - s)) = rho sqrt(2/(c + s)) avoids cancellation for small rho.
  k.a = std::sqrt(2.0 / (k.c + s));
  k.b = -std::atan(rho / s) / rho;
  return k;
}

double radial_coordinate(double s, double rho) { return std::sqrt((rho * rho + s * s) / (1.0 + s * s)); }

double closed_form_residual(double s, double rho) {
  const auto k = coefficients(s, rho);
  return std::max(std::abs(k.c * std::cos(k.b * rho) - s), std::abs(k.c * std::sin(k.b * rho) + rho));
}

SurfaceModel round_sphere(double orientation) {
  SurfaceModel m = SurfaceModel::sphere();
  m.set_orientation(orientation);
  return m;
}

PhasePoint geodesic_rotation(const SurfaceModel& m, const PhasePoint& p, double b, int steps) {
  if (steps < 1) throw ConfigError("need at least one step");
  if (b == 0.0 || p.rho == 0.0) return p;
  int chart = p.chart;
  ode::State<4> x = p.state();
  auto rhs = [&](double, const ode::State<4>& y) -> ode::State<4> { return -frame_field(m, chart, y, FrameField::H); };
  ode::integrate_fixed<4>(rhs, 0.0, x, b, steps, [&](double, const ode::State<4>&, double, ode::State<4>& y) {
    return settle4(m, chart, y) ? ode::StepAction::modified : ode::StepAction::proceed;
  });
  return make_phase_point(m, chart, x);
}

PhasePoint apply_Fs(double s, const PhasePoint& p, const MapOptions& opt) {
  const auto k = coefficients(s, p.rho);
  if (p.rho == 0.0) return p;
  const SurfaceModel m = round_sphere(opt.orientation);
  const PhasePoint r = geodesic_rotation(m, p, k.b, opt.steps);
  return make_phase_point(m, r.chart, r.q, k.a * r.v);
}

Inversion invert_Fs(double s, const PhasePoint& y, const MapOptions& opt, double tol, int max_iter) {
  const SurfaceModel m = round_sphere(opt.orientation);
  Inversion inv;
  if (y.rho == 0.0) {
    inv.x = y;
    return inv;
  }
  // rho'^2 = 2(c - s) gives c and then rho.
  const double c = 0.5 * y.rho * y.rho + s;
  const double rho = std::sqrt(std::max(c * c - s * s, 0.0));
  const PhasePoint scaled = make_phase_point(m, y.chart, y.q, (rho / y.rho) * y.v);
  const auto k = coefficients(s, rho);
  PhasePoint x = to_chart(m, geodesic_rotation(m, scaled, -k.b, opt.steps), y.chart);

  const PointMap F = [&](const PhasePoint& z) { return apply_Fs(s, z, opt); };
  const Vec4 target = y.state();
  for (inv.iterations = 0; inv.iterations < max_iter; ++inv.iterations) {
    const Vec4 g = eval_state(m, F, x.chart, x.state(), y.chart) - target;
    inv.residual = g.norm();
    if (inv.residual < tol) break;
    Mat4 J;
    const double h = 1e-6 * std::max(1.0, x.state().norm());
    for (int j = 0; j < 4; ++j) {
      Vec4 e = Vec4::Zero();
      e[j] = 1.0;
      J.col(j) = directional(m, F, x, e, h, y.chart);
    }
    const Vec4 dx = J.fullPivLu().solve(g);
    if (!dx.allFinite()) throw NumericalError("Newton inversion produced a non-finite step");
    x = make_phase_point(m, x.chart, Vec4(x.state() - dx));
  }
  inv.x = x;
  return inv;
}

double pullback_residual(double s, const PhasePoint& p, const MapOptions& opt) {
  return pullback_with(s, p, opt, step_for(p, opt.fd_step), opt.richardson);
}

double phi_pullback_residual(double b, const PhasePoint& p, const MapOptions& opt) {
  if (!(p.rho > 0.0)) throw SingularityError("pullback needs rho > 0");
  const SurfaceModel m = round_sphere(opt.orientation);
  const PointMap F = [&](const PhasePoint& x) { return geodesic_rotation(m, x, b, opt.steps); };
  const PhasePoint y = F(p);
  const double br = b * p.rho;
  const Vec4 tau_y = tau_covector(m, y);
  const Vec4 rhs = -std::sin(br) / p.rho * theta_covector(m, p) + std::cos(br) * tau_covector(m, p);
  double worst = 0.0;
  for (const Vec4& w : unit_frame(m, p)) {
    const Vec4 dw = derivative(m, F, p, w, step_for(p, opt.fd_step), y.chart, opt.richardson);
    worst = std::max(worst, std::abs(tau_y.dot(dw) - rhs.dot(w)));
  }
  return worst;
}

ConvergenceOrder pullback_convergence(double s, const PhasePoint& p, double h0, int levels, const MapOptions& opt) {
  if (levels < 2) throw ConfigError("convergence order needs at least two levels");
  ConvergenceOrder out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < levels; ++i) {
    const double h = h0 * std::ldexp(1.0, -i);
    const double r = pullback_with(s, p, opt, step_for(p, h), false);
    out.steps.push_back(h);
    out.residuals.push_back(r);
    const double lx = std::log(h), ly = std::log(std::max(r, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = levels;
  out.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

double liouville_radial_check(double s, const PhasePoint& p, double r, double orientation) {
  MagneticSystem sys;
  sys.surface = round_sphere(orientation);
  sys.f = ScalarField::make_constant(1.0);
  sys.s = s;
  const SurfaceModel& m = sys.surface;
  int chart = p.chart;
  ode::State<4> x = p.state();
  auto rhs = [&](double, const ode::State<4>& y) -> ode::State<4> {
    return liouville_field(sys, make_phase_point(m, chart, y));
  };
  ode::Options o;
  o.rtol = o.atol = 1e-13;
  ode::Stats st;
  ode::integrate<4>(rhs, 0.0, x, r, o, st, [&](double, const ode::State<4>&, double, ode::State<4>& y) {
    return settle4(m, chart, y) ? ode::StepAction::modified : ode::StepAction::proceed;
  });
  const PhasePoint e = make_phase_point(m, chart, x);
  return std::abs(radial_coordinate(s, e.rho) - radial_coordinate(s, p.rho) * std::exp(r));
}

double radial_drift(double s, const PhasePoint& p, double t, double orientation) {
  MagneticSystem sys;
  sys.surface = round_sphere(orientation);
  sys.f = ScalarField::make_constant(1.0);
  sys.s = s;
  const PhasePoint e = flow_to(sys, p, t, 1e-12);
  return std::abs(radial_coordinate(s, e.rho) - radial_coordinate(s, p.rho));
}

PhasePoint random_sphere_point(std::mt19937_64& rng, double rho_lo, double rho_hi, const SurfaceModel& m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ang(0.0, 2.0 * kPi), sp(rho_lo, rho_hi);
  const double h = u(rng), az = ang(rng), dir = ang(rng), rho = sp(rng);
  // |z|^2 = (1+h)/(1-h) for the chart whose unit disc contains the point.
  const int chart = h <= 0.0 ? 0 : 1;
  const double r = chart == 0 ? std::sqrt((1.0 + h) / (1.0 - h)) : std::sqrt((1.0 - h) / (1.0 + h));
  const Vec2 q(r * std::cos(az), r * std::sin(az));
  const double l = m.lambda(chart, q);
  return make_phase_point(m, chart, q, rho / l * Vec2(std::cos(dir), std::sin(dir)));
}

AppendixReport verify_appendix(double s, int samples, std::uint64_t seed, const MapOptions& opt) {
  if (samples < 1) throw ConfigError("need at least one sample");
  coefficients(s, 1.0);
  const SurfaceModel m = round_sphere(opt.orientation);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(-1.0, 1.0);
  struct Draw {
    PhasePoint p;
    double b;
  };
  std::vector<Draw> draws(std::size_t(samples) * 2);  // spares for resampling
  for (auto& d : draws) {
    d.p = random_sphere_point(rng, 0.1, 5.0, m);
    d.b = ub(rng);
  }

  struct Row {
    double pull = 0, phi = 0, closed = 0, speed = 0, inverse = 0;
    bool ok = false;
  };
  std::vector<Row> rows(draws.size());
  auto evaluate = [&](std::size_t i) {
    Row r;
    const auto& d = draws[i];
    try {
      r.pull = pullback_residual(s, d.p, opt);
      r.phi = phi_pullback_residual(d.b, d.p, opt);
      r.closed = closed_form_residual(s, d.p.rho);
      const PhasePoint y = apply_Fs(s, d.p, opt);
      r.speed = std::abs(y.rho - std::sqrt(2.0 * (std::hypot(d.p.rho, s) - s)));
      const auto inv = invert_Fs(s, y, opt);
      r.inverse = (to_chart(m, inv.x, d.p.chart).state() - d.p.state()).norm();
      r.ok = std::isfinite(r.pull) && std::isfinite(r.phi);
    } catch (const NumericalError&) {
      r.ok = false;
    } catch (const DomainError&) {
      r.ok = false;
    }
    rows[i] = r;
  };
  parallel_for(std::size_t(samples), evaluate);

  AppendixReport rep;
  rep.s = s;
  std::size_t spare = std::size_t(samples);
  for (std::size_t i = 0; i < std::size_t(samples); ++i) {
    std::size_t k = i;
    while (!rows[k].ok) {
      if (spare >= draws.size()) throw NumericalError("too many samples failed the conditioning check");
      ++rep.resampled;
      k = spare++;
      evaluate(k);
    }
    const Row& r = rows[k];
    rep.max_pullback = std::max(rep.max_pullback, r.pull);
    rep.max_phi_pullback = std::max(rep.max_phi_pullback, r.phi);
    rep.max_closed_form = std::max(rep.max_closed_form, r.closed);
    rep.max_speed_law = std::max(rep.max_speed_law, r.speed);
    rep.max_inverse = std::max(rep.max_inverse, r.inverse);
    ++rep.samples;
  }

  // The flow checks are costlier; a handful of points on the unit bundle.
  const int n_flow = std::min(samples, 8);
  for (int i = 0; i < n_flow; ++i) {
    const PhasePoint& p = draws[i].p;
    const PhasePoint unit = make_phase_point(m, p.chart, p.q, p.v / p.rho);
    rep.max_liouville = std::max(rep.max_liouville, liouville_radial_check(s, unit, 0.5, opt.orientation));
    rep.max_radial_drift = std::max(rep.max_radial_drift, radial_drift(s, unit, 5.0, opt.orientation));
  }
  PhasePoint base = draws[0].p;
  base = make_phase_point(m, base.chart, base.q, base.v * (1.0 / base.rho));
  rep.convergence_order = pullback_convergence(s, base, 0.08, 4, opt).order;
  return rep;
}

}  // namespace magnetolab
