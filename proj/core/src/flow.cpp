#include "magnetolab/flow.hpp"

#include <algorithm>
#include <cmath>

namespace magnetolab {

namespace {

// Chart bookkeeping shared by the adaptive and fixed-step drivers.
struct ChartTracker {
  const MagneticSystem& sys;
  int chart;

  ode::StepAction settle(ode::State<4>& x) {
    const Vec2 q = x.head<2>();
    sys.surface.check_domain(chart, q);
    if (!sys.surface.wants_switch(chart, q)) return ode::StepAction::proceed;
    Vec2 q2, v2;
    sys.surface.transition(chart, q, x.tail<2>(), q2, v2);
    chart = 1 - chart;
    x << q2, v2;
    return ode::StepAction::modified;
  }
};

}  // namespace

Trajectory integrate(const MagneticSystem& sys, const PhasePoint& p0, double t_end, double tol,
                     const FlowOptions& opt) {
  if (!(tol > 0.0)) throw ConfigError("integration tolerance must be positive");
  sys.surface.check_domain(p0.chart, p0.q);
  Trajectory tr;
  tr.samples.push_back({0.0, p0});
  if (t_end == 0.0) return tr;

  ChartTracker ct{sys, p0.chart};
  ode::State<4> y = p0.state();
  auto rhs = [&](double, const ode::State<4>& x) { return ode_rhs(sys, ct.chart, x); };
  ode::Options o;
  // The controller runs a decade below the requested accuracy so the global
  // speed drift over long runs stays within tol.
  o.rtol = o.atol = 0.1 * tol;
  o.max_step = opt.max_step;
  ode::integrate<4>(rhs, 0.0, y, t_end, o, tr.stats,
                    [&](double, const ode::State<4>&, double t, ode::State<4>& x) {
                      const auto act = ct.settle(x);
                      if (opt.record) tr.samples.push_back({t, make_phase_point(sys.surface, ct.chart, x)});
                      return act;
                    });
  if (!opt.record) tr.samples.push_back({t_end, make_phase_point(sys.surface, ct.chart, y)});
  return tr;
}

PhasePoint flow_to(const MagneticSystem& sys, const PhasePoint& p0, double t, double tol, double max_step) {
  FlowOptions opt;
  opt.record = false;
  opt.max_step = max_step;
  return integrate(sys, p0, t, tol, opt).back();
}

PhasePoint flow_fixed(const MagneticSystem& sys, const PhasePoint& p0, double t, int n) {
  ChartTracker ct{sys, p0.chart};
  ode::State<4> y = p0.state();
  auto rhs = [&](double, const ode::State<4>& x) { return ode_rhs(sys, ct.chart, x); };
  ode::integrate_fixed<4>(rhs, 0.0, y, t, n,
                          [&](double, const ode::State<4>&, double, ode::State<4>& x) { return ct.settle(x); });
  return make_phase_point(sys.surface, ct.chart, y);
}

double speed_drift(const Trajectory& traj) {
  const double r0 = traj.samples.front().p.rho;
  double worst = 0.0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.p.rho - r0) / r0);
  return worst;
}

std::vector<CurvatureSample> geodesic_curvature(const MagneticSystem& sys, const Trajectory& traj) {
  const auto& smp = traj.samples;
  const std::size_t n = smp.size();
  if (n < 5) throw ConfigError("geodesic curvature needs at least 5 samples");
  const auto& m = sys.surface;
  std::vector<CurvatureSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PhasePoint& pi = smp[i].p;
    if (!(pi.rho > 0.0)) throw SingularityError("curvature undefined at zero speed");
    // Equally spaced neighbours re-integrated from the sample, so the
    // stencil does not depend on the adaptive step sizes.
    const double h = 1e-5 / pi.rho;
    auto vel = [&](double dt) { return to_chart(m, flow_fixed(sys, pi, dt, 2), pi.chart).v; };
    const Vec2 dv = (-vel(2 * h) + 8.0 * vel(h) - 8.0 * vel(-h) + vel(-2 * h)) / (12.0 * h);
    const Vec2 cov = dv + m.christoffel(pi.chart, pi.q, pi.v, pi.v);
    const double r = pi.rho;
    out[i].t = smp[i].t;
    out[i].kappa = m.inner(pi.chart, pi.q, cov, m.rotate(pi.v)) / (r * r * r);
    out[i].expected = sys.s * sys.density(pi.chart, pi.q) / r;
  }
  return out;
}

double closure_residual(const MagneticSystem& sys, const PhasePoint& x0, double period, double tol,
                        std::array<long, 2>* winding) {
  const PhasePoint end = to_chart(sys.surface, flow_to(sys, x0, period, tol), x0.chart);
  Vec2 dq = end.q - x0.q;
  std::array<long, 2> w{0, 0};
  if (sys.surface.is_torus()) {
    w = {std::lround(dq.x()), std::lround(dq.y())};
    dq -= Vec2(double(w[0]), double(w[1]));
  }
  if (winding) *winding = w;
  Vec4 d;
  d << dq, end.v - x0.v;
  return d.norm();
}

ClosedOrbit make_closed_orbit(const MagneticSystem& sys, const PhasePoint& x0, double period, double tol) {
  ClosedOrbit o;
  o.x0 = x0;
  o.period = period;
  o.residual = closure_residual(sys, x0, period, tol, &o.winding);
  if (sys.surface.is_torus())
    o.homotopy = (o.winding[0] == 0 && o.winding[1] == 0) ? "contractible" : "winding";
  else if (sys.surface.kind() == SurfaceKind::sphere)
    o.homotopy = "contractible";
  else
    o.homotopy = "closed";
  o.theta = std::atan2(x0.v.y(), x0.v.x());
  return o;
}

CircleFit fit_circle(const std::vector<Vec2>& pts) {
  if (pts.size() < 3) throw ConfigError("circle fit needs at least three points");
  // Centered coordinates keep the normal equations well conditioned.
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - mean;
    A(i, 0) = 2.0 * d.x();
    A(i, 1) = 2.0 * d.y();
    A(i, 2) = 1.0;
    b[i] = d.squaredNorm();
  }
  const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
  CircleFit c;
  c.center = mean + Vec2(x[0], x[1]);
  c.radius = std::sqrt(x[2] + x[0] * x[0] + x[1] * x[1]);
  for (const auto& p : pts) c.residual = std::max(c.residual, std::abs((p - c.center).norm() - c.radius));
  return c;
}

double boundary_angle(const CircleFit& c) {
  const double cosang = std::abs(c.center.y()) / c.radius;
  if (!(std::abs(cosang) < 1.0)) throw ConfigError("circle does not meet the boundary");
  return std::acos(cosang);
}

}  // namespace magnetolab
