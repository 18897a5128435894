#include "magnetolab/geometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace magnetolab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSwitchRadius = 1.5;
constexpr double kSphereChartLimit = 1e6;

using cplx = std::complex<double>;

Mat2 complex_matrix(cplx c) {
  Mat2 m;
  m << c.real(), -c.imag(), c.imag(), c.real();
  return m;
}

Vec2 to_vec(cplx c) { return {c.real(), c.imag()}; }
cplx to_cplx(const Vec2& v) { return {v.x(), v.y()}; }
}  // namespace

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::flat_torus: return "flat-torus";
    case SurfaceKind::conformal_torus: return "conformal-torus";
    case SurfaceKind::halfplane: return "hyperbolic-halfplane";
  }
  return "?";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "sphere") return SurfaceKind::sphere;
  if (s == "flat-torus") return SurfaceKind::flat_torus;
  if (s == "conformal-torus") return SurfaceKind::conformal_torus;
  if (s == "hyperbolic-halfplane") return SurfaceKind::halfplane;
  throw ConfigError("unknown surface kind '" + s + "'");
}

SurfaceModel SurfaceModel::sphere() {
  SurfaceModel m;
  m.kind_ = SurfaceKind::sphere;
  return m;
}

SurfaceModel SurfaceModel::flat_torus() {
  SurfaceModel m;
  m.kind_ = SurfaceKind::flat_torus;
  return m;
}

SurfaceModel SurfaceModel::conformal_torus(double amplitude) {
  SurfaceModel m;
  m.kind_ = SurfaceKind::conformal_torus;
  m.amplitude_ = amplitude;
  return m;
}

SurfaceModel SurfaceModel::halfplane() {
  SurfaceModel m;
  m.kind_ = SurfaceKind::halfplane;
  return m;
}

void SurfaceModel::set_orientation(double o) {
  if (o != 1.0 && o != -1.0) throw ConfigError("orientation must be +1 or -1");
  orientation_ = o;
}

ConformalJet SurfaceModel::log_factor(int chart, const Vec2& q) const {
  ConformalJet j;
  switch (kind_) {
    case SurfaceKind::sphere: {
      (void)chart;
      const double d = 1.0 + q.squaredNorm();
      j.phi = std::log(2.0 / d);
      j.grad = -2.0 * q / d;
      j.hess = -2.0 / d * Mat2::Identity() + 4.0 / (d * d) * q * q.transpose();
      break;
    }
    case SurfaceKind::flat_torus:
      break;
    case SurfaceKind::conformal_torus: {
      const double cx = std::cos(2 * kPi * q.x()), cy = std::cos(2 * kPi * q.y());
      const double sx = std::sin(2 * kPi * q.x()), sy = std::sin(2 * kPi * q.y());
      j.phi = amplitude_ * (cx + cy);
      j.grad = -2 * kPi * amplitude_ * Vec2(sx, sy);
      j.hess(0, 0) = -4 * kPi * kPi * amplitude_ * cx;
      j.hess(1, 1) = -4 * kPi * kPi * amplitude_ * cy;
      break;
    }
    case SurfaceKind::halfplane: {
      const double y = q.y();
      j.phi = -std::log(y);
      j.grad = Vec2(0.0, -1.0 / y);
      j.hess(1, 1) = 1.0 / (y * y);
      break;
    }
  }
  return j;
}

double SurfaceModel::lambda(int chart, const Vec2& q) const {
  switch (kind_) {
    case SurfaceKind::sphere: return 2.0 / (1.0 + q.squaredNorm());
    case SurfaceKind::flat_torus: return 1.0;
    case SurfaceKind::halfplane: return 1.0 / q.y();
    default: return std::exp(log_factor(chart, q).phi);
  }
}

double SurfaceModel::curvature(int chart, const Vec2& q) const {
  switch (kind_) {
    case SurfaceKind::sphere: return 1.0;
    case SurfaceKind::flat_torus: return 0.0;
    case SurfaceKind::halfplane: return -1.0;
    default: {
      const auto j = log_factor(chart, q);
      return -std::exp(-2.0 * j.phi) * j.hess.trace();
    }
  }
}

Vec2 SurfaceModel::christoffel(int chart, const Vec2& q, const Vec2& u, const Vec2& w) const {
  if (kind_ == SurfaceKind::flat_torus) return Vec2::Zero();
  const Vec2 g = log_factor(chart, q).grad;
  return u * w.dot(g) + w * u.dot(g) - u.dot(w) * g;
}

double SurfaceModel::inner(int chart, const Vec2& q, const Vec2& u, const Vec2& w) const {
  const double l = lambda(chart, q);
  return l * l * u.dot(w);
}

double SurfaceModel::norm(int chart, const Vec2& q, const Vec2& u) const {
  return lambda(chart, q) * u.norm();
}

int SurfaceModel::euler_characteristic() const {
  switch (kind_) {
    case SurfaceKind::sphere: return 2;
    case SurfaceKind::flat_torus:
    case SurfaceKind::conformal_torus: return 0;
    case SurfaceKind::halfplane: break;
  }
  throw ConfigError("the half-plane model has no Euler characteristic");
}

void SurfaceModel::check_domain(int chart, const Vec2& q) const {
  if (!q.allFinite()) throw DomainError("non-finite base point");
  if (chart < 0 || chart >= chart_count()) throw DomainError("invalid chart id");
  if (kind_ == SurfaceKind::halfplane && !(q.y() > 0.0))
    throw DomainError("point left the half-plane (y <= 0)");
  if (kind_ == SurfaceKind::sphere && q.norm() > kSphereChartLimit)
    throw DomainError("point too far out in a stereographic chart");
}

bool SurfaceModel::wants_switch(int chart, const Vec2& q) const {
  (void)chart;
  return kind_ == SurfaceKind::sphere && q.squaredNorm() > kSwitchRadius * kSwitchRadius;
}

void SurfaceModel::transition(int from, const Vec2& q, const Vec2& v, Vec2& q_out, Vec2& v_out) const {
  (void)from;
  if (kind_ != SurfaceKind::sphere) {
    q_out = q;
    v_out = v;
    return;
  }
  const cplx z = to_cplx(q);
  if (std::abs(z) == 0.0) throw DomainError("chart transition at the pole");
  q_out = to_vec(1.0 / z);
  v_out = to_vec(-to_cplx(v) / (z * z));
}

Mat4 SurfaceModel::transition_jacobian(int from, const Vec2& q, const Vec2& v) const {
  (void)from;
  if (kind_ != SurfaceKind::sphere) return Mat4::Identity();
  const cplx z = to_cplx(q);
  const cplx c1 = -1.0 / (z * z);
  const cplx c2 = 2.0 * to_cplx(v) / (z * z * z);
  Mat4 j = Mat4::Zero();
  j.block<2, 2>(0, 0) = complex_matrix(c1);
  j.block<2, 2>(2, 0) = complex_matrix(c2);
  j.block<2, 2>(2, 2) = complex_matrix(c1);
  return j;
}

Vec4 PhasePoint::state() const {
  Vec4 x;
  x << q, v;
  return x;
}

PhasePoint make_phase_point(const SurfaceModel& m, int chart, const Vec2& q, const Vec2& v) {
  m.check_domain(chart, q);
  PhasePoint p;
  p.chart = chart;
  p.q = q;
  p.v = v;
  p.rho = m.norm(chart, q, v);
  return p;
}

PhasePoint make_phase_point(const SurfaceModel& m, int chart, const Vec4& x) {
  return make_phase_point(m, chart, Vec2(x[0], x[1]), Vec2(x[2], x[3]));
}

PhasePoint to_chart(const SurfaceModel& m, const PhasePoint& p, int chart) {
  if (p.chart == chart || m.chart_count() == 1) return p;
  Vec2 q, v;
  m.transition(p.chart, p.q, p.v, q, v);
  return make_phase_point(m, chart, q, v);
}

PhasePoint normalize_chart(const SurfaceModel& m, const PhasePoint& p) {
  if (!m.wants_switch(p.chart, p.q)) return p;
  return to_chart(m, p, 1 - p.chart);
}

PhasePoint unit_point(const SurfaceModel& m, int chart, const Vec2& q, double theta) {
  const double l = m.lambda(chart, q);
  return make_phase_point(m, chart, q, Vec2(std::cos(theta), std::sin(theta)) / l);
}

double MagneticSystem::density(int chart, const Vec2& q) const {
  (void)chart;
  return f.value(q);
}

Vec2 MagneticSystem::density_gradient(int chart, const Vec2& q) const {
  (void)chart;
  return f.gradient(q);
}

Vec2 MagneticSystem::beta_at(int chart, const Vec2& q) const {
  (void)chart;
  if (!beta) throw ConfigError("this computation needs a primitive beta");
  return beta->value(q);
}

double MagneticSystem::nu(int chart, const Vec2& q, const Vec2& v) const {
  if (!surface.is_torus()) throw ConfigError("nu is only defined for torus models");
  const Vec2 g = surface.log_factor(chart, q).grad;
  return surface.orientation() * (v.y() * g.x() - v.x() * g.y());
}

void MagneticSystem::validate() const {
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("strength s must be finite and >= 0");
  if (!std::isfinite(a)) throw ConfigError("contact parameter a must be finite");
  if (surface.kind() == SurfaceKind::sphere) {
    if (f.kind != ScalarField::Kind::constant)
      throw ConfigError("sphere models support only a constant density");
    if (beta && (beta->kind != OneForm::Kind::zero || beta->has_gauge()))
      throw ConfigError("sphere models support only the zero primitive");
  }
  if (!surface.is_torus()) {
    if (f.kind == ScalarField::Kind::fourier || f.kind == ScalarField::Kind::radial_bump ||
        f.kind == ScalarField::Kind::ql_density)
      throw ConfigError("periodic densities need a torus surface");
    if (beta && beta->kind != OneForm::Kind::zero)
      throw ConfigError("non-zero primitives need a torus surface");
  }
  if (beta && beta->kind == OneForm::Kind::poisson && !beta->density.zero_mean())
    throw NotExactError("poisson primitive needs a zero-mean density");
}

Vec2 lorentz_force(const MagneticSystem& sys, const PhasePoint& p) {
  sys.surface.check_domain(p.chart, p.q);
  return sys.density(p.chart, p.q) * sys.surface.rotate(p.v);
}

Vec4 ode_rhs(const MagneticSystem& sys, int chart, const Vec4& x) {
  const Vec2 q = x.head<2>(), v = x.tail<2>();
  Vec4 out;
  out.head<2>() = v;
  out.tail<2>() = -sys.surface.christoffel(chart, q, v, v) +
                  sys.s * sys.density(chart, q) * sys.surface.rotate(v);
  return out;
}

Vec4 ode_rhs(const MagneticSystem& sys, const PhasePoint& p) { return ode_rhs(sys, p.chart, p.state()); }

Mat4 ode_jacobian(const MagneticSystem& sys, int chart, const Vec4& x) {
  const Vec2 q = x.head<2>(), v = x.tail<2>();
  Mat4 j = Mat4::Zero();
  j.block<2, 2>(0, 2) = Mat2::Identity();
  const auto cj = sys.surface.log_factor(chart, q);
  const double vg = v.dot(cj.grad);
  const double v2 = v.squaredNorm();
  Mat2 dv = 2.0 * vg * Mat2::Identity() + 2.0 * v * cj.grad.transpose() - 2.0 * cj.grad * v.transpose();
  Mat2 dq = 2.0 * v * (cj.hess * v).transpose() - v2 * cj.hess;
  const double o = sys.surface.orientation();
  Mat2 rot;
  rot << 0, -o, o, 0;
  const double fq = sys.density(chart, q);
  const Vec2 gf = sys.density_gradient(chart, q);
  j.block<2, 2>(2, 0) = -dq + sys.s * (rot * v) * gf.transpose();
  j.block<2, 2>(2, 2) = -dv + sys.s * fq * rot;
  return j;
}

Vec4 frame_field(const SurfaceModel& m, int chart, const Vec4& x, FrameField which) {
  const Vec2 q = x.head<2>(), v = x.tail<2>();
  const Vec2 jv = m.rotate(v);
  Vec4 out;
  switch (which) {
    case FrameField::X:
      out << v, -m.christoffel(chart, q, v, v);
      break;
    case FrameField::Y:
      out << Vec2::Zero(), v;
      break;
    case FrameField::H:
      out << jv, -m.christoffel(chart, q, jv, v);
      break;
    case FrameField::V:
      out << Vec2::Zero(), jv;
      break;
  }
  return out;
}

Vec4 frame_field(const MagneticSystem& sys, const PhasePoint& p, FrameField which) {
  return frame_field(sys.surface, p.chart, p.state(), which);
}

Coframe coframe_eval(const MagneticSystem& sys, const PhasePoint& p, const Vec4& w) {
  const auto& m = sys.surface;
  m.check_domain(p.chart, p.q);
  if (!(p.rho > 0.0)) throw SingularityError("coframe undefined on the zero section");
  const Vec2 dq = w.head<2>();
  const Vec2 k = w.tail<2>() + m.christoffel(p.chart, p.q, dq, p.v);
  const Vec2 jv = m.rotate(p.v);
  Coframe c;
  c.theta = m.inner(p.chart, p.q, p.v, dq);
  c.drho = m.inner(p.chart, p.q, p.v, k) / p.rho;
  c.eta = m.inner(p.chart, p.q, jv, dq);
  c.tau = m.inner(p.chart, p.q, k, jv) / (p.rho * p.rho);
  return c;
}

Vec4 theta_covector(const SurfaceModel& m, const PhasePoint& p) {
  const double l = m.lambda(p.chart, p.q);
  Vec4 c;
  c << l * l * p.v, Vec2::Zero();
  return c;
}

Vec4 tau_covector(const SurfaceModel& m, const PhasePoint& p) {
  if (!(p.rho > 0.0)) throw SingularityError("tau undefined on the zero section");
  const double l = m.lambda(p.chart, p.q);
  const Vec2 jv = m.rotate(p.v);
  const double scale = l * l / (p.rho * p.rho);
  Vec4 c;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e[i] = 1.0;
    c[i] = scale * m.christoffel(p.chart, p.q, e, p.v).dot(jv);
  }
  c.tail<2>() = scale * jv;
  return c;
}

Vec4 bracket_expected(const MagneticSystem& sys, const PhasePoint& p, FrameField a, FrameField b) {
  using F = FrameField;
  auto fr = [&](F w) { return frame_field(sys, p, w); };
  if (a == b) return Vec4::Zero();
  auto table = [&](F x, F y, Vec4& out) {
    if (x == F::Y && y == F::X) { out = fr(F::X); return true; }
    if (x == F::Y && y == F::H) { out = fr(F::H); return true; }
    if (x == F::Y && y == F::V) { out = Vec4::Zero(); return true; }
    if (x == F::V && y == F::X) { out = fr(F::H); return true; }
    if (x == F::H && y == F::V) { out = fr(F::X); return true; }
    if (x == F::X && y == F::H) {
      out = p.rho * p.rho * sys.surface.curvature(p.chart, p.q) * fr(F::V);
      return true;
    }
    return false;
  };
  Vec4 out;
  if (table(a, b, out)) return out;
  if (table(b, a, out)) return -out;
  return Vec4::Zero();
}

double bracket_check(const MagneticSystem& sys, const PhasePoint& p, FrameField a, FrameField b, double step) {
  if (!(p.rho > 0.0)) throw SingularityError("frame undefined on the zero section");
  const auto& m = sys.surface;
  const Vec4 x = p.state();
  const Vec4 fa = frame_field(m, p.chart, x, a);
  const Vec4 fb = frame_field(m, p.chart, x, b);
  // [A, B] = DB.A - DA.B
  const Vec4 db_a = (frame_field(m, p.chart, x + step * fa, b) - frame_field(m, p.chart, x - step * fa, b)) / (2 * step);
  const Vec4 da_b = (frame_field(m, p.chart, x + step * fb, a) - frame_field(m, p.chart, x - step * fb, a)) / (2 * step);
  return (db_a - da_b - bracket_expected(sys, p, a, b)).cwiseAbs().maxCoeff();
}

Mat4 symplectic_matrix(const MagneticSystem& sys, int chart, const Vec4& x) {
  const auto& m = sys.surface;
  const Vec2 q = x.head<2>(), v = x.tail<2>();
  const auto cj = m.log_factor(chart, q);
  const double l2 = std::exp(2.0 * cj.phi);
  Mat4 w = Mat4::Zero();
  for (int j = 0; j < 2; ++j) {
    w(2 + j, j) = l2;
    w(j, 2 + j) = -l2;
  }
  // d(lambda^2) v_j dq_k ^ dq_j
  const Vec2 dl2 = 2.0 * l2 * cj.grad;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) {
      w(k, j) += dl2[k] * v[j];
      w(j, k) -= dl2[k] * v[j];
    }
  const double sig = sys.s * sys.density(chart, q) * l2 * m.orientation();
  w(0, 1) -= sig;
  w(1, 0) += sig;
  return w;
}

Mat4 symplectic_matrix(const MagneticSystem& sys, const PhasePoint& p) {
  return symplectic_matrix(sys, p.chart, p.state());
}

Vec4 liouville_field(const MagneticSystem& sys, const PhasePoint& p) {
  const Vec4 form = theta_covector(sys.surface, p) + sys.s * tau_covector(sys.surface, p);
  const Mat4 w = symplectic_matrix(sys, p);
  return w.transpose().fullPivLu().solve(form);
}

double total_flux(const MagneticSystem& sys, int n) {
  const auto& m = sys.surface;
  const double o = m.orientation();
  if (m.is_torus()) {
    double acc = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 q((i + 0.5) * h, (j + 0.5) * h);
        const double l = m.lambda(0, q);
        acc += sys.density(0, q) * l * l;
      }
    return o * acc * h * h;
  }
  if (m.kind() == SurfaceKind::sphere) {
    // Simpson in r over the unit disc of each chart, uniform rule in angle.
    const int nr = 2 * (n / 2);
    const int na = n;
    double acc = 0.0;
    for (int chart = 0; chart < 2; ++chart)
      for (int i = 0; i <= nr; ++i) {
        const double r = double(i) / nr;
        const double wr = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double ring = 0.0;
        for (int k = 0; k < na; ++k) {
          const double a = 2 * kPi * k / na;
          const Vec2 q(r * std::cos(a), r * std::sin(a));
          const double l = m.lambda(chart, q);
          ring += sys.density(chart, q) * l * l;
        }
        acc += wr * r * ring * (2 * kPi / na);
      }
    return o * acc / (3.0 * nr);
  }
  throw ConfigError("total flux is not defined on the half-plane model");
}

double primitive_residual(const MagneticSystem& sys, int n, double h) {
  if (!sys.beta) throw ConfigError("no primitive configured");
  const auto& m = sys.surface;
  Vec2 lo(0.0, 0.0), hi(1.0, 1.0);
  if (m.kind() == SurfaceKind::sphere) lo = Vec2(-1, -1), hi = Vec2(1, 1);
  if (m.kind() == SurfaceKind::halfplane) lo = Vec2(-1, 0.2), hi = Vec2(1, 5);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 q = lo + Vec2((i + 0.5) / n * (hi.x() - lo.x()), (j + 0.5) / n * (hi.y() - lo.y()));
      const Vec2 ex(h, 0), ey(0, h);
      const double d2 = (sys.beta_at(0, q + ex).y() - sys.beta_at(0, q - ex).y()) / (2 * h);
      const double d1 = (sys.beta_at(0, q + ey).x() - sys.beta_at(0, q - ey).x()) / (2 * h);
      const double l = m.lambda(0, q);
      double target = sys.density(0, q);
      if (sys.uses_normalized_primitive()) target -= m.curvature(0, q);
      target *= l * l * m.orientation();
      worst = std::max(worst, std::abs(d2 - d1 - target));
    }
  return worst;
}

}  // namespace magnetolab
