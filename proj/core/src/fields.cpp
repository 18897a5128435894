#include "magnetolab/fields.hpp"

#include <cmath>
#include <numbers>

namespace magnetolab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Potential u with Laplacian equal to `sign * density`; density must be zero mean.
FourierSeries poisson_potential(const FourierSeries& density, double sign) {
  FourierSeries u;
  for (const auto& t : density.terms) {
    const double k2 = double(t.kx * t.kx + t.ky * t.ky);
    if (k2 == 0.0) continue;
    const double c = -sign / (kTwoPi * kTwoPi * k2);
    u.terms.push_back({t.kx, t.ky, c * t.a, c * t.b});
  }
  return u;
}
}  // namespace

double FourierSeries::value(const Vec2& q) const {
  double s = c0;
  for (const auto& t : terms) {
    const double ph = kTwoPi * (t.kx * q.x() + t.ky * q.y());
    s += t.a * std::cos(ph) + t.b * std::sin(ph);
  }
  return s;
}

Vec2 FourierSeries::gradient(const Vec2& q) const {
  Vec2 g = Vec2::Zero();
  for (const auto& t : terms) {
    const double ph = kTwoPi * (t.kx * q.x() + t.ky * q.y());
    const double d = kTwoPi * (-t.a * std::sin(ph) + t.b * std::cos(ph));
    g += d * Vec2(t.kx, t.ky);
  }
  return g;
}

Mat2 FourierSeries::hessian(const Vec2& q) const {
  Mat2 h = Mat2::Zero();
  for (const auto& t : terms) {
    const double ph = kTwoPi * (t.kx * q.x() + t.ky * q.y());
    const double d = -kTwoPi * kTwoPi * (t.a * std::cos(ph) + t.b * std::sin(ph));
    const Vec2 k(t.kx, t.ky);
    h += d * k * k.transpose();
  }
  return h;
}

bool FourierSeries::zero_mean() const {
  if (c0 != 0.0) return false;
  for (const auto& t : terms)
    if (t.kx == 0 && t.ky == 0 && t.a != 0.0) return false;
  return true;
}

BumpProfile::Jet BumpProfile::eval(double r) const {
  Jet j;
  const double u = (r - r0) / width;
  if (std::abs(u) >= 1.0) return j;
  const double m = 1.0 - u * u;
  const double p = sharpness;
  double P = 0, P1 = 0, P2 = 0;
  if (shape == Shape::exponential) {
    P = p * u * u / m;
    P1 = 2.0 * p * u / (m * m);
    P2 = 2.0 * p * (1.0 + 3.0 * u * u) / (m * m * m);
  } else {
    const double k = shoulder_scale, c = shoulder, q = edge;
    const double s = std::sqrt(u * u + k * k);
    const double u2 = u * u, u3 = u2 * u;
    P = p * u2 + c * (s + k * k / s - 2.0 * k) + q * u2 * u2 / (m * m);
    P1 = 2.0 * p * u + c * u3 / (s * s * s) + 4.0 * q * u3 / (m * m * m);
    P2 = 2.0 * p + 3.0 * c * u2 * k * k / std::pow(s, 5) + 12.0 * q * u2 * (1.0 + u2) / std::pow(m, 4);
  }
  if (P > 700.0) return j;
  const double b = std::exp(-P);
  j.b = b;
  j.db = -P1 * b / width;
  j.d2b = (P1 * P1 - P2) * b / (width * width);
  return j;
}

Vec2 torus_displacement(const Vec2& q, const Vec2& c) {
  Vec2 d = q - c;
  for (int i = 0; i < 2; ++i) d[i] -= std::floor(d[i] + 0.5);
  return d;
}

ScalarField ScalarField::make_constant(double c) {
  ScalarField f;
  f.kind = Kind::constant;
  f.constant = c;
  return f;
}

double ScalarField::value(const Vec2& q) const {
  switch (kind) {
    case Kind::constant:
      return constant;
    case Kind::fourier:
      return fourier.value(q);
    case Kind::radial_bump: {
      const double r = torus_displacement(q, center).norm();
      return constant + amplitude * profile.eval(r).b;
    }
    case Kind::ql_density: {
      const double r = torus_displacement(q, center).norm();
      if (r < 1e-300) return 0.0;
      const auto j = profile.eval(r);
      return orientation * (j.db + j.b / r);
    }
  }
  return 0.0;
}

Vec2 ScalarField::gradient(const Vec2& q) const {
  switch (kind) {
    case Kind::constant:
      return Vec2::Zero();
    case Kind::fourier:
      return fourier.gradient(q);
    case Kind::radial_bump: {
      const Vec2 d = torus_displacement(q, center);
      const double r = d.norm();
      if (r < 1e-300) return Vec2::Zero();
      return amplitude * profile.eval(r).db / r * d;
    }
    case Kind::ql_density: {
      const Vec2 d = torus_displacement(q, center);
      const double r = d.norm();
      if (r < 1e-300) return Vec2::Zero();
      const auto j = profile.eval(r);
      const double df = j.d2b + j.db / r - j.b / (r * r);
      return orientation * df / r * d;
    }
  }
  return Vec2::Zero();
}

Vec2 OneForm::value(const Vec2& q) const {
  Vec2 out = Vec2::Zero();
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::constant:
      out = constant;
      break;
    case Kind::ql: {
      const Vec2 d = torus_displacement(q, center);
      const double r = d.norm();
      if (r > 1e-300) {
        const double h = profile.eval(r).b / r;
        out = Vec2(-h * d.y(), h * d.x());
      }
      break;
    }
    case Kind::poisson: {
      const Vec2 g = poisson_potential(density, orientation).gradient(q);
      out = Vec2(-g.y(), g.x());
      break;
    }
  }
  if (has_gauge()) out += gauge.gradient(q);
  return out;
}

Mat2 OneForm::jacobian(const Vec2& q) const {
  Mat2 jac = Mat2::Zero();
  switch (kind) {
    case Kind::zero:
    case Kind::constant:
      break;
    case Kind::ql: {
      const Vec2 d = torus_displacement(q, center);
      const double r = d.norm();
      if (r > 1e-300) {
        const auto j = profile.eval(r);
        const double h = j.b / r;
        const double dh = j.db / r - j.b / (r * r);
        jac(0, 0) = -dh * d.x() / r * d.y();
        jac(0, 1) = -dh * d.y() / r * d.y() - h;
        jac(1, 0) = dh * d.x() / r * d.x() + h;
        jac(1, 1) = dh * d.x() * d.y() / r;
      }
      break;
    }
    case Kind::poisson: {
      const Mat2 h = poisson_potential(density, orientation).hessian(q);
      jac.row(0) = -h.row(1);
      jac.row(1) = h.row(0);
      break;
    }
  }
  if (has_gauge()) jac += gauge.hessian(q);
  return jac;
}

double OneForm::curl(const Vec2& q) const {
  const Mat2 j = jacobian(q);
  return j(1, 0) - j(0, 1);
}

}  // namespace magnetolab
