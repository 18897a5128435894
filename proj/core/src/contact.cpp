#include "magnetolab/contact.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "magnetolab/parallel.hpp"

namespace magnetolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec4 lift(const Vec2& c) {
  Vec4 out;
  out << c, 0.0, 0.0;
  return out;
}

// nu as a covector on dq (torus only).
Vec2 nu_components(const MagneticSystem& sys, int chart, const Vec2& q) {
  return Vec2(sys.nu(chart, q, Vec2(1, 0)), sys.nu(chart, q, Vec2(0, 1)));
}

// Fibre data at q: alpha(X + sW) on unit vectors is c(q) - l(v).
struct FibreForm {
  double c = 0.0;
  Vec2 l = Vec2::Zero();
  double lambda = 1.0;
  double min() const { return c - l.norm() / lambda; }
  double argmin_angle() const { return l.squaredNorm() > 0.0 ? std::atan2(l.y(), l.x()) : 0.0; }
};

FibreForm fibre_form(const MagneticSystem& sys, double s, double a, int chart, const Vec2& q) {
  FibreForm ff;
  ff.lambda = sys.surface.lambda(chart, q);
  const double f = sys.density(chart, q);
  const Vec2 beta = sys.beta_at(chart, q);
  if (sys.surface.is_torus()) {
    ff.c = 1.0 + a * s * f;
    ff.l = s * beta + a * nu_components(sys, chart, q);
  } else {
    ff.c = 1.0 + s * s * f;
    ff.l = s * beta;
  }
  return ff;
}

struct LatticeResult {
  double min_value = kInf;
  double bound = kInf;
  double margin = 0.0;
  Vec2 argmin = Vec2::Zero();
};

// Lower bound for a function on a rectangle from its lattice values: each cell
// contributes (smallest corner) - 1.25 * (largest corner gradient) * (half diagonal).
LatticeResult lattice_bound(const std::function<double(const Vec2&)>& fn, const Vec2& lo, const Vec2& hi, int n,
                            bool periodic) {
  const int m = periodic ? n : n + 1;
  const Vec2 h((hi.x() - lo.x()) / n, (hi.y() - lo.y()) / n);
  const double fd = 1e-4 * std::min(h.x(), h.y());
  std::vector<double> val(std::size_t(m) * m), grad(std::size_t(m) * m);
  parallel_for(std::size_t(m), [&](std::size_t i) {
    for (int j = 0; j < m; ++j) {
      const Vec2 q = lo + Vec2(double(i) * h.x(), double(j) * h.y());
      const std::size_t k = i * m + j;
      val[k] = fn(q);
      const double gx = (fn(q + Vec2(fd, 0)) - fn(q - Vec2(fd, 0))) / (2 * fd);
      const double gy = (fn(q + Vec2(0, fd)) - fn(q - Vec2(0, fd))) / (2 * fd);
      grad[k] = std::hypot(gx, gy);
    }
  });
  LatticeResult r;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double v = val[std::size_t(i) * m + j];
      if (v < r.min_value) {
        r.min_value = v;
        r.argmin = lo + Vec2(i * h.x(), j * h.y());
      }
    }
  const double half_diag = 0.5 * h.norm();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double vmin = kInf, gmax = 0.0;
      for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj) {
          const int ii = (i + di) % m, jj = (j + dj) % m;
          const std::size_t k = std::size_t(ii) * m + jj;
          vmin = std::min(vmin, val[k]);
          gmax = std::max(gmax, grad[k]);
        }
      const double mg = 1.25 * gmax * half_diag;
      if (vmin - mg < r.bound) {
        r.bound = vmin - mg;
        r.margin = mg;
      }
    }
  return r;
}

// Plain Nelder-Mead in two variables.
Vec2 nelder_mead(const std::function<double(const Vec2&)>& fn, const Vec2& x0, double scale, int iters) {
  std::array<Vec2, 3> x{x0, x0 + Vec2(scale, 0), x0 + Vec2(0, scale)};
  std::array<double, 3> f{fn(x[0]), fn(x[1]), fn(x[2])};
  for (int it = 0; it < iters; ++it) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
    const int b = idx[0], m = idx[1], w = idx[2];
    if ((x[w] - x[b]).norm() < 1e-15) break;
    const Vec2 c = 0.5 * (x[b] + x[m]);
    const Vec2 xr = c + (c - x[w]);
    const double fr = fn(xr);
    if (fr < f[b]) {
      const Vec2 xe = c + 2.0 * (c - x[w]);
      const double fe = fn(xe);
      if (fe < fr) {
        x[w] = xe;
        f[w] = fe;
      } else {
        x[w] = xr;
        f[w] = fr;
      }
    } else if (fr < f[m]) {
      x[w] = xr;
      f[w] = fr;
    } else {
      const Vec2 xc = fr < f[w] ? Vec2(c + 0.5 * (xr - c)) : Vec2(c + 0.5 * (x[w] - c));
      const double fc = fn(xc);
      if (fc < std::min(fr, f[w])) {
        x[w] = xc;
        f[w] = fc;
      } else {
        for (int k : {m, w}) {
          x[k] = x[b] + 0.5 * (x[k] - x[b]);
          f[k] = fn(x[k]);
        }
      }
    }
  }
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (f[k] < f[best]) best = k;
  return x[best];
}

struct ChartBox {
  int chart;
  Vec2 lo, hi;
  bool periodic;
};

std::vector<ChartBox> cover(const MagneticSystem& sys, const CertifyGrid& grid) {
  switch (sys.surface.kind()) {
    case SurfaceKind::sphere:
      return {{0, Vec2(-1, -1), Vec2(1, 1), false}, {1, Vec2(-1, -1), Vec2(1, 1), false}};
    case SurfaceKind::halfplane:
      return {{0, grid.box_lo, grid.box_hi, false}};
    default:
      return {{0, Vec2(0, 0), Vec2(1, 1), true}};
  }
}

}  // namespace

std::optional<Vec4> contact_form(const MagneticSystem& sys, double s, double a, const PhasePoint& p) {
  if (!sys.beta) return std::nullopt;
  const auto& m = sys.surface;
  Vec4 alpha = theta_covector(m, p) - s * lift(sys.beta_at(p.chart, p.q));
  if (m.is_torus())
    alpha += a * (tau_covector(m, p) - lift(nu_components(sys, p.chart, p.q)));
  else
    alpha += s * tau_covector(m, p);
  return alpha;
}

double contact_value(const MagneticSystem& sys, double s, double a, const PhasePoint& p) {
  const auto alpha = contact_form(sys, s, a, p);
  if (!alpha) throw ConfigError("contact value needs a primitive beta");
  Vec4 field = frame_field(sys.surface, p.chart, p.state(), FrameField::X);
  field.tail<2>() += s * sys.density(p.chart, p.q) * sys.surface.rotate(p.v);
  return alpha->dot(field);
}

ContactCertificate certify(const MagneticSystem& sys, double s, double a, const CertifyGrid& grid) {
  if (!sys.beta) throw ConfigError("certification needs a primitive beta");
  if (grid.n < 16 || grid.n_angle < 16) throw ConfigError("certification grid must be at least 16^3");
  ContactCertificate cert;
  cert.surface = to_string(sys.surface.kind());
  cert.s = s;
  cert.a = a;
  cert.grid_n = grid.n;
  cert.grid_angle = grid.n_angle;
  cert.min_value = kInf;
  cert.bound = kInf;
  for (const auto& box : cover(sys, grid)) {
    auto m = [&](const Vec2& q) { return fibre_form(sys, s, a, box.chart, q).min(); };
    const auto r = lattice_bound(m, box.lo, box.hi, grid.n, box.periodic);
    if (r.bound < cert.bound) {
      cert.bound = r.bound;
      cert.margin = r.margin;
    }
    if (r.min_value < cert.min_value) {
      cert.min_value = r.min_value;
      cert.witness_chart = box.chart;
      cert.witness_q = r.argmin;
    }
  }
  cert.positive = cert.bound > 0.0;
  auto at = [&](const Vec2& q) {
    if (sys.surface.kind() == SurfaceKind::halfplane && !(q.y() > 1e-6)) return kInf;
    return fibre_form(sys, s, a, cert.witness_chart, q).min();
  };
  if (!cert.positive && grid.refine_witness) {
    const double h = 1.0 / grid.n;
    Vec2 q = cert.witness_q;
    for (int round = 0; round < 4; ++round) q = nelder_mead(at, q, h * std::pow(0.1, round), 400);
    if (at(q) < cert.min_value) cert.witness_q = q;
  }
  if (sys.surface.is_torus())
    cert.witness_q = Vec2(cert.witness_q.x() - std::floor(cert.witness_q.x()),
                          cert.witness_q.y() - std::floor(cert.witness_q.y()));
  const auto ff = fibre_form(sys, s, a, cert.witness_chart, cert.witness_q);
  cert.witness_value = ff.min();
  cert.witness_angle = ff.argmin_angle();
  return cert;
}

SBounds s_bounds(double norm_beta, double min_f) {
  if (!(norm_beta >= 0.0)) throw ConfigError("norm of beta must be non-negative");
  SBounds b;
  b.plus_applicable = min_f > 0.0;
  std::vector<double> roots;
  if (min_f == 0.0) {
    if (norm_beta > 0.0) roots.push_back(1.0 / norm_beta);
  } else {
    const double disc = norm_beta * norm_beta - 4.0 * min_f;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      roots.push_back((norm_beta - sq) / (2.0 * min_f));
      roots.push_back((norm_beta + sq) / (2.0 * min_f));
    }
  }
  for (double r : roots) {
    if (!(r > 0.0)) continue;
    b.s_minus = std::min(b.s_minus, r);
    b.s_plus = std::max(b.s_plus, r);
  }
  return b;
}

// ---------------------------------------------------------------------------
// r0

namespace {

std::vector<std::array<int, 2>> gauge_modes(int m) {
  // Half-plane of wave vectors ordered by |k|; one entry per +-k pair.
  std::vector<std::array<int, 2>> modes;
  const int K = int(std::ceil(std::sqrt(double(m)))) + 1;
  for (int kx = 0; kx <= K; ++kx)
    for (int ky = -K; ky <= K; ++ky)
      if (kx > 0 || ky > 0) modes.push_back({kx, ky});
  std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    return a[0] * a[0] + a[1] * a[1] < b[0] * b[0] + b[1] * b[1];
  });
  modes.resize(std::min<std::size_t>(modes.size(), std::size_t(m)));
  return modes;
}

double disc_flux(const MagneticSystem& sys, const Vec2& c, double R, int nr, int na) {
  // Simpson in r, uniform in angle; sigma = o f lambda^2 dx dy.
  const auto& m = sys.surface;
  nr = 2 * (nr / 2);
  double acc = 0.0;
  for (int i = 0; i <= nr; ++i) {
    const double r = R * i / nr;
    const double wr = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    double ring = 0.0;
    for (int k = 0; k < na; ++k) {
      const double a = 2 * kPi * k / na;
      const Vec2 q = c + r * Vec2(std::cos(a), std::sin(a));
      const double l = m.lambda(0, q);
      ring += sys.density(0, q) * l * l;
    }
    acc += wr * r * ring * (2 * kPi / na);
  }
  return m.orientation() * acc * R / (3.0 * nr);
}

double circle_length(const MagneticSystem& sys, const Vec2& c, double R, int na) {
  double acc = 0.0;
  for (int k = 0; k < na; ++k) {
    const double a = 2 * kPi * k / na;
    acc += sys.surface.lambda(0, c + R * Vec2(std::cos(a), std::sin(a)));
  }
  return acc * R * 2 * kPi / na;
}

}  // namespace

R0Estimate estimate_r0(const MagneticSystem& sys, const R0Options& opt) {
  if (!sys.surface.is_torus()) throw ConfigError("r0 is defined for torus models");
  if (opt.basis < 0 || opt.grid < 8 || opt.search_grid < 8) throw ConfigError("invalid r0 search parameters");
  // A configured primitive already witnesses exactness; otherwise check the flux.
  if (!sys.beta) {
    const double flux = total_flux(sys, 512);
    if (std::abs(flux) > 1e-8) throw NotExactError("sigma has total flux " + std::to_string(flux));
  }

  MagneticSystem base = sys;
  if (!base.beta) {
    OneForm b;
    if (sys.f.kind == ScalarField::Kind::fourier && sys.surface.kind() == SurfaceKind::flat_torus) {
      b.kind = OneForm::Kind::poisson;
      b.density = sys.f.fourier;
      b.orientation = sys.surface.orientation();
    } else if (sys.f.kind == ScalarField::Kind::constant && sys.f.constant == 0.0) {
      b.kind = OneForm::Kind::zero;
    } else {
      throw ConfigError("r0 estimate needs a primitive beta for this density");
    }
    base.beta = b;
  }
  base.beta->gauge.terms.clear();

  R0Estimate est;
  const auto& m = base.surface;
  auto norm_at = [&](const OneForm& b, const Vec2& q) { return b.value(q).norm() / m.lambda(0, q); };

  // Upper bound: smoothed minimax over the gauge coefficients.
  const int ns = opt.search_grid;
  const auto modes = gauge_modes(opt.basis);
  const std::size_t np = std::size_t(ns) * ns;
  std::vector<Vec2> b0(np), pts(np);
  std::vector<double> lam(np);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      const std::size_t k = std::size_t(i) * ns + j;
      pts[k] = Vec2((i + 0.5) / ns, (j + 0.5) / ns);
      b0[k] = base.beta->value(pts[k]);
      lam[k] = m.lambda(0, pts[k]);
    }
  // Gradient of each basis function (cos, sin per mode) at the search points.
  const int nc = 2 * int(modes.size());
  std::vector<std::vector<Vec2>> dphi(nc, std::vector<Vec2>(np));
  for (int c = 0; c < nc; ++c) {
    FourierSeries fs;
    const auto& md = modes[c / 2];
    fs.terms.push_back({md[0], md[1], c % 2 == 0 ? 1.0 : 0.0, c % 2 == 1 ? 1.0 : 0.0});
    for (std::size_t k = 0; k < np; ++k) dphi[c][k] = fs.gradient(pts[k]);
  }
  std::vector<double> coef(nc, 0.0);
  auto objective = [&](const std::vector<double>& cf, double temp) {
    double mx = 0.0;
    std::vector<double> vals(np);
    for (std::size_t k = 0; k < np; ++k) {
      Vec2 b = b0[k];
      for (int c = 0; c < nc; ++c) b += cf[c] * dphi[c][k];
      vals[k] = b.norm() / lam[k];
      mx = std::max(mx, vals[k]);
    }
    if (temp <= 0.0) return mx;
    double acc = 0.0;
    for (double v : vals) acc += std::exp((v - mx) / temp);
    return mx + temp * std::log(acc / double(np));
  };
  const double start = objective(coef, 0.0);
  double scale0 = 0.0;
  for (std::size_t k = 0; k < np; ++k) scale0 = std::max(scale0, b0[k].norm());
  double step = 0.05 * std::max(scale0, 1e-12);
  const double temps[] = {0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  for (int sweep = 0; sweep < opt.sweeps && nc > 0; ++sweep) {
    const double temp = temps[std::min(sweep, 5)] * std::max(start, 1e-12);
    for (int c = 0; c < nc; ++c) {
      // Golden-section line search along one coordinate.
      double lo = coef[c] - step, hi = coef[c] + step;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      auto eval = [&](double x) {
        auto cf = coef;
        cf[c] = x;
        return objective(cf, temp);
      };
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = eval(x1), f2 = eval(x2);
      for (int it = 0; it < 30; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - g * (hi - lo);
          f1 = eval(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + g * (hi - lo);
          f2 = eval(x2);
        }
      }
      const double xm = 0.5 * (lo + hi);
      if (eval(xm) < eval(coef[c])) coef[c] = xm;
    }
    step *= 0.5;
  }

  auto sup_bound = [&](const OneForm& b) {
    auto neg = [&](const Vec2& q) { return -norm_at(b, q); };
    const auto r = lattice_bound(neg, Vec2(0, 0), Vec2(1, 1), opt.grid, true);
    return std::pair<double, double>(-r.min_value, -r.bound);
  };
  const auto [raw_max, raw_upper] = sup_bound(*base.beta);
  est.unbounded_max = raw_max;
  est.upper = raw_upper;
  if (nc > 0) {
    OneForm gauged = *base.beta;
    for (int c = 0; c < nc; ++c)
      if (coef[c] != 0.0) {
        const auto& md = modes[c / 2];
        gauged.gauge.terms.push_back({md[0], md[1], c % 2 == 0 ? coef[c] : 0.0, c % 2 == 1 ? coef[c] : 0.0});
      }
    if (!gauged.gauge.terms.empty()) {
      const auto [gmax, gupper] = sup_bound(gauged);
      (void)gmax;
      if (gupper < est.upper) {
        est.upper = gupper;
        est.gauge = gauged.gauge.terms;
      }
    }
  }

  // Lower bound: flux over length of embedded round discs.
  std::vector<std::pair<Vec2, double>> loops;
  std::vector<double> radii;
  for (int k = 1; k <= 18; ++k) radii.push_back(0.025 * k);
  radii.insert(radii.end(), opt.loop_radii.begin(), opt.loop_radii.end());
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (double R : radii) loops.push_back({Vec2((i + 0.5) / 8, (j + 0.5) / 8), R});
  if (sys.f.kind == ScalarField::Kind::ql_density || sys.f.kind == ScalarField::Kind::radial_bump)
    for (double R : radii) loops.push_back({sys.f.center, R});
  if (sys.f.kind == ScalarField::Kind::ql_density) loops.push_back({sys.f.center, sys.f.profile.r0});
  std::vector<double> ratio(loops.size(), 0.0);
  parallel_for(loops.size(), [&](std::size_t k) {
    const auto& [c, R] = loops[k];
    if (!(R > 0.0 && R < 0.5)) return;
    ratio[k] = std::abs(disc_flux(base, c, R, 400, 512)) / circle_length(base, c, R, 512);
  });
  for (std::size_t k = 0; k < loops.size(); ++k)
    if (ratio[k] > est.lower) {
      est.lower = ratio[k];
      est.best_loop_center = loops[k].first;
      est.best_loop_radius = loops[k].second;
    }
  return est;
}

// ---------------------------------------------------------------------------
// QL torus

bool Annulus::contains(const Vec2& q) const {
  const double r = torus_displacement(q, center).norm();
  return r >= inner && r <= outer;
}

QLTorus build_ql_torus(const QLTorusSpec& spec, double tol) {
  if (!(spec.width > 0.0) || !(spec.radius > 0.0)) throw ConfigError("radius and width must be positive");
  if (spec.radius - spec.width <= 0.0)
    throw ConfigError("bump support reaches the circle centre (radius must exceed width)");
  if (spec.radius + spec.width >= 0.5) throw ConfigError("bump support overflows the fundamental square");
  if (!(spec.sharpness > 0.0) || spec.shoulder < 0.0 || !(spec.shoulder_scale > 0.0) || spec.edge < 0.0)
    throw ConfigError("invalid bump profile parameters");
  if (spec.orientation != 1.0 && spec.orientation != -1.0) throw ConfigError("orientation must be +1 or -1");

  BumpProfile prof;
  prof.shape = BumpProfile::Shape::shouldered;
  prof.r0 = spec.radius;
  prof.width = spec.width;
  prof.sharpness = spec.sharpness;
  prof.shoulder = spec.shoulder;
  prof.shoulder_scale = spec.shoulder_scale;
  prof.edge = spec.edge;

  QLTorus out;
  auto& sys = out.system;
  sys.surface = SurfaceModel::flat_torus();
  sys.surface.set_orientation(spec.orientation);
  sys.f.kind = ScalarField::Kind::ql_density;
  sys.f.center = spec.center;
  sys.f.profile = prof;
  sys.f.orientation = spec.orientation;
  OneForm b;
  b.kind = OneForm::Kind::ql;
  b.center = spec.center;
  b.profile = prof;
  sys.beta = b;
  sys.s = 1.0;
  sys.a = 0.0;

  // delta runs counter-clockwise for either orientation: kappa = s f carries
  // the same sign as jhat.
  const PhasePoint x0 = make_phase_point(sys.surface, 0, spec.center + Vec2(spec.radius, 0.0), Vec2(0.0, 1.0));
  out.delta = make_closed_orbit(sys, x0, 2.0 * kPi * spec.radius, tol);
  out.curvature = 1.0 / spec.radius;
  out.margin = out.curvature;  // nu vanishes on the flat torus

  double sup = 0.0;
  const int n = 512;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sup = std::max(sup, b.value(Vec2((i + 0.5) / n, (j + 0.5) / n)).norm());
  out.sup_beta = sup;

  // Outer edge of {f >= 0}: first zero of b' + b/r beyond the circle.
  auto fr = [&](double r) {
    const auto j = prof.eval(r);
    return j.db + j.b / r;
  };
  double lo = spec.radius, hi = spec.radius;
  const double dr = spec.width / 2000.0;
  while (hi < spec.radius + spec.width && fr(hi) >= 0.0) {
    lo = hi;
    hi += dr;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fr(mid) >= 0.0 ? lo : hi) = mid;
  }
  out.u_inner = spec.radius - spec.width;
  out.u_outer = lo;
  return out;
}

A0Result a0_bound(const MagneticSystem& sys, double b0, const Annulus& region, int n) {
  if (!sys.surface.is_torus()) throw ConfigError("a0 bound is defined for torus models");
  if (!sys.beta) throw ConfigError("a0 bound needs a primitive beta");
  if (!(b0 >= 0.0 && b0 < 1.0)) throw ConfigError("window half-width must lie in [0, 1)");
  if (n < 16) throw ConfigError("a0 lattice too coarse");
  const double s_lo = 1.0 - b0, s_hi = 1.0 + b0;
  std::vector<double> eps(n, kInf), c0(n, -kInf);
  parallel_for(std::size_t(n), [&](std::size_t i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 q((i + 0.5) / n, (j + 0.5) / n);
      if (region.contains(q)) continue;
      const double l = sys.surface.lambda(0, q);
      const double nb = sys.beta_at(0, q).norm() / l;
      const double nn = nu_components(sys, 0, q).norm() / l;
      const double f = sys.density(0, q);
      eps[i] = std::min(eps[i], 1.0 - s_hi * nb);
      c0[i] = std::max({c0[i], nn - s_lo * f, nn - s_hi * f});
    }
  });
  A0Result r;
  r.eps_prime = *std::min_element(eps.begin(), eps.end());
  r.c0 = *std::max_element(c0.begin(), c0.end());
  if (!std::isfinite(r.eps_prime)) {
    r.diagnostic = "region covers the whole torus";
    return r;
  }
  if (r.eps_prime <= 0.0) {
    r.diagnostic = "window too wide: 1 - s|beta| reaches " + std::to_string(r.eps_prime) + " outside U";
    return r;
  }
  r.ok = true;
  r.a0 = r.c0 <= 0.0 ? kInf : r.eps_prime / r.c0;
  return r;
}

}  // namespace magnetolab
