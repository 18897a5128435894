#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "magnetolab/flow.hpp"
#include "magnetolab/parallel.hpp"

namespace magnetolab {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) { return std::remainder(a, 2 * kPi); }

struct SectionCoords {
  double h = 0.0;  // signed distance to the line (positive on the left)
  double u = 0.0;
  double theta = 0.0;
};

std::optional<SectionCoords> section_coords(const MagneticSystem& sys, const SectionSpec& sec, int chart,
                                            const Vec4& x) {
  Vec2 q = x.head<2>(), v = x.tail<2>();
  if (chart != sec.chart) {
    if (q.norm() < 1e-3) return std::nullopt;  // near the far pole of the section chart
    Vec2 q2, v2;
    sys.surface.transition(chart, q, v, q2, v2);
    q = q2;
    v = v2;
  }
  const Vec2 d = sys.surface.is_torus() ? torus_displacement(q, sec.origin) : Vec2(q - sec.origin);
  const Vec2 n(-sec.direction.y(), sec.direction.x());
  SectionCoords c;
  c.h = n.dot(d);
  c.u = sec.direction.dot(d);
  c.theta = std::atan2(v.y(), v.x());
  return c;
}

}  // namespace

PhasePoint section_point(const MagneticSystem& sys, const SectionSpec& sec, double u, double theta) {
  return unit_point(sys.surface, sec.chart, sec.origin + u * sec.direction, theta);
}

std::vector<SectionHit> section_hits(const MagneticSystem& sys, const SectionSpec& sec, const PhasePoint& p0,
                                     int max_hits, double t_max, double tol) {
  std::vector<SectionHit> hits;
  int chart = p0.chart;
  ode::State<4> y = p0.state();
  auto rhs = [&](double, const ode::State<4>& x) { return ode_rhs(sys, chart, x); };
  ode::Options o;
  o.rtol = o.atol = tol;
  ode::Stats stats;
  ode::integrate<4>(rhs, 0.0, y, t_max, o, stats, [&](double t0, const ode::State<4>& y0, double t1, ode::State<4>& x) {
    const auto c0 = section_coords(sys, sec, chart, y0);
    const auto c1 = section_coords(sys, sec, chart, x);
    if (c0 && c1 && c0->h < 0.0 && c1->h >= 0.0 && c0->h > -0.25 && c1->h < 0.25) {
      // Locate the crossing by Illinois iteration on sub-steps from y0.
      const ode::State<4> k1 = rhs(t0, y0);
      auto g = [&](double tau, ode::State<4>* out) {
        const auto r = ode::dop853_step<4>(rhs, t0, y0, k1, tau, 1.0, 0.0, false);
        if (out) *out = r.y;
        const auto c = section_coords(sys, sec, chart, r.y);
        return c ? c->h : 0.0;
      };
      double a = 0.0, b = t1 - t0, fa = c0->h, fb = c1->h;
      int side = 0;
      ode::State<4> xc = x;
      double tc = b;
      for (int it = 0; it < 100; ++it) {
        if (fb == fa) break;
        const double m = (a * fb - b * fa) / (fb - fa);
        const double fm = g(m, &xc);
        tc = m;
        if (std::abs(fm) < 1e-15 || std::abs(b - a) < 1e-15 * std::max(1.0, std::abs(t1))) break;
        if ((fm < 0.0) == (fb < 0.0)) {
          b = m;
          fb = fm;
          if (side == -1) fa *= 0.5;
          side = -1;
        } else {
          a = m;
          fa = fm;
          if (side == 1) fb *= 0.5;
          side = 1;
        }
      }
      const auto cc = section_coords(sys, sec, chart, xc);
      if (cc && cc->u >= sec.u_min && cc->u <= sec.u_max) {
        SectionHit h;
        h.t = t0 + tc;
        h.u = cc->u;
        h.theta = cc->theta;
        h.p = make_phase_point(sys.surface, chart, xc);
        hits.push_back(h);
        if (int(hits.size()) >= max_hits) return ode::StepAction::stop;
      }
    }
    const Vec2 q = x.head<2>();
    sys.surface.check_domain(chart, q);
    if (sys.surface.wants_switch(chart, q)) {
      Vec2 q2, v2;
      sys.surface.transition(chart, q, x.tail<2>(), q2, v2);
      chart = 1 - chart;
      x << q2, v2;
      return ode::StepAction::modified;
    }
    return ode::StepAction::proceed;
  });
  return hits;
}

namespace {

struct Candidate {
  bool ok = false;
  double u = 0.0, theta = 0.0;
  int returns = 0;
  std::string note;
};

Vec2 return_residual(const SectionHit& h, double u, double theta) {
  return Vec2(h.u - u, wrap_angle(h.theta - theta));
}

}  // namespace

OrbitSearchReport find_closed_orbits(const MagneticSystem& sys, const SectionSpec& sec, const SearchGrid& grid,
                                     double tol) {
  if (grid.n_u < 1 || grid.n_theta < 1 || grid.max_returns < 1)
    throw ConfigError("search grid must have at least one seed and one return");
  const double itol = grid.integration_tol;

  auto return_map = [&](double u, double th, int j) -> std::optional<SectionHit> {
    const auto hits = section_hits(sys, sec, section_point(sys, sec, u, th), j, grid.t_max, itol);
    if (int(hits.size()) < j) return std::nullopt;
    return hits[j - 1];
  };

  auto newton = [&](double u, double th, int j) -> Candidate {
    Candidate c;
    c.returns = j;
    Vec2 z(u, th);
    auto eval = [&](const Vec2& p) -> std::optional<Vec2> {
      const auto h = return_map(p.x(), p.y(), j);
      if (!h) return std::nullopt;
      return return_residual(*h, p.x(), p.y());
    };
    auto gz = eval(z);
    if (!gz) {
      c.note = "seed lost the section";
      return c;
    }
    const double delta = 1e-6;
    for (int it = 0; it < grid.newton_iterations; ++it) {
      if (gz->norm() < tol) {
        c.ok = true;
        c.u = z.x();
        c.theta = wrap_angle(z.y());
        return c;
      }
      Mat2 jac;
      bool lost = false;
      for (int k = 0; k < 2 && !lost; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = delta;
        const auto gp = eval(z + e), gm = eval(z - e);
        if (!gp || !gm) {
          lost = true;
          break;
        }
        jac.col(k) = (*gp - *gm) / (2 * delta);
      }
      if (lost) {
        c.note = "return map undefined near iterate";
        return c;
      }
      // Pseudo-inverse tolerates the degenerate directions of orbit families.
      Eigen::JacobiSVD<Mat2> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto sv = svd.singularValues();
      Vec2 step = Vec2::Zero();
      for (int k = 0; k < 2; ++k)
        if (sv[k] > 1e-8 * std::max(sv[0], 1e-300))
          step -= svd.matrixV().col(k) * (svd.matrixU().col(k).dot(*gz) / sv[k]);
      double lam = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 10; ++ls, lam *= 0.5) {
        const Vec2 zn = z + lam * step;
        if (zn.x() < sec.u_min || zn.x() > sec.u_max) continue;
        const auto gn = eval(zn);
        if (gn && gn->norm() < gz->norm()) {
          z = zn;
          gz = gn;
          improved = true;
          break;
        }
      }
      if (!improved) {
        if (gz->norm() < 100 * tol) {
          c.ok = true;
          c.u = z.x();
          c.theta = wrap_angle(z.y());
          return c;
        }
        c.note = "Newton stalled at residual " + std::to_string(gz->norm());
        return c;
      }
    }
    c.note = "Newton did not converge within the iteration budget";
    return c;
  };

  const std::size_t n_seeds = std::size_t(grid.n_u) * std::size_t(grid.n_theta);
  std::vector<std::vector<Candidate>> per_seed(n_seeds);
  parallel_for(n_seeds, [&](std::size_t idx) {
    const int iu = int(idx) / grid.n_theta, it = int(idx) % grid.n_theta;
    const double u = sec.u_min + (iu + 0.5) * (sec.u_max - sec.u_min) / grid.n_u;
    const double th = grid.theta_min + (it + 0.5) * (grid.theta_max - grid.theta_min) / grid.n_theta;
    const auto hits = section_hits(sys, sec, section_point(sys, sec, u, th), grid.max_returns, grid.t_max, itol);
    for (int j = 1; j <= int(hits.size()); ++j) {
      if (return_residual(hits[j - 1], u, th).norm() > grid.accept_radius) continue;
      per_seed[idx].push_back(newton(u, th, j));
      if (per_seed[idx].back().ok) break;
    }
  });

  OrbitSearchReport report;
  const double merge = 10.0 * tol;
  for (std::size_t idx = 0; idx < n_seeds; ++idx) {
    for (const auto& c : per_seed[idx]) {
      if (!c.ok) {
        std::ostringstream os;
        os << "seed " << idx << " (returns " << c.returns << "): " << c.note;
        report.diagnostics.push_back(os.str());
        continue;
      }
      const PhasePoint x0 = section_point(sys, sec, c.u, c.theta);
      const auto hits = section_hits(sys, sec, x0, c.returns, grid.t_max, itol);
      if (int(hits.size()) < c.returns) continue;
      // Minimal period: first return that already closes up.
      int prime = c.returns;
      for (int i = 1; i < c.returns; ++i)
        if (return_residual(hits[i - 1], c.u, c.theta).norm() < std::max(merge, 1e3 * tol)) {
          prime = i;
          break;
        }
      ClosedOrbit orb = make_closed_orbit(sys, x0, hits[prime - 1].t, itol);
      orb.u = c.u;
      orb.theta = c.theta;
      orb.prime = true;
      orb.iterate = 1;
      orb.crossings.push_back({c.u, c.theta});
      for (int i = 1; i < prime; ++i) orb.crossings.push_back({hits[i - 1].u, hits[i - 1].theta});
      if (orb.residual > grid.residual_tol) {
        std::ostringstream os;
        os << "seed " << idx << ": closure residual " << orb.residual << " above tolerance";
        report.diagnostics.push_back(os.str());
        continue;
      }
      bool merged = false;
      for (auto& other : report.orbits) {
        for (const auto& x : other.crossings) {
          if (Vec2(x[0] - orb.u, wrap_angle(x[1] - orb.theta)).norm() < merge) {
            merged = true;
            break;
          }
        }
        if (merged) {
          if (orb.period < other.period - merge) other = orb;
          break;
        }
      }
      if (!merged) report.orbits.push_back(std::move(orb));
    }
  }
  return report;
}

}  // namespace magnetolab
