// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "magnetolab/complex.hpp"
#include "magnetolab/contact.hpp"
#include "magnetolab/flow.hpp"
#include "magnetolab/linearization.hpp"
#include "magnetolab/mapverify.hpp"
#include "magnetolab/systems.hpp"
#include "oracles.hpp"

using namespace magnetolab;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned tolerances.
constexpr double kPeriodTol = 1e-6;
constexpr double kPeriodBudget = 30.0;
constexpr double kDriftTol = 1e-8;
constexpr double kDriftBudget = 10.0;
constexpr double kKappaTol = 1e-6;
constexpr double kCircleTol = 1e-7;
constexpr double kAngleTol = 1e-6;
constexpr double kWitnessTol = 1e-9;
constexpr double kR0Tol = 1e-2;
constexpr double kR0Budget = 60.0;
constexpr double kPullbackTol = 1e-8;
constexpr double kPhiTol = 1e-7;
constexpr double kOrderMin = 1.9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vec2 start_point(const MagneticSystem& sys, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Vec2 q(u(rng), u(rng));
  if (sys.surface.kind() == SurfaceKind::sphere) q = 2.0 * q - Vec2(1, 1);
  if (sys.surface.kind() == SurfaceKind::halfplane) q = Vec2(4 * q.x() - 2, 0.5 + 2 * q.y());
  return q;
}

Outcome sphere_period_law() {
  const auto t0 = std::chrono::steady_clock::now();
  SectionSpec sec;
  sec.u_min = 0.05;
  sec.u_max = 0.8;
  SearchGrid grid;
  grid.n_u = 3;
  grid.n_theta = 4;
  grid.t_max = 20;
  double worst = 0;
  std::size_t found = 0;
  bool every_s = true;
  for (double s : {0.5, 1.0, 2.0}) {
    const auto rep = find_closed_orbits(symmetric_sphere(s), sec, grid, 1e-10);
    every_s = every_s && !rep.orbits.empty();
    found += rep.orbits.size();
    for (const auto& o : rep.orbits) worst = std::max(worst, std::abs(o.period - 2 * kPi / std::sqrt(1 + s * s)));
  }
  const double t = seconds_since(t0);
  return {every_s && worst <= kPeriodTol && t < kPeriodBudget,
          fmt("%.0f orbits, max period error %.2e, %.2f s", double(found), worst, t)};
}

Outcome conservation() {
  double worst = 0, slowest = 0;
  std::string worst_name;
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_system(name);
    Vec2 q(0.37, 0.21);
    if (sys.surface.kind() == SurfaceKind::halfplane) q.y() += 1.0;
    FlowOptions opt;
    opt.record = false;
    const auto t0 = std::chrono::steady_clock::now();
    const auto tr = integrate(sys, unit_point(sys.surface, 0, q, 0.3), 1000.0, 1e-10, opt);
    slowest = std::max(slowest, seconds_since(t0));
    const double d = std::abs(tr.samples.back().p.rho - tr.samples.front().p.rho) / tr.samples.front().p.rho;
    if (d >= worst) worst = d, worst_name = name;
  }
  return {worst <= kDriftTol && slowest < kDriftBudget,
          fmt("max drift %.2e", worst) + " (" + worst_name + ")" + fmt(", slowest %.2f s", slowest)};
}

Outcome curvature_identity() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  double worst = 0;
  int runs = 0;
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_system(name);
    for (int i = 0; i < 10; ++i, ++runs) {
      const auto p0 = unit_point(sys.surface, 0, start_point(sys, rng), ang(rng));
      const auto tr = integrate(sys, p0, 5.0, 1e-11);
      for (const auto& c : geodesic_curvature(sys, tr)) worst = std::max(worst, std::abs(c.kappa - c.expected));
    }
  }
  return {worst <= kKappaTol, fmt("max |kappa - s f| %.2e over %.0f trajectories", worst, runs)};
}

Outcome hedlund_circles() {
  const auto sys = symmetric_genus(0.5);
  const auto tr = integrate(sys, unit_point(sys.surface, 0, Vec2(0.0, 1.0), 0.0), 20.0, 1e-12);
  std::vector<Vec2> pts;
  for (const auto& s : tr.samples) pts.push_back(s.p.q);
  const auto c = fit_circle(pts);
  const double angle = boundary_angle(c);
  const double err = std::abs(angle - std::acos(0.5));
  return {c.residual < kCircleTol && err <= kAngleTol,
          fmt("fit residual %.2e, boundary angle %.9f (error %.2e)", c.residual, angle, err)};
}

Outcome iteration_formula() {
  int mismatches = 0, rows = 0;
  std::string kinds;
  auto check = [&](const MagneticSystem& sys, const ClosedOrbit& o) {
    const auto lin = linearized_flow(sys, o);
    const auto data = analyze_path(lin.path);
    kinds += (kinds.empty() ? "" : ", ") + to_string(data.type) + " mu=" + std::to_string(data.mu_bar);
    for (int k = 1; k <= 8; ++k) {
      ++rows;
      if (oracles::crossing_index(lin.path.iterate(k)) != iterate_index(data, k)) ++mismatches;
    }
  };
  const auto bump = elliptic_bump_torus();
  check(bump, elliptic_bump_orbit(bump));
  const auto genus = symmetric_genus(0.5);
  check(genus, halfplane_ray_orbit(genus));
  const bool both = kinds.find("elliptic") != std::string::npos && kinds.find("hyperbolic") != std::string::npos;
  return {both && mismatches == 0, kinds + fmt("; %.0f mismatches in %.0f iterates", mismatches, rows)};
}

Outcome minimizer_index() {
  const auto ql = build_ql_torus({});
  const auto data = analyze_path(linearized_flow(ql.system, ql.delta).path);
  return {data.mu_bar == 0, "mu_bar(delta) = " + std::to_string(data.mu_bar) + ", " + to_string(data.type) +
                                fmt(", trace %.3f", data.trace)};
}

Outcome contact_bounds() {
  // |beta| and min f read off the systems on a lattice.
  auto data = [](const MagneticSystem& sys) {
    double nb = 0, mf = kInf;
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        const Vec2 q = sys.surface.kind() == SurfaceKind::sphere ? Vec2(-1 + i / 20.0, -1 + j / 20.0)
                                                                  : Vec2(-2 + i / 10.0, 0.2 + j / 10.0);
        nb = std::max(nb, sys.beta_at(0, q).norm() / sys.surface.lambda(0, q));
        mf = std::min(mf, sys.density(0, q));
      }
    return std::make_pair(nb, mf);
  };
  const auto [nbs, mfs] = data(symmetric_sphere(1.0));
  const auto [nbg, mfg] = data(symmetric_genus(1.0));
  const auto sphere = s_bounds(nbs, mfs);
  const auto genus = s_bounds(nbg, mfg);
  CertifyGrid g;
  g.n = 128;
  g.n_angle = 64;
  const auto below = certify(symmetric_genus(1.0), 0.9, 0.0, g);
  const auto above = certify(symmetric_genus(1.0), 1.1, 0.0, g);
  const bool ok = sphere.s_minus == kInf && sphere.s_plus == 0.0 && genus.s_minus == 1.0 && below.positive &&
                  !above.positive;
  return {ok, fmt("sphere s- %g s+ %g, genus s- %g; ", sphere.s_minus, sphere.s_plus, genus.s_minus) +
                  fmt("certify s=0.9 bound %.3f, s=1.1 min %.3f", below.bound, above.min_value)};
}

Outcome ql_torus() {
  const auto ql = build_ql_torus({});
  const Vec2 c(0.5, 0.5);
  CertifyGrid g;
  g.n = 512;
  g.n_angle = 64;
  const auto at0 = certify(ql.system, 1.0, 0.0, g);
  // Witness on delta: on the circle, moving along it.
  const Vec2 d = torus_displacement(at0.witness_q, c);
  const double tangent = std::atan2(d.y(), d.x()) + 0.5 * kPi;
  const double on_circle = std::abs(d.norm() - 0.2);
  const double along = std::abs(std::remainder(at0.witness_angle - tangent, 2 * kPi));
  const bool witness_ok = !at0.positive && std::abs(at0.witness_value) <= kWitnessTol && on_circle < 1e-3 && along < 1e-2;

  const auto a0 = a0_bound(ql.system, 0.05, Annulus{c, ql.u_inner, ql.u_outer});
  bool inside_ok = a0.ok && std::isfinite(a0.a0) && a0.a0 > 0;
  double worst_bound = kInf;
  // Near delta the value is only O(a), so the lattice must beat the O(h^2) cell margin.
  CertifyGrid fine = g;
  fine.n = 2048;
  for (double frac : {0.1, 0.5, 0.9}) {
    const auto cert = certify(ql.system, 1.0, frac * a0.a0, fine);
    inside_ok = inside_ok && cert.positive;
    worst_bound = std::min(worst_bound, cert.bound);
  }
  return {witness_ok && inside_ok,
          fmt("a=0 witness value %.1e at |q-c| %.4f; ", at0.witness_value, d.norm()) +
              fmt("a0 %.3e; min bound on (0, a0) %.2e", a0.a0, worst_bound)};
}

Outcome r0_bracket() {
  const auto t0 = std::chrono::steady_clock::now();
  R0Options opt;
  opt.basis = 12;
  const auto e = estimate_r0(build_ql_torus({}).system, opt);
  const double t = seconds_since(t0);
  const bool ok = e.lower >= 1 - kR0Tol && e.upper <= 1 + kR0Tol && e.lower <= e.upper && t < kR0Budget;
  return {ok, fmt("[%.5f, %.5f] in %.1f s", e.lower, e.upper, t)};
}

Outcome appendix() {
  bool ok = true;
  std::string detail;
  for (double s : {0.1, 1.0, 10.0}) {
    const auto r = verify_appendix(s, 1000, 0);
    ok = ok && r.samples == 1000 && r.max_pullback < kPullbackTol && r.max_phi_pullback < kPhiTol &&
         r.convergence_order >= kOrderMin;
    if (!detail.empty()) detail += "; ";
    detail += fmt("s=%g pullback %.1e phi %.1e order %.3f", s, r.max_pullback, r.max_phi_pullback, r.convergence_order);
  }
  return {ok, detail};
}

OrbitInput orbit(const std::string& id, int mu, OrbitType type, double T, double delta = 0.0,
                 const std::string& homotopy = "0") {
  OrbitInput o;
  o.id = id;
  o.data.mu_bar = mu;
  o.data.type = type;
  o.data.delta_tilde = delta;
  o.period = T;
  o.homotopy = homotopy;
  return o;
}

Outcome complex_feasibility() {
  std::string fails;
  auto need = [&](bool c, const char* what) {
    if (!c) fails += std::string(fails.empty() ? "" : ", ") + what;
  };
  const auto d = build_table({orbit("x", 2, OrbitType::hyperbolic, 1.0)}, 3.0, MorseSpec::sphere());
  need(d.degree_sequence() == std::vector<int>{2, 0, 0, -1, -2, -3, -4, -5}, "case d sequence");
  need(!acyclicity_feasible(d, {}).feasible, "case d infeasible");
  const auto e = build_table({orbit("x", 1, OrbitType::hyperbolic, 1.0)}, 3.0, MorseSpec::sphere());
  need(e.degree_sequence() == std::vector<int>{2, 1, 0, 0, 0, -1, -1, -2}, "case e sequence");
  need(!acyclicity_feasible(e, {}).feasible, "case e infeasible");
  const auto g = build_table({orbit("c", 0, OrbitType::hyperbolic, 1.0, 0.0, "w")}, 1.0, MorseSpec::none());
  need(acyclicity_feasible(g, {{2, 1}, {1, 1}}, false).feasible, "genus circle target");

  const auto f1 = build_table({orbit("x", 1, OrbitType::elliptic, 1.0, 0.3)}, 4.0, MorseSpec::sphere());
  need(bv_obstruction(f1, {{"x^1+", "x^3+"}, {}, 12}).contradiction, "case f below 1/2");
  const auto f2 = build_table({orbit("x", 1, OrbitType::elliptic, 1.0, 0.7)}, 4.0, MorseSpec::sphere());
  need(bv_obstruction(f2, {{"x^3+", "x^4+"}, {}, 12}).contradiction, "case f above 1/2");
  const auto inj = build_table({orbit("d", 0, OrbitType::hyperbolic, 1.0)}, 4.0, MorseSpec::torus());
  need(delta_injective_top(inj).injective, "Delta injective on degree 2");

  std::mt19937_64 rng(11);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = oracles::random_counts(rng, 12);
    const auto t = oracles::random_target(rng, c);
    const auto caps = oracles::random_caps(rng, c);
    for (bool open : {true, false}) {
      ++total;
      if (acyclicity_feasible(c, t, caps, open).feasible == oracles::feasible_by_enumeration(c, t, caps, open)) ++agree;
    }
  }
  need(agree == total, "oracle agreement");
  return {fails.empty(), (fails.empty() ? std::string("all scenarios as expected") : "failed: " + fails) +
                             fmt("; oracle agrees on %.0f/%.0f tables", agree, total)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"sphere period law", sphere_period_law}, {"conservation", conservation},
      {"curvature identity", curvature_identity}, {"Hedlund circles", hedlund_circles},
      {"iteration formula", iteration_formula}, {"minimizer index", minimizer_index},
      {"contact bounds", contact_bounds}, {"QL torus", ql_torus},
      {"r0 bracket", r0_bracket}, {"appendix map", appendix},
      {"complex feasibility", complex_feasibility},
  };
  int failed = 0, n = 0;
  for (const auto& c : criteria) {
    ++n;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
