#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "magnetolab/systems.hpp"
#include "svg.hpp"

namespace magnetolab::cli {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

void emit_json(const json& j, const std::string& path, std::ostream& out) { emit(j.dump(2) + "\n", path, out); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vec2 pair_of(const std::vector<double>& v, const char* what) {
  if (v.size() != 2) throw ConfigError(std::string(what) + " needs two comma-separated numbers");
  return Vec2(v[0], v[1]);
}

// "2:1,1:1" -> {2: 1, 1: 1}
std::map<int, int> parse_dims(const std::string& text) {
  std::map<int, int> m;
  if (text.empty()) return m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto c = item.find(':');
    if (c == std::string::npos) throw ConfigError("dimension list entries look like degree:count");
    try {
      m[std::stoi(item.substr(0, c))] = std::stoi(item.substr(c + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad dimension entry '" + item + "'");
    }
  }
  return m;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      v.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad integer '" + item + "'");
    }
  }
  return v;
}

json dims_to_json(const std::map<int, int>& m) {
  json j = json::object();
  for (const auto& [d, c] : m) j[std::to_string(d)] = c;
  return j;
}

MorseSpec parse_morse(const std::string& s) {
  if (s == "none") return MorseSpec::none();
  if (s == "sphere") return MorseSpec::sphere();
  if (s == "torus") return MorseSpec::torus();
  return MorseSpec{parse_ints(s)};
}

json feasibility_to_json(const FeasibilityResult& r) {
  return {{"feasible", r.feasible},
          {"ranks", dims_to_json(r.ranks)},
          {"window", r.feasible ? json(nullptr) : json::array({r.window_high, r.window_low})},
          {"reason", r.reason}};
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string system;
  std::vector<double> init;
  int chart = 0;
  double time = 10.0;
  double tol = 1e-10;
  std::string out;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  const MagneticSystem sys = load_system(a.system);
  if (a.init.size() != 4) throw ConfigError("--init needs q1,q2,v1,v2");
  if (a.chart < 0 || a.chart >= sys.surface.chart_count()) throw ConfigError("--chart out of range");
  const PhasePoint p0 = make_phase_point(sys.surface, a.chart, Vec2(a.init[0], a.init[1]), Vec2(a.init[2], a.init[3]));
  const Trajectory tr = integrate(sys, p0, a.time, a.tol);
  std::ostringstream os;
  os << "t,chart,q1,q2,v1,v2,rho\n";
  for (const auto& s : tr.samples)
    os << fmt17(s.t) << "," << s.p.chart << "," << fmt17(s.p.q.x()) << "," << fmt17(s.p.q.y()) << ","
       << fmt17(s.p.v.x()) << "," << fmt17(s.p.v.y()) << "," << fmt17(s.p.rho) << "\n";
  emit(os.str(), a.out, out);
  return ok;
}

struct OrbitsArgs {
  std::string system;
  int chart = 0;
  std::vector<double> origin{0.0, 0.0};
  std::vector<double> direction{1.0, 0.0};
  std::vector<double> u_range{0.0, 1.0};
  SearchGrid grid;
  double tol = 1e-10;
  std::string out;
};

int do_orbits(const OrbitsArgs& a, std::ostream& out, std::ostream& err) {
  const MagneticSystem sys = load_system(a.system);
  SectionSpec sec;
  sec.chart = a.chart;
  sec.origin = pair_of(a.origin, "--origin");
  sec.direction = pair_of(a.direction, "--direction");
  const Vec2 u = pair_of(a.u_range, "--u-range");
  sec.u_min = u.x();
  sec.u_max = u.y();
  const auto rep = find_closed_orbits(sys, sec, a.grid, a.tol);
  json arr = json::array();
  for (const auto& o : rep.orbits) arr.push_back(orbit_to_json(o));
  for (const auto& d : rep.diagnostics) err << "dropped: " << d << "\n";
  emit_json(arr, a.out, out);
  return ok;
}

struct IndexArgs {
  std::string orbit;
  int iterates = 8;
  std::string out;
};

int do_index(const IndexArgs& a, std::ostream& out) {
  if (a.iterates < 1) throw ConfigError("--iterates must be at least 1");
  const OrbitRef ref = load_orbit(a.orbit);
  const auto lin = linearized_flow(ref.system, ref.orbit);
  const auto data = analyze_path(lin.path, a.iterates);
  const auto check = iteration_consistency(lin.path, data, a.iterates);
  json table = json::array();
  for (const auto& row : check.rows) {
    const auto [dm, dp] = grading(row.formula);
    table.push_back({{"k", row.k},
                     {"mu_bar_k", row.formula},
                     {"computed", row.computed ? json(*row.computed) : json(nullptr)},
                     {"deg_minus", dm},
                     {"deg_plus", dp},
                     {"good", good_bad(data.mu_bar, data.type, row.k)}});
  }
  json j = {{"mu_bar", data.mu_bar},
            {"type", to_string(data.type)},
            {"negative", data.negative},
            {"trace", data.trace},
            {"period", ref.orbit.period},
            {"closure_residual", ref.orbit.residual},
            {"frame_winding", number(lin.frame_winding)},
            {"frame_note", lin.frame_note},
            {"mismatches", check.mismatches},
            {"table", table}};
  if (data.type == OrbitType::elliptic) j["delta_tilde"] = data.delta_tilde;
  emit_json(j, a.out, out);
  return ok;
}

struct CertifyArgs {
  std::string system;
  std::vector<double> s;
  std::vector<double> a;
  int grid = 256;
  int angles = 64;
  std::string out;
};

int do_certify(const CertifyArgs& c, std::ostream& out) {
  const MagneticSystem sys = load_system(c.system);
  CertifyGrid g;
  g.n = c.grid;
  g.n_angle = c.angles;
  const std::vector<double> ss = c.s.empty() ? std::vector<double>{sys.s} : c.s;
  const std::vector<double> as = c.a.empty() ? std::vector<double>{sys.a} : c.a;
  if (ss.size() == 1 && as.size() == 1) {
    const auto cert = certify(sys, ss[0], as[0], g);
    emit_json(certificate_to_json(cert), c.out, out);
    return cert.positive ? ok : verification_failed;
  }
  json grid = json::array();
  for (double s : ss)
    for (double a : as) grid.push_back(certificate_to_json(certify(sys, s, a, g)));
  emit_json({{"grid", grid}}, c.out, out);
  return ok;
}

int do_sbounds(double norm_beta, double min_f, const std::string& path, std::ostream& out) {
  const auto b = s_bounds(norm_beta, min_f);
  emit_json({{"s_minus", number(b.s_minus)}, {"s_plus", number(b.s_plus)}, {"plus_applicable", b.plus_applicable}},
            path, out);
  return ok;
}

int do_r0(const std::string& system, const R0Options& opt, const std::string& path, std::ostream& out) {
  const MagneticSystem sys = load_system(system);
  const auto e = estimate_r0(sys, opt);
  json gauge = json::array();
  for (const auto& t : e.gauge) gauge.push_back({{"k", {t.kx, t.ky}}, {"a", t.a}, {"b", t.b}});
  emit_json({{"lower", e.lower},
             {"upper", e.upper},
             {"unbounded_max", e.unbounded_max},
             {"basis", opt.basis},
             {"gauge", gauge},
             {"best_loop", {{"center", {e.best_loop_center.x(), e.best_loop_center.y()}}, {"radius", e.best_loop_radius}}}},
            path, out);
  return ok;
}

struct QLArgs {
  QLTorusSpec spec;
  double b0 = 0.05;
  int a0_grid = 1024;
  std::string out;
};

int do_ql(const QLArgs& q, std::ostream& out) {
  const auto ql = build_ql_torus(q.spec);
  const Annulus U{q.spec.center, ql.u_inner, ql.u_outer};
  const auto a0 = a0_bound(ql.system, q.b0, U, q.a0_grid);
  const json sys = system_to_json(ql.system);
  if (!q.out.empty()) emit_json(sys, q.out, out);
  json j = {{"delta", orbit_to_json(ql.delta)},
            {"curvature", ql.curvature},
            {"margin", ql.margin},
            {"sup_beta", ql.sup_beta},
            {"annulus", {ql.u_inner, ql.u_outer}},
            {"a0", {{"b0", q.b0}, {"a0", a0.a0}, {"eps_prime", a0.eps_prime}, {"c0", a0.c0}, {"ok", a0.ok},
                    {"diagnostic", a0.diagnostic}}}};
  if (q.out.empty()) j["system"] = sys;
  emit_json(j, "", out);
  return ok;
}

struct ComplexArgs {
  std::string orbits;
  double cutoff = 10.0;
  std::string morse = "none";
  std::string check = "acyclic";
  bool equivariant = false;
  std::string out;
};

int do_complex(const ComplexArgs& c, std::ostream& out) {
  std::vector<OrbitInput> orbits;
  if (!c.orbits.empty()) {
    const json j = (c.orbits.front() == '[') ? parse_json_text(c.orbits) : read_json_file(c.orbits);
    orbits = orbit_inputs_from_json(j);
  }
  json rep = {{"check", c.check}};
  GeneratorTable table;
  if (c.check.rfind("mb=", 0) == 0) {
    const auto a = parse_ints(c.check.substr(3));
    table = mb_e1_table(a, c.equivariant);
    json counts = json::array();
    for (const auto& [d, n] : mb_e1_counts(a, c.equivariant)) counts.push_back({d, n});
    rep["equivariant"] = c.equivariant;
    rep["e1_counts"] = counts;
    rep["verdict"] = feasibility_to_json(acyclicity_feasible(table, {}));
  } else {
    table = build_table(orbits, c.cutoff, parse_morse(c.morse));
    if (c.check == "acyclic") {
      rep["verdict"] = feasibility_to_json(acyclicity_feasible(table, {}));
    } else if (c.check.rfind("target=", 0) == 0) {
      const auto target = parse_dims(c.check.substr(7));
      rep["target"] = dims_to_json(target);
      rep["verdict"] = feasibility_to_json(acyclicity_feasible(table, target));
    } else if (c.check == "injective") {
      const auto r = delta_injective_top(table);
      rep["verdict"] = {{"injective", r.injective}, {"pivots", r.pivots}, {"offending", r.offending}, {"reason", r.reason}};
    } else if (c.check.rfind("bv=", 0) == 0) {
      const std::string ref = c.check.substr(3);
      const json sj = (!ref.empty() && ref.front() == '{') ? parse_json_text(ref) : read_json_file(ref);
      require_keys(sj, {"sources", "target", "enumerate_limit"}, "scenario");
      BvScenario sc;
      if (!sj.contains("sources") || !sj["sources"].is_array()) throw ConfigError("scenario needs a sources array");
      sc.sources = sj["sources"].get<std::vector<std::string>>();
      if (sj.contains("target")) sc.target = parse_dims(sj["target"].get<std::string>());
      sc.enumerate_limit = sj.value("enumerate_limit", 12);
      const auto r = bv_obstruction(table, sc);
      rep["verdict"] = {{"contradiction", r.contradiction},
                        {"steps", r.steps},
                        {"reason", r.reason},
                        {"enumerated", r.enumerated},
                        {"completions_checked", r.completions_checked},
                        {"consistent_completions", r.consistent_completions}};
    } else {
      throw ConfigError("unknown --check '" + c.check + "'");
    }
    rep["cutoff"] = c.cutoff;
    rep["morse"] = c.morse;
  }
  rep["counts"] = dims_to_json(table.counts());
  rep["table"] = table_to_json(table);
  emit_json(rep, c.out, out);
  return ok;
}

struct AppendixArgs {
  std::vector<double> s{1.0};
  int samples = 1000;
  std::uint64_t seed = 0;
  double orientation = 1.0;
  std::string out;
};

int do_appendix(const AppendixArgs& a, std::ostream& out) {
  MapOptions opt;
  opt.orientation = a.orientation;
  json reports = json::array();
  bool pass = true;
  for (double s : a.s) {
    const auto r = verify_appendix(s, a.samples, a.seed, opt);
    pass = pass && r.max_pullback < 1e-8 && r.max_phi_pullback < 1e-7 && r.convergence_order >= 1.9;
    reports.push_back(appendix_to_json(r));
  }
  emit_json({{"seed", a.seed}, {"samples", a.samples}, {"reports", reports}, {"pass", pass}}, a.out, out);
  return pass ? ok : verification_failed;
}

int do_plot(const std::string& in, const std::string& kind, const std::string& path, std::ostream& out) {
  const std::string text = read_text(in);
  std::string svg;
  if (kind == "trajectory") {
    svg = trajectory_svg(text);
  } else if (kind == "certificate") {
    svg = certificate_svg(parse_json_text(text, in));
  } else if (kind == "grading") {
    svg = grading_svg(parse_json_text(text, in));
  } else {
    throw ConfigError("unknown plot kind '" + kind + "'");
  }
  emit(svg, path, out);
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"magnetolab: magnetic geodesic flows on surfaces"};
  app.require_subcommand(1);
  std::uint64_t global_seed = 0;

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "integrate one trajectory, CSV output");
  c_sim->add_option("--system", sim.system, "system JSON file, inline JSON or builtin:<name>")->required();
  c_sim->add_option("--init", sim.init, "q1,q2,v1,v2")->delimiter(',')->required();
  c_sim->add_option("--chart", sim.chart);
  c_sim->add_option("--time", sim.time);
  c_sim->add_option("--tol", sim.tol);
  c_sim->add_option("--out", sim.out);
  c_sim->add_option("--seed", global_seed);

  OrbitsArgs orb;
  auto* c_orb = app.add_subcommand("orbits", "closed-orbit search on a section");
  c_orb->add_option("--system", orb.system)->required();
  c_orb->add_option("--chart", orb.chart);
  c_orb->add_option("--origin", orb.origin)->delimiter(',');
  c_orb->add_option("--direction", orb.direction)->delimiter(',');
  c_orb->add_option("--u-range", orb.u_range)->delimiter(',');
  c_orb->add_option("--n-u", orb.grid.n_u);
  c_orb->add_option("--n-theta", orb.grid.n_theta);
  c_orb->add_option("--t-max", orb.grid.t_max);
  c_orb->add_option("--max-returns", orb.grid.max_returns);
  c_orb->add_option("--tol", orb.tol);
  c_orb->add_option("--out", orb.out);
  c_orb->add_option("--seed", global_seed);

  IndexArgs idx;
  auto* c_idx = app.add_subcommand("index", "transverse index, rotation number and iterate table");
  c_idx->add_option("--orbit", idx.orbit, "orbit JSON file or builtin:<name>")->required();
  c_idx->add_option("--iterates", idx.iterates);
  c_idx->add_option("--out", idx.out);
  c_idx->add_option("--seed", global_seed);

  CertifyArgs cert;
  auto* c_cert = app.add_subcommand("certify", "lattice certificate of positive contact type");
  c_cert->add_option("--system", cert.system)->required();
  c_cert->add_option("--s", cert.s)->delimiter(',');
  c_cert->add_option("--a", cert.a)->delimiter(',');
  c_cert->add_option("--grid", cert.grid);
  c_cert->add_option("--angles", cert.angles);
  c_cert->add_option("--out", cert.out);
  c_cert->add_option("--seed", global_seed);

  double norm_beta = 0.0, min_f = 0.0;
  std::string sb_out;
  auto* c_sb = app.add_subcommand("sbounds", "speed window from |beta| and min f");
  c_sb->add_option("--norm-beta", norm_beta)->required();
  c_sb->add_option("--min-f", min_f)->required();
  c_sb->add_option("--out", sb_out);
  c_sb->add_option("--seed", global_seed);

  std::string r0_system, r0_out;
  R0Options r0;
  auto* c_r0 = app.add_subcommand("r0", "bracket the minimal sup-norm of a primitive");
  c_r0->add_option("--system", r0_system)->required();
  c_r0->add_option("--basis", r0.basis);
  c_r0->add_option("--grid", r0.grid);
  c_r0->add_option("--search-grid", r0.search_grid);
  c_r0->add_option("--sweeps", r0.sweeps);
  c_r0->add_option("--out", r0_out);
  c_r0->add_option("--seed", global_seed);

  QLArgs ql;
  auto* c_ql = app.add_subcommand("ql-torus", "build the critical-speed torus and its loop");
  c_ql->add_option("--radius", ql.spec.radius);
  c_ql->add_option("--width", ql.spec.width);
  c_ql->add_option("--sharpness", ql.spec.sharpness);
  c_ql->add_option("--shoulder", ql.spec.shoulder);
  c_ql->add_option("--shoulder-scale", ql.spec.shoulder_scale);
  c_ql->add_option("--edge", ql.spec.edge);
  c_ql->add_option("--orientation", ql.spec.orientation);
  c_ql->add_option("--b0", ql.b0);
  c_ql->add_option("--a0-grid", ql.a0_grid);
  c_ql->add_option("--out", ql.out, "write the system JSON here");
  c_ql->add_option("--seed", global_seed);

  ComplexArgs cx;
  auto* c_cx = app.add_subcommand("complex", "grading tables and feasibility checks");
  c_cx->add_option("--orbits", cx.orbits, "orbit list JSON file or inline array");
  c_cx->add_option("--cutoff", cx.cutoff);
  c_cx->add_option("--morse", cx.morse, "none, sphere, torus or a comma list of indices");
  c_cx->add_option("--check", cx.check, "acyclic | target=<d:n,...> | injective | bv=<scenario> | mb=<a-list>");
  c_cx->add_flag("--equivariant", cx.equivariant);
  c_cx->add_option("--out", cx.out);
  c_cx->add_option("--seed", global_seed);

  AppendixArgs ap;
  auto* c_ap = app.add_subcommand("verify-appendix", "check the explicit sphere symplectomorphism");
  c_ap->add_option("--s", ap.s)->delimiter(',');
  c_ap->add_option("--samples", ap.samples);
  c_ap->add_option("--seed", ap.seed);
  c_ap->add_option("--orientation", ap.orientation);
  c_ap->add_option("--out", ap.out);

  std::string plot_in, plot_kind, plot_out;
  auto* c_plot = app.add_subcommand("plot", "SVG from a results file");
  c_plot->add_option("--in", plot_in)->required();
  c_plot->add_option("--kind", plot_kind, "trajectory | certificate | grading")->required();
  c_plot->add_option("--out", plot_out);
  c_plot->add_option("--seed", global_seed);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return config_error;
  }

  try {
    if (c_sim->parsed()) return do_simulate(sim, out);
    if (c_orb->parsed()) return do_orbits(orb, out, err);
    if (c_idx->parsed()) return do_index(idx, out);
    if (c_cert->parsed()) return do_certify(cert, out);
    if (c_sb->parsed()) return do_sbounds(norm_beta, min_f, sb_out, out);
    if (c_r0->parsed()) return do_r0(r0_system, r0, r0_out, out);
    if (c_ql->parsed()) return do_ql(ql, out);
    if (c_cx->parsed()) return do_complex(cx, out);
    if (c_ap->parsed()) return do_appendix(ap, out);
    if (c_plot->parsed()) return do_plot(plot_in, plot_kind, plot_out, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return config_error;
  } catch (const json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return config_error;
  } catch (const FrameError& e) {
    err << "numerical error (frame, t = " << e.time << "): " << e.what() << "\n";
    return numerical_error;
  } catch (const DegeneracyError& e) {
    err << "numerical error (degenerate, trace = " << e.trace << "): " << e.what() << "\n";
    return numerical_error;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical_error;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical_error;
  }
  return config_error;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace magnetolab::cli
