#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "magnetolab/systems.hpp"

namespace magnetolab::cli {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double get_number(const json& j, const char* key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
  return j[key].get<double>();
}

Vec2 get_vec2(const json& j, const char* key, const Vec2& dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  const auto& a = j[key];
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw ConfigError(where + "." + key + " must be a pair of numbers");
  return Vec2(a[0].get<double>(), a[1].get<double>());
}

json vec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

BumpProfile profile_from_json(const json& j, const std::string& where) {
  require_keys(j, {"shape", "r0", "width", "sharpness", "shoulder", "shoulder_scale", "edge"}, where);
  BumpProfile b;
  const std::string shape = j.value("shape", "exponential");
  if (shape == "exponential")
    b.shape = BumpProfile::Shape::exponential;
  else if (shape == "shouldered")
    b.shape = BumpProfile::Shape::shouldered;
  else
    throw ConfigError(where + ".shape must be exponential or shouldered");
  b.r0 = get_number(j, "r0", 0.0, where);
  b.width = get_number(j, "width", 1.0, where);
  b.sharpness = get_number(j, "sharpness", 1.0, where);
  b.shoulder = get_number(j, "shoulder", 0.0, where);
  b.shoulder_scale = get_number(j, "shoulder_scale", 0.05, where);
  b.edge = get_number(j, "edge", 0.0, where);
  if (!(b.width > 0.0)) throw ConfigError(where + ".width must be positive");
  return b;
}

json profile_to_json(const BumpProfile& b) {
  return {{"shape", b.shape == BumpProfile::Shape::shouldered ? "shouldered" : "exponential"},
          {"r0", b.r0},
          {"width", b.width},
          {"sharpness", b.sharpness},
          {"shoulder", b.shoulder},
          {"shoulder_scale", b.shoulder_scale},
          {"edge", b.edge}};
}

FourierSeries fourier_from_json(const json& j, const std::string& where) {
  require_keys(j, {"kind", "c0", "terms"}, where);
  FourierSeries f;
  f.c0 = get_number(j, "c0", 0.0, where);
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw ConfigError(where + ".terms must be an array");
    for (const auto& t : j["terms"]) {
      require_keys(t, {"k", "a", "b"}, where + ".terms[]");
      const Vec2 k = get_vec2(t, "k", Vec2::Zero(), where + ".terms[]");
      if (k.x() != std::round(k.x()) || k.y() != std::round(k.y()))
        throw ConfigError(where + ".terms[].k must hold integers");
      f.terms.push_back({int(k.x()), int(k.y()), get_number(t, "a", 0.0, where), get_number(t, "b", 0.0, where)});
    }
  }
  return f;
}

json fourier_to_json(const FourierSeries& f) {
  json terms = json::array();
  for (const auto& t : f.terms) terms.push_back({{"k", {t.kx, t.ky}}, {"a", t.a}, {"b", t.b}});
  return {{"kind", "fourier"}, {"c0", f.c0}, {"terms", terms}};
}

ScalarField field_from_json(const json& j, double orientation) {
  const std::string where = "f";
  if (j.is_number()) return ScalarField::make_constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("f must be a number or an object with a kind");
  const std::string kind = j["kind"].get<std::string>();
  ScalarField f;
  if (kind == "constant") {
    require_keys(j, {"kind", "value"}, where);
    return ScalarField::make_constant(get_number(j, "value", 0.0, where));
  }
  if (kind == "fourier") {
    f.kind = ScalarField::Kind::fourier;
    f.fourier = fourier_from_json(j, where);
    return f;
  }
  if (kind == "radial_bump") {
    require_keys(j, {"kind", "center", "amplitude", "offset", "profile"}, where);
    f.kind = ScalarField::Kind::radial_bump;
    f.center = get_vec2(j, "center", Vec2(0.5, 0.5), where);
    f.amplitude = get_number(j, "amplitude", 0.0, where);
    f.constant = get_number(j, "offset", 0.0, where);
    if (!j.contains("profile")) throw ConfigError("f.profile is required");
    f.profile = profile_from_json(j["profile"], "f.profile");
    return f;
  }
  if (kind == "ql_density") {
    require_keys(j, {"kind", "center", "profile"}, where);
    f.kind = ScalarField::Kind::ql_density;
    f.center = get_vec2(j, "center", Vec2(0.5, 0.5), where);
    if (!j.contains("profile")) throw ConfigError("f.profile is required");
    f.profile = profile_from_json(j["profile"], "f.profile");
    f.orientation = orientation;
    return f;
  }
  throw ConfigError("unknown f kind '" + kind + "'");
}

json field_to_json(const ScalarField& f) {
  switch (f.kind) {
    case ScalarField::Kind::constant: return {{"kind", "constant"}, {"value", f.constant}};
    case ScalarField::Kind::fourier: return fourier_to_json(f.fourier);
    case ScalarField::Kind::radial_bump:
      return {{"kind", "radial_bump"},
              {"center", vec2(f.center)},
              {"amplitude", f.amplitude},
              {"offset", f.constant},
              {"profile", profile_to_json(f.profile)}};
    case ScalarField::Kind::ql_density:
      return {{"kind", "ql_density"}, {"center", vec2(f.center)}, {"profile", profile_to_json(f.profile)}};
  }
  return nullptr;
}

OneForm beta_from_json(const json& j, double orientation) {
  const std::string where = "beta";
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("beta must be null or an object with a kind");
  OneForm b;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "zero") {
    require_keys(j, {"kind", "gauge"}, where);
  } else if (kind == "constant") {
    require_keys(j, {"kind", "value", "gauge"}, where);
    b.kind = OneForm::Kind::constant;
    b.constant = get_vec2(j, "value", Vec2::Zero(), where);
  } else if (kind == "ql") {
    require_keys(j, {"kind", "center", "profile", "gauge"}, where);
    b.kind = OneForm::Kind::ql;
    b.center = get_vec2(j, "center", Vec2(0.5, 0.5), where);
    if (!j.contains("profile")) throw ConfigError("beta.profile is required");
    b.profile = profile_from_json(j["profile"], "beta.profile");
  } else if (kind == "poisson") {
    require_keys(j, {"kind", "density", "gauge"}, where);
    b.kind = OneForm::Kind::poisson;
    if (!j.contains("density")) throw ConfigError("beta.density is required");
    b.density = fourier_from_json(j["density"], "beta.density");
    if (!b.density.zero_mean()) throw NotExactError("poisson primitive needs a zero-mean density");
    b.orientation = orientation;
  } else {
    throw ConfigError("unknown beta kind '" + kind + "'");
  }
  if (j.contains("gauge")) b.gauge = fourier_from_json(j["gauge"], "beta.gauge");
  return b;
}

json beta_to_json(const OneForm& b) {
  json j;
  switch (b.kind) {
    case OneForm::Kind::zero: j = {{"kind", "zero"}}; break;
    case OneForm::Kind::constant: j = {{"kind", "constant"}, {"value", vec2(b.constant)}}; break;
    case OneForm::Kind::ql:
      j = {{"kind", "ql"}, {"center", vec2(b.center)}, {"profile", profile_to_json(b.profile)}};
      break;
    case OneForm::Kind::poisson: j = {{"kind", "poisson"}, {"density", fourier_to_json(b.density)}}; break;
  }
  if (b.has_gauge()) j["gauge"] = fourier_to_json(b.gauge);
  return j;
}

const std::string kBuiltin = "builtin:";

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + origin + " at " + line_col(text, e.byte) + ": " + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

MagneticSystem system_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (!starts_with(s, kBuiltin)) throw ConfigError("system string must be builtin:<name>");
    return builtin_system(s.substr(kBuiltin.size()));
  }
  require_keys(j, {"surface", "f", "beta", "s", "orientation", "a"}, "system");
  if (!j.contains("surface") || !j.contains("f")) throw ConfigError("system needs surface and f");
  const auto& sj = j["surface"];
  require_keys(sj, {"kind", "params"}, "system.surface");
  if (!sj.contains("kind") || !sj["kind"].is_string()) throw ConfigError("system.surface.kind must be a string");
  const SurfaceKind kind = surface_kind_from_string(sj["kind"].get<std::string>());
  MagneticSystem sys;
  json params = sj.value("params", json::object());
  switch (kind) {
    case SurfaceKind::sphere:
      require_keys(params, {}, "system.surface.params");
      sys.surface = SurfaceModel::sphere();
      break;
    case SurfaceKind::flat_torus:
      require_keys(params, {}, "system.surface.params");
      sys.surface = SurfaceModel::flat_torus();
      break;
    case SurfaceKind::conformal_torus:
      require_keys(params, {"amplitude"}, "system.surface.params");
      sys.surface = SurfaceModel::conformal_torus(get_number(params, "amplitude", 0.0, "system.surface.params"));
      break;
    case SurfaceKind::halfplane:
      require_keys(params, {}, "system.surface.params");
      sys.surface = SurfaceModel::halfplane();
      break;
  }
  const double o = get_number(j, "orientation", 1.0, "system");
  sys.surface.set_orientation(o);
  sys.f = field_from_json(j["f"], o);
  if (j.contains("beta") && !j["beta"].is_null()) sys.beta = beta_from_json(j["beta"], o);
  sys.s = get_number(j, "s", 1.0, "system");
  sys.a = get_number(j, "a", 0.0, "system");
  sys.validate();
  return sys;
}

json system_to_json(const MagneticSystem& sys) {
  json surface = {{"kind", to_string(sys.surface.kind())}, {"params", json::object()}};
  if (sys.surface.kind() == SurfaceKind::conformal_torus) surface["params"]["amplitude"] = sys.surface.amplitude();
  return {{"surface", surface},
          {"f", field_to_json(sys.f)},
          {"beta", sys.beta ? beta_to_json(*sys.beta) : json(nullptr)},
          {"s", sys.s},
          {"a", sys.a},
          {"orientation", sys.surface.orientation()}};
}

MagneticSystem load_system(const std::string& ref) {
  if (starts_with(ref, kBuiltin)) return builtin_system(ref.substr(kBuiltin.size()));
  if (!ref.empty() && (ref.front() == '{' || ref.front() == '"')) return system_from_json(parse_json_text(ref));
  return system_from_json(read_json_file(ref));
}

PhasePoint point_from_json(const MagneticSystem& sys, const json& j) {
  require_keys(j, {"chart", "q", "v"}, "x0");
  const int chart = j.value("chart", 0);
  if (chart < 0 || chart >= sys.surface.chart_count()) throw ConfigError("x0.chart out of range");
  return make_phase_point(sys.surface, chart, get_vec2(j, "q", Vec2::Zero(), "x0"), get_vec2(j, "v", Vec2::Zero(), "x0"));
}

json point_to_json(const PhasePoint& p) { return {{"chart", p.chart}, {"q", vec2(p.q)}, {"v", vec2(p.v)}, {"rho", p.rho}}; }

OrbitRef load_orbit(const std::string& ref) {
  OrbitRef r;
  if (starts_with(ref, kBuiltin)) {
    const std::string name = ref.substr(kBuiltin.size());
    if (name == "elliptic-bump") {
      r.system = elliptic_bump_torus();
      r.orbit = elliptic_bump_orbit(r.system);
    } else if (name == "ql-delta") {
      auto ql = build_ql_torus({});
      r.system = ql.system;
      r.orbit = ql.delta;
    } else if (name == "halfplane-ray") {
      r.system = symmetric_genus(0.5);
      r.orbit = halfplane_ray_orbit(r.system, 1.0);
    } else if (name == "sphere-circle") {
      r.system = symmetric_sphere(1.0);
      const PhasePoint x0 = make_phase_point(r.system.surface, 0, Vec2::Zero(), Vec2(0.5, 0.0));
      r.orbit = make_closed_orbit(r.system, x0, 2.0 * std::numbers::pi / std::sqrt(2.0), 1e-12);
    } else {
      throw ConfigError("unknown built-in orbit " + name);
    }
    return r;
  }
  const json j = (!ref.empty() && ref.front() == '{') ? parse_json_text(ref) : read_json_file(ref);
  require_keys(j, {"system", "x0", "period"}, "orbit");
  if (!j.contains("system") || !j.contains("x0") || !j.contains("period"))
    throw ConfigError("orbit needs system, x0 and period");
  r.system = system_from_json(j["system"]);
  const PhasePoint x0 = point_from_json(r.system, j["x0"]);
  const double T = get_number(j, "period", 0.0, "orbit");
  if (!(T > 0.0)) throw ConfigError("orbit.period must be positive");
  r.orbit = make_closed_orbit(r.system, x0, T, 1e-12);
  return r;
}

json orbit_to_json(const ClosedOrbit& o) {
  json crossings = json::array();
  for (const auto& c : o.crossings) crossings.push_back({c[0], c[1]});
  return {{"x0", point_to_json(o.x0)},
          {"period", o.period},
          {"residual", o.residual},
          {"homotopy", o.homotopy},
          {"winding", {o.winding[0], o.winding[1]}},
          {"prime", o.prime},
          {"iterate", o.iterate},
          {"section", {{"u", o.u}, {"theta", o.theta}}},
          {"crossings", crossings}};
}

std::vector<OrbitInput> orbit_inputs_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("orbits must be a JSON array");
  std::vector<OrbitInput> out;
  for (const auto& e : j) {
    require_keys(e, {"id", "mu_bar", "type", "delta_tilde", "negative", "period", "homotopy"}, "orbits[]");
    if (!e.contains("id") || !e.contains("mu_bar") || !e.contains("period"))
      throw ConfigError("orbit entries need id, mu_bar and period");
    OrbitInput o;
    o.id = e["id"].get<std::string>();
    o.data.mu_bar = e["mu_bar"].get<int>();
    const std::string type = e.value("type", "hyperbolic");
    if (type == "elliptic")
      o.data.type = OrbitType::elliptic;
    else if (type == "hyperbolic")
      o.data.type = OrbitType::hyperbolic;
    else
      throw ConfigError("orbit type must be elliptic or hyperbolic");
    o.data.delta_tilde = get_number(e, "delta_tilde", 0.0, "orbits[]");
    o.data.negative = e.value("negative", false);
    if (o.data.type == OrbitType::elliptic && !e.contains("delta_tilde"))
      throw ConfigError("elliptic orbit " + o.id + " needs delta_tilde");
    if (o.data.type == OrbitType::elliptic && 2 * int(std::floor(o.data.delta_tilde)) + 1 != o.data.mu_bar)
      throw ConfigError("orbit " + o.id + ": mu_bar disagrees with delta_tilde");
    o.period = get_number(e, "period", 0.0, "orbits[]");
    // Orbit search reports say "contractible"; tables use "0" for that class.
    o.homotopy = e.value("homotopy", "0");
    if (o.homotopy == "contractible") o.homotopy = "0";
    out.push_back(o);
  }
  return out;
}

json certificate_to_json(const ContactCertificate& c) {
  return {{"surface", c.surface},
          {"s", c.s},
          {"a", c.a},
          {"grid", c.grid_n},
          {"grid_angle", c.grid_angle},
          {"min_value", c.min_value},
          {"margin", c.margin},
          {"bound", c.bound},
          {"positive", c.positive},
          {"witness", {{"chart", c.witness_chart}, {"q", vec2(c.witness_q)}, {"angle", c.witness_angle},
                       {"value", c.witness_value}}}};
}

json table_to_json(const GeneratorTable& t) {
  json rows = json::array();
  for (const auto& g : t.entries) {
    const char* kind = g.kind == GeneratorKind::morse ? "morse" : (g.kind == GeneratorKind::orbit_plus ? "plus" : "minus");
    rows.push_back({{"id", g.id},
                    {"degree", g.degree},
                    {"period", g.period},
                    {"kind", kind},
                    {"orbit", g.orbit},
                    {"iterate", g.iterate},
                    {"mu_bar", g.mu_bar},
                    {"good", g.good}});
  }
  return rows;
}

json appendix_to_json(const AppendixReport& r) {
  return {{"s", r.s},
          {"samples", r.samples},
          {"resampled", r.resampled},
          {"max_residual",
           {{"pullback", r.max_pullback},
            {"phi_pullback", r.max_phi_pullback},
            {"closed_form", r.max_closed_form},
            {"speed_law", r.max_speed_law},
            {"inverse", r.max_inverse},
            {"liouville_radial", r.max_liouville},
            {"radial_drift", r.max_radial_drift}}},
          {"convergence_order", {{"pullback", r.convergence_order}}}};
}

}  // namespace magnetolab::cli
