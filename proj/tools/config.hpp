#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "magnetolab/complex.hpp"
#include "magnetolab/contact.hpp"
#include "magnetolab/linearization.hpp"
#include "magnetolab/mapverify.hpp"

namespace magnetolab::cli {

using nlohmann::json;

// Reads a JSON file; parse errors become ConfigError with line and column.
json read_json_file(const std::string& path);
json parse_json_text(const std::string& text, const std::string& origin = "<input>");

// System documents:
//   {"surface": {"kind": ..., "params": {...}}, "f": <field>, "beta": <one-form>|null,
//    "s": number, "orientation": +-1, "a": number}
// or the string "builtin:<name>". Unknown keys are rejected.
MagneticSystem system_from_json(const json& j);
json system_to_json(const MagneticSystem& sys);
// A file path, an inline JSON document, or builtin:<name>.
MagneticSystem load_system(const std::string& ref);

PhasePoint point_from_json(const MagneticSystem& sys, const json& j);
json point_to_json(const PhasePoint& p);

// {"system": ..., "x0": {"chart", "q", "v"}, "period": T} or builtin:<name>
// with name among elliptic-bump, ql-delta, halfplane-ray, sphere-circle.
struct OrbitRef {
  MagneticSystem system;
  ClosedOrbit orbit;
};
OrbitRef load_orbit(const std::string& ref);

json orbit_to_json(const ClosedOrbit& o);

// [{"id", "mu_bar", "type", "delta_tilde", "negative", "period", "homotopy"}]
std::vector<OrbitInput> orbit_inputs_from_json(const json& j);

json certificate_to_json(const ContactCertificate& c);
json table_to_json(const GeneratorTable& t);
json appendix_to_json(const AppendixReport& r);

// Strict key check used by every parser.
void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

// Finite numbers as JSON numbers, infinities as the strings "inf" / "-inf".
json number(double x);

}  // namespace magnetolab::cli
