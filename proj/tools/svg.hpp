#pragma once

#include <string>

#include "config.hpp"

namespace magnetolab::cli {

// Base projection of a simulate CSV; a new polyline starts at chart changes.
std::string trajectory_svg(const std::string& csv_text);
// Certificate sweep {"grid": [{s, a, positive, bound}, ...]} as an (s, a) map.
std::string certificate_svg(const json& j);
// Degree histogram of a complex report's generator table.
std::string grading_svg(const json& j);

}  // namespace magnetolab::cli
