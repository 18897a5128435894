#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace magnetolab::cli {

namespace {

constexpr double kW = 640, kH = 480, kPad = 48;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); }
  double py(double y) const { return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad); }
};

Frame padded(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  return {x0, x1, y0, y1};
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
  os << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kW - 2 * kPad << "\" height=\""
     << kH - 2 * kPad << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& t, const char* anchor) {
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << t << "</text>\n";
  };
  label(kPad, kH - kPad + 16, fmt(f.x0), "start");
  label(kW - kPad, kH - kPad + 16, fmt(f.x1), "end");
  label(kPad - 4, kH - kPad, fmt(f.y0), "end");
  label(kPad - 4, kPad + 10, fmt(f.y1), "end");
  label(kW / 2, kH - 12, xl, "middle");
  label(14, kH / 2, yl, "middle");
}

}  // namespace

std::string trajectory_svg(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,chart,q1,q2,v1,v2,rho", 0) != 0)
    throw ConfigError("trajectory plot needs a simulate CSV");
  std::vector<std::vector<std::pair<double, double>>> runs;
  int last_chart = -1;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, q1, q2, v1, v2, rho;
    int chart;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf,%lf,%lf", &t, &chart, &q1, &q2, &v1, &v2, &rho) != 7)
      throw ConfigError("malformed trajectory row: " + line);
    if (chart != last_chart) runs.emplace_back();
    last_chart = chart;
    runs.back().push_back({q1, q2});
    x0 = std::min(x0, q1), x1 = std::max(x1, q1), y0 = std::min(y0, q2), y1 = std::max(y1, q2);
  }
  if (runs.empty()) throw ConfigError("trajectory CSV has no rows");
  const Frame f = padded(x0, x1, y0, y1);
  std::ostringstream os;
  header(os, "trajectory (chart coordinates)");
  axes(os, f, "q1", "q2");
  for (const auto& r : runs) {
    os << "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << fmt(f.px(r[i].first)) << "," << fmt(f.py(r[i].second));
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string certificate_svg(const json& j) {
  if (!j.is_object() || !j.contains("grid") || !j["grid"].is_array() || j["grid"].empty())
    throw ConfigError("certificate plot needs a certify sweep with a grid array");
  std::set<double> ss, as;
  for (const auto& c : j["grid"]) {
    if (!c.contains("s") || !c.contains("a") || !c.contains("positive"))
      throw ConfigError("certificate grid entries need s, a and positive");
    ss.insert(c["s"].get<double>());
    as.insert(c["a"].get<double>());
  }
  const std::vector<double> sv(ss.begin(), ss.end()), av(as.begin(), as.end());
  auto edges = [](const std::vector<double>& v, std::size_t i) {
    const double lo = i == 0 ? v[0] - (v.size() > 1 ? 0.5 * (v[1] - v[0]) : 0.5) : 0.5 * (v[i - 1] + v[i]);
    const double hi = i + 1 == v.size() ? v[i] + (v.size() > 1 ? 0.5 * (v[i] - v[i - 1]) : 0.5) : 0.5 * (v[i] + v[i + 1]);
    return std::make_pair(lo, hi);
  };
  const Frame f = padded(edges(sv, 0).first, edges(sv, sv.size() - 1).second, edges(av, 0).first,
                         edges(av, av.size() - 1).second);
  std::ostringstream os;
  header(os, "contact certificate over (s, a)");
  for (const auto& c : j["grid"]) {
    const std::size_t i = std::size_t(std::lower_bound(sv.begin(), sv.end(), c["s"].get<double>()) - sv.begin());
    const std::size_t k = std::size_t(std::lower_bound(av.begin(), av.end(), c["a"].get<double>()) - av.begin());
    const auto [s0, s1] = edges(sv, i);
    const auto [a0, a1] = edges(av, k);
    os << "<rect x=\"" << fmt(f.px(s0)) << "\" y=\"" << fmt(f.py(a1)) << "\" width=\"" << fmt(f.px(s1) - f.px(s0))
       << "\" height=\"" << fmt(f.py(a0) - f.py(a1)) << "\" fill=\"" << (c["positive"].get<bool>() ? "#5aae61" : "#d6604d")
       << "\"/>\n";
  }
  axes(os, f, "s", "a");
  os << "</svg>\n";
  return os.str();
}

std::string grading_svg(const json& j) {
  if (!j.is_object() || !j.contains("table") || !j["table"].is_array())
    throw ConfigError("grading plot needs a complex report with a table");
  std::map<int, int> counts;
  for (const auto& g : j["table"]) {
    if (!g.contains("degree")) throw ConfigError("table entries need a degree");
    ++counts[g["degree"].get<int>()];
  }
  if (counts.empty()) throw ConfigError("generator table is empty");
  const int lo = counts.begin()->first, hi = counts.rbegin()->first;
  int top = 0;
  for (const auto& [d, c] : counts) top = std::max(top, c);
  const Frame f = padded(lo - 0.5, hi + 0.5, 0.0, top + 0.5);
  std::ostringstream os;
  header(os, "generators per degree");
  for (const auto& [d, c] : counts) {
    os << "<rect x=\"" << fmt(f.px(d - 0.4)) << "\" y=\"" << fmt(f.py(c)) << "\" width=\"" << fmt(f.px(d + 0.4) - f.px(d - 0.4))
       << "\" height=\"" << fmt(f.py(0) - f.py(c)) << "\" fill=\"#4d7fb8\"/>\n";
    os << "<text x=\"" << fmt(f.px(d)) << "\" y=\"" << fmt(kH - kPad + 30)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << d << "</text>\n";
  }
  axes(os, f, "degree", "count");
  os << "</svg>\n";
  return os.str();
}

}  // namespace magnetolab::cli
