#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "magnetolab/systems.hpp"

using namespace magnetolab;
using magnetolab::cli::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("magnetolab_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 2); }

TEST(Cli, UnknownOptionIsUsageError) { EXPECT_EQ(run({"simulate", "--bogus"}).code, 2); }

TEST(Cli, SimulateZeroTimeSingleRow) {
  const auto r = run({"simulate", "--system", "builtin:flat-torus", "--init", "0.1,0.2,1,0", "--time", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "t,chart,q1,q2,v1,v2,rho\n0,0,0.10000000000000001,0.20000000000000001,1,0,1\n");
}

TEST(Cli, SimulateCsvAndTrajectoryPlot) {
  const std::string csv = temp_path("traj.csv"), svg = temp_path("traj.svg");
  auto r = run({"simulate", "--system", "builtin:symmetric-sphere", "--init", "0.2,0.1,1,0", "--time", "3", "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"plot", "--in", csv, "--kind", "trajectory", "--out", svg});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(svg);
  std::string head;
  std::getline(in, head);
  EXPECT_EQ(head.rfind("<svg", 0), 0u);
  // A CSV is not a certificate sweep.
  EXPECT_EQ(run({"plot", "--in", csv, "--kind", "certificate"}).code, 2);
  EXPECT_EQ(run({"plot", "--in", csv, "--kind", "histogram"}).code, 2);
  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

TEST(Cli, MalformedJsonReportsPosition) {
  const std::string path = temp_path("bad.json");
  write_file(path, "{\n  \"s\": 1.0,\n  \"surface\": oops\n}\n");
  const auto r = run({"simulate", "--system", path, "--init", "0,0,1,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  std::remove(path.c_str());
}

TEST(Cli, UnknownKeyRejected) {
  const auto r = run({"simulate", "--system", R"({"surface":{"kind":"flat-torus"},"f":1,"s":1,"colour":2})", "--init",
                      "0,0,1,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST(Cli, DomainViolationIsNumericalError) {
  const auto r = run({"simulate", "--system", "builtin:symmetric-genus", "--init", "0,-1,1,0", "--time", "1"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, SBoundsJson) {
  const auto r = run({"sbounds", "--norm-beta", "0", "--min-f", "1"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["s_minus"], "inf");
  EXPECT_EQ(j["s_plus"], 0.0);
}

TEST(Cli, CertifyExitCodeFollowsVerdict) {
  EXPECT_EQ(run({"certify", "--system", "builtin:symmetric-genus", "--s", "0.9", "--grid", "32", "--angles", "16"}).code, 0);
  EXPECT_EQ(run({"certify", "--system", "builtin:symmetric-genus", "--s", "1.1", "--grid", "32", "--angles", "16"}).code, 1);
  const auto sweep = run({"certify", "--system", "builtin:symmetric-genus", "--s", "0.9,1.1", "--grid", "32", "--angles", "16"});
  ASSERT_EQ(sweep.code, 0);
  EXPECT_EQ(json::parse(sweep.out)["grid"].size(), 2u);
}

TEST(Cli, IndexOfBuiltinOrbit) {
  const auto r = run({"index", "--orbit", "builtin:elliptic-bump", "--iterates", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["mu_bar"], 1);
  EXPECT_EQ(j["type"], "elliptic");
  EXPECT_EQ(j["table"].size(), 4u);
  EXPECT_EQ(j["mismatches"], 0);
}

TEST(Cli, OrbitsOnSphere) {
  const auto r = run({"orbits", "--system", "builtin:symmetric-sphere", "--u-range", "0.05,0.8", "--n-u", "2",
                      "--n-theta", "4", "--t-max", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  ASSERT_FALSE(j.empty());
  EXPECT_NEAR(j[0]["period"].get<double>(), 2 * 3.14159265358979323846 / std::sqrt(2.0), 1e-6);
}

TEST(Cli, ComplexChecks) {
  auto r = run({"complex", "--check", "mb=1,2,2", "--equivariant"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["verdict"]["feasible"].get<bool>());
  const std::string orbits = R"([{"id":"x","mu_bar":2,"type":"hyperbolic","period":1}])";
  r = run({"complex", "--orbits", orbits, "--cutoff", "3", "--morse", "sphere", "--check", "acyclic"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(json::parse(r.out)["verdict"]["feasible"].get<bool>());
  const std::string ell = R"([{"id":"x","mu_bar":1,"type":"elliptic","delta_tilde":0.3,"period":1}])";
  r = run({"complex", "--orbits", ell, "--cutoff", "4", "--morse", "sphere", "--check",
           R"(bv={"sources":["x^1+","x^3+"]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["verdict"]["contradiction"].get<bool>());
  EXPECT_EQ(run({"complex", "--check", "sideways"}).code, 2);
  // mu_bar must agree with the rotation number.
  EXPECT_EQ(run({"complex", "--orbits", R"([{"id":"x","mu_bar":3,"type":"elliptic","delta_tilde":0.3,"period":1}])"}).code, 2);
}

TEST(Cli, GradingPlot) {
  const std::string path = temp_path("cx.json");
  const auto r = run({"complex", "--morse", "torus", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = run({"plot", "--in", path, "--kind", "grading"});
  EXPECT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("<rect"), std::string::npos);
  std::remove(path.c_str());
}

TEST(Cli, VerifyAppendixSmall) {
  const auto r = run({"verify-appendix", "--s", "1", "--samples", "8", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(run({"verify-appendix", "--s", "0", "--samples", "2"}).code, 2);
}

TEST(Config, SystemRoundTrip) {
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_system(name);
    const auto j = cli::system_to_json(sys);
    const auto back = cli::system_from_json(j);
    EXPECT_EQ(cli::system_to_json(back), j) << name;
    const Vec2 q(0.31, 0.77);
    EXPECT_DOUBLE_EQ(back.density(0, q), sys.density(0, q)) << name;
  }
}

TEST(Config, NumbersAndInfinities) {
  EXPECT_EQ(cli::number(1.5), 1.5);
  EXPECT_EQ(cli::number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(cli::number(-std::numeric_limits<double>::infinity()), "-inf");
}
