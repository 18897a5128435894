#include <benchmark/benchmark.h>

#include <random>

#include "magnetolab/complex.hpp"
#include "magnetolab/contact.hpp"
#include "magnetolab/flow.hpp"
#include "magnetolab/linearization.hpp"
#include "magnetolab/mapverify.hpp"
#include "magnetolab/systems.hpp"

using namespace magnetolab;

static void BM_IntegrateSphere(benchmark::State& state) {
  const auto sys = symmetric_sphere(1.0);
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.3, -0.2), 0.9);
  FlowOptions opt;
  opt.record = false;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, p0, double(state.range(0)), 1e-10, opt));
}
BENCHMARK(BM_IntegrateSphere)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_IntegrateQLTorus(benchmark::State& state) {
  const auto sys = build_ql_torus({}).system;
  const auto p0 = unit_point(sys.surface, 0, Vec2(0.37, 0.21), 0.3);
  FlowOptions opt;
  opt.record = false;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, p0, 10.0, 1e-10, opt));
}
BENCHMARK(BM_IntegrateQLTorus)->Unit(benchmark::kMillisecond);

static void BM_EllipticBumpIndex(benchmark::State& state) {
  const auto sys = elliptic_bump_torus();
  const auto orbit = elliptic_bump_orbit(sys);
  for (auto _ : state) benchmark::DoNotOptimize(analyze_path(linearized_flow(sys, orbit).path));
}
BENCHMARK(BM_EllipticBumpIndex)->Unit(benchmark::kMillisecond);

static void BM_CertifyQLTorus(benchmark::State& state) {
  const auto sys = build_ql_torus({}).system;
  CertifyGrid g;
  g.n = int(state.range(0));
  g.refine_witness = false;
  for (auto _ : state) benchmark::DoNotOptimize(certify(sys, 1.0, 1e-4, g));
}
BENCHMARK(BM_CertifyQLTorus)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_AcyclicityFeasible(benchmark::State& state) {
  OrbitInput x;
  x.id = "x";
  x.data.mu_bar = 1;
  x.data.type = OrbitType::elliptic;
  x.data.delta_tilde = 0.3183;  // no resonant iterate below 64
  x.period = 1.0;
  const auto table = build_table({x}, double(state.range(0)), MorseSpec::sphere());
  for (auto _ : state) benchmark::DoNotOptimize(acyclicity_feasible(table, {}));
}
BENCHMARK(BM_AcyclicityFeasible)->Arg(4)->Arg(16)->Arg(64);

static void BM_ApplyFs(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto p = random_sphere_point(rng, 0.1, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(apply_Fs(1.0, p));
}
BENCHMARK(BM_ApplyFs);
BENCHMARK_MAIN();
