#include <benchmark/benchmark.h>

#include <cmath>

#include "dyntun/analysis.hpp"
#include "dyntun/classical.hpp"
#include "dyntun/floquet.hpp"
#include "dyntun/params.hpp"
#include "dyntun/quantum.hpp"

namespace {

using namespace dyntun;

// Default time step unless `steps` is given.
quantum::Model driven_model(int n, long steps = 0) {
  quantum::Model m;
  m.potential = quantum::Potential::driven(1.2, 0.9);
  m.hbar_eff = 0.5;
  m.grid = {n, 8.0};
  if (steps > 0) m.dt = quantum::kDrivePeriod / static_cast<double>(steps);
  return m;
}

void BM_EvolveOnePeriod(benchmark::State& state) {
  const auto m = driven_model(static_cast<int>(state.range(0)));
  quantum::Evolver ev(m);
  auto psi = analysis::coherent_state(1.78, 0.0, 0.5, 0.5, m.grid);
  double t = 0.0;
  for (auto _ : state) {
    t += quantum::kDrivePeriod;
    psi = ev.evolve(psi, t);
    benchmark::DoNotOptimize(psi);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EvolveOnePeriod)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

// Small grids only; the n = 1024 build takes tens of seconds.
void BM_BuildPropagator(benchmark::State& state) {
  const auto m = driven_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(quantum::build_propagator(m));
}
BENCHMARK(BM_BuildPropagator)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_FloquetDecompose(benchmark::State& state) {
  const auto blocks = quantum::build_propagator(driven_model(static_cast<int>(state.range(0)), 256));
  for (auto _ : state) benchmark::DoNotOptimize(quantum::floquet_decompose(blocks));
}
BENCHMARK(BM_FloquetDecompose)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_HeffMap(benchmark::State& state) {
  params::HeffSweep sw;
  sw.base.m = 1e-15;
  sw.base.omega_m = 2 * std::numbers::pi * 10e3;
  sw.base.g4 = 2 * std::numbers::pi * 1e39;
  sw.base.lambda_l = 1064e-9;
  sw.base.P0 = 0.5e-3;
  sw.base.PA = 0.0;
  sw.base.gamma_c = 10 * sw.base.omega_m;
  sw.base.Omega = sw.base.omega_m / std::sqrt(1.2);
  sw.axis1 = {params::SweepParameter::P0, 12e-6, 1.2e-3, 100, true};
  sw.axis2 = {params::SweepParameter::omega_m, 2 * std::numbers::pi * 1e3,
              2 * std::numbers::pi * 100e3, 100, true};
  sw.constraints.gamma_c_over_omega_m = 10.0;
  sw.constraints.kappa = 1.2;
  for (auto _ : state) benchmark::DoNotOptimize(params::heff_map(sw));
  state.SetItemsProcessed(state.iterations() * 100 * 100);
}
BENCHMARK(BM_HeffMap)->Unit(benchmark::kMillisecond);

void BM_PoincareSection(benchmark::State& state) {
  const auto seeds = classical::seed_lattice({-3.0, 3.0, -3.0, 3.0, 10, 10});
  const classical::Drive d{1.2, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(classical::poincare_section(seeds, 20, d));
  state.SetItemsProcessed(state.iterations() * 100 * 20);
}
BENCHMARK(BM_PoincareSection)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
