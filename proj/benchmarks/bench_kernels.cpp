// Microbenchmarks for the numerical hot paths: the confluent special
// function, the slice profile, a boundary-flux quadrature, one Monte Carlo
// flight, and one finite-volume solver step.
#include <benchmark/benchmark.h>

#include <utility>

#include "kfp/fluxes.hpp"
#include "kfp/particle.hpp"
#include "kfp/profiles.hpp"
#include "kfp/rng.hpp"
#include "kfp/solver.hpp"
#include "kfp/specfun.hpp"

namespace {

void bm_tricomi_u(benchmark::State& state) {
  double z = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kfp::specfun::tricomi_u(0.66, 2.0 / 3.0, z));
    z = z < 40.0 ? z + 0.37 : 0.1;
  }
}
BENCHMARK(bm_tricomi_u);

void bm_lambda_profile(benchmark::State& state) {
  double zeta = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kfp::profiles::lambda_profile(-0.7, zeta));
    zeta = zeta < 8.0 ? zeta + 0.173 : -8.0;
  }
}
BENCHMARK(bm_lambda_profile);

void bm_boundary_flux(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        kfp::fluxes::boundary_flux(-2.0 / 3.0, kfp::fluxes::FluxBox{1.0, 1.0, 0.1}));
}
BENCHMARK(bm_boundary_flux);

void bm_mc_flight(benchmark::State& state) {
  kfp::particle::WalkConfig cfg;
  cfg.t_max = 1e9;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    kfp::rng::NormalStream noise(42, stream++);
    benchmark::DoNotOptimize(
        kfp::particle::run_to_wall(kfp::particle::ParticleState{0.0, 1.0, 0.0}, cfg, noise));
  }
}
BENCHMARK(bm_mc_flight);

void bm_solver_step(benchmark::State& state) {
  using namespace kfp::solver;
  Grid g = build_grid(0.1, 2.0, 2.5, 96, 64, 1e-3, 0.02);
  g.rho_cut = 8e-3;
  SolverState s = initialize(g, ProfileCutoff{-2.0 / 3.0, 1.0});
  const double dt = 0.9 * cfl_limit(g);
  for (auto _ : state) {
    s = advance(std::move(s), g, dt);
    benchmark::DoNotOptimize(s.mass_ledger);
  }
}
BENCHMARK(bm_solver_step);

}  // namespace

BENCHMARK_MAIN();
