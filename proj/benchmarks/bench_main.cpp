#include <benchmark/benchmark.h>

#include <random>

#include "pbeam/coefficients.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/spectral_operator.hpp"
#include "pbeam/transforms.hpp"

using namespace pbeam;

namespace {

CoefficientProfile constant(int elements) {
  const ProfileRecipe recipe{constant_preset(), 1.0, false, false};
  return recipe.build(SpatialGrid::composite_lobatto(elements));
}

SpectralContext context(int modes, int m_max, int elements) {
  CoefficientProfile p = constant(elements);
  BeamSpectrum s = solve_eigenproblem(p, modes);
  LambdaLattice lat = assemble_lattice(s, FrequencySpec::make(1, 1, m_max));
  return {std::move(p), std::move(s), std::move(lat)};
}

void BM_Eigensolve(benchmark::State& state) {
  const CoefficientProfile p = constant(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eigenproblem(p, 20));
}
BENCHMARK(BM_Eigensolve)->Arg(128)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Lattice(benchmark::State& state) {
  std::vector<double> mu;
  for (int n = 1; n <= 64; ++n) mu.push_back(static_cast<double>(n) * n * n * n);
  const FrequencySpec freq = FrequencySpec::make(1, 1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_lattice(mu, freq, 1e-9));
}
BENCHMARK(BM_Lattice)->Arg(64)->Arg(256)->Arg(1024);

void BM_Residual(benchmark::State& state) {
  const SpectralContext c = context(8, static_cast<int>(state.range(0)), 256);
  std::mt19937_64 rng(1);
  const FourierField u = random_hermitian_field(c.lattice.m_max(), 8, rng);
  const Nonlinearity g = tanh_nonlinearity(0.5);
  const ForcingSpec spec = decompose_forcing(manufactured_forcing(u, g, c), c);
  const FourierField u0 = c.zero_field();
  for (auto _ : state) benchmark::DoNotOptimize(residual(u0, 0.1, spec, g, c));
}
BENCHMARK(BM_Residual)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_RegularizedSolve(benchmark::State& state) {
  const SpectralContext c = context(4, static_cast<int>(state.range(0)), 256);
  const Nonlinearity g = tanh_nonlinearity(0.5);
  FourierField u = c.zero_field();
  add_real_mode(u, c.freq(), 1, 1, 0.1);
  add_real_mode(u, c.freq(), 0, 2, 0.05);
  const ForcingSpec spec = decompose_forcing(manufactured_forcing(u, g, c), c);
  const SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_regularized(0.01, spec, g, cfg, c.zero_field(), c));
  }
}
BENCHMARK(BM_RegularizedSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Continuation(benchmark::State& state) {
  const SpectralContext c = context(4, 8, 256);
  const Nonlinearity g = tanh_nonlinearity(0.5);
  FourierField u = c.zero_field();
  add_real_mode(u, c.freq(), 1, 1, 0.1);
  const ForcingSpec spec = decompose_forcing(manufactured_forcing(u, g, c), c);
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(continuation_solve(spec, g, cfg, c));
}
BENCHMARK(BM_Continuation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
