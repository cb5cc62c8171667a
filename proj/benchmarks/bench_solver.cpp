// Full majorize-minimize solves and the per-iteration modular minimization,
// across horizons, on a fixed mid-size household.

#include <benchmark/benchmark.h>

#include "phasenilm/solver.hpp"
#include "phasenilm/verify.hpp"

namespace {

nilm::ProblemInstance make_instance(int horizon, std::uint64_t seed) {
  nilm::Rng rng(seed);
  nilm::RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.min_appliances = 4;
  spec.max_appliances = 4;
  spec.min_states = 3;
  spec.max_states = 3;
  spec.horizon = horizon;
  return nilm::random_instance(rng, spec);
}

void bench_solve(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const nilm::ProblemInstance inst = make_instance(horizon, 23);
  nilm::SolverOptions opts;
  opts.seed = 5;
  opts.record_trace = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilm::solve(inst, opts));
  }
  state.SetComplexityN(horizon);
}

void bench_modular_minimize(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const nilm::ProblemInstance inst = make_instance(horizon, 23);
  nilm::Rng rng(31);
  nilm::ModularVector m;
  m.values.resize(static_cast<std::size_t>(inst.ground_size()));
  for (double& v : m.values) v = rng.uniform(-100.0, 100.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilm::modular_minimize(inst, m));
  }
  state.SetComplexityN(horizon);
}

}  // namespace

BENCHMARK(bench_solve)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
BENCHMARK(bench_modular_minimize)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

BENCHMARK_MAIN();
