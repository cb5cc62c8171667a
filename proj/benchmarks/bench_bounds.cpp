// Scaling of the per-iteration bound construction. The chain subgradient is
// the solver's hot path; it should stay linear in ground-set size.

#include <benchmark/benchmark.h>

#include "phasenilm/bounds.hpp"
#include "phasenilm/verify.hpp"

namespace {

// 10 two-state appliances on two lines: 20 ground elements per tick.
nilm::ProblemInstance make_instance(int horizon) {
  nilm::HouseholdModel model;
  model.num_lines = 2;
  for (int i = 0; i < 10; ++i) {
    nilm::ApplianceModel a;
    a.name = "appliance_" + std::to_string(i + 1);
    a.mu = {0.0, 60.0 + 7.0 * i};
    a.weights = {0.5, 0.5};
    a.lambda = 1.0;
    model.appliances.push_back(std::move(a));
  }
  nilm::Rng rng(9);
  const nilm::AggregateSeries agg = nilm::random_aggregate(rng, 2, horizon, 400.0);
  return nilm::build_instance(model, agg);
}

void bench_subgradient(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const nilm::ProblemInstance inst = make_instance(horizon);
  nilm::Rng rng(17);
  const nilm::StateAssignment y = nilm::random_assignment(rng, inst.model, horizon);
  const nilm::Permutation pi =
      nilm::permutation_from_set(inst.layout, y, nilm::TailPolicy::deterministic);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilm::subgradient_h(inst, y, pi));
  }
  state.SetComplexityN(inst.ground_size());
}

void bench_supergradient(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const nilm::ProblemInstance inst = make_instance(horizon);
  nilm::Rng rng(17);
  const nilm::StateAssignment y = nilm::random_assignment(rng, inst.model, horizon);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilm::supergradient_g(inst, y));
  }
  state.SetComplexityN(inst.ground_size());
}

void bench_full_bound(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const nilm::ProblemInstance inst = make_instance(horizon);
  nilm::Rng rng(17);
  const nilm::StateAssignment y = nilm::random_assignment(rng, inst.model, horizon);
  const nilm::Permutation pi =
      nilm::permutation_from_set(inst.layout, y, nilm::TailPolicy::deterministic);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nilm::modular_upper_bound_of_f(inst, y, pi));
  }
  state.SetComplexityN(inst.ground_size());
}

}  // namespace

BENCHMARK(bench_subgradient)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);
BENCHMARK(bench_supergradient)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);
BENCHMARK(bench_full_bound)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

BENCHMARK_MAIN();
