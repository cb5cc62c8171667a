#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phasenilm/bounds.hpp"
#include "phasenilm/instance.hpp"

namespace nilm {

enum class InitPolicy {
  random,           // seeded uniform state per (appliance, time)
  per_time_greedy,  // per-tick residual minimization, two coordinate sweeps
  given,            // start from SolverOptions::init_assignment
};

struct SolverOptions {
  int max_iters = 100;  // bound minimizations before giving up
  std::uint64_t seed = 0;
  TailPolicy tail_policy = TailPolicy::shuffled;
  InitPolicy init = InitPolicy::random;
  std::optional<StateAssignment> init_assignment;  // required iff init == given
  bool record_trace = true;
};

enum class StopReason { converged, max_iters };

struct SolveTrace {
  // f(S^k) for k = 0..iterations when record_trace is set; the sequence is
  // non-increasing. residual_costs holds the least-squares convention at the
  // same iterates.
  std::vector<double> set_costs;
  std::vector<double> residual_costs;
  int iterations = 0;
  StopReason stop_reason = StopReason::converged;
};

struct SolveResult {
  StateAssignment states;
  SolveTrace trace;
};

// Exact minimizer of the modular function induced by m over the
// one-state-per-(appliance, time) family: per block, the state with the
// smallest entry, ties toward the smallest state index. O(N*T).
StateAssignment modular_minimize(const ProblemInstance& inst, const ModularVector& m);

// Majorize-minimize loop: from the initial assignment, repeatedly build the
// modular upper bound of f tight at the current set (permutation head = the
// set, tail per tail_policy reseeded every iteration) and move to its exact
// minimizer. Stops when the set repeats or after max_iters minimizations.
// Identical (instance, options) give bit-identical results.
SolveResult solve(const ProblemInstance& inst, const SolverOptions& opts);

struct DisaggregationResult {
  StateAssignment states;
  int num_lines = 0;
  std::vector<double> xhat;  // L x T estimated appliance watts, appliance-major
  std::vector<double> yhat;  // T x R reconstructed line aggregates, time-major
  SolveTrace trace;

  double xhat_at(int i, int t) const { return xhat[static_cast<std::size_t>(i) * states.horizon + t]; }
  double yhat_at(int t, int r) const { return yhat[static_cast<std::size_t>(t) * num_lines + r]; }
};

// solve() plus the watt-level read-out: xhat(i,t) = mu_i(state), and the
// per-line reconstruction yhat(t,r) = sum_i w_i^r xhat(i,t).
DisaggregationResult disaggregate(const HouseholdModel& model, const AggregateSeries& agg,
                                  const SolverOptions& opts);

}  // namespace nilm
