#include "phasenilm/solver.hpp"

#include <stdexcept>
#include <string>

#include "phasenilm/rng.hpp"
#include "phasenilm/setfn.hpp"

namespace nilm {

StateAssignment modular_minimize(const ProblemInstance& inst, const ModularVector& m) {
  if (static_cast<int>(m.values.size()) != inst.ground_size()) {
    throw std::invalid_argument("modular_minimize: vector has " + std::to_string(m.values.size()) +
                                " entries, ground set has " + std::to_string(inst.ground_size()));
  }
  const int horizon = inst.horizon();
  const int n_appl = inst.model.num_appliances();

  StateAssignment s = StateAssignment::zeros(n_appl, horizon);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n_appl; ++i) {
      const int base = inst.layout.flat_index(i, 0, t);
      int best = 0;
      double best_val = m.values[base];
      for (int k = 1; k < inst.model.appliances[i].num_states(); ++k) {
        const double val = m.values[base + k];
        if (val < best_val) {  // strict: ties keep the smaller state index
          best_val = val;
          best = k;
        }
      }
      s.at(i, t) = best;
    }
  }
  return s;
}

namespace {

StateAssignment random_init(const ProblemInstance& inst, std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0));
  StateAssignment s = StateAssignment::zeros(inst.model.num_appliances(), inst.horizon());
  for (int i = 0; i < s.num_appliances; ++i) {
    const int n_states = inst.model.appliances[i].num_states();
    for (int t = 0; t < s.horizon; ++t) {
      s.at(i, t) = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_states)));
    }
  }
  return s;
}

// Independently per tick: start all appliances at state 0 and run two
// coordinate sweeps, each picking the state that minimizes that tick's
// squared residual given the others. Deterministic; ties keep the smaller
// state.
StateAssignment greedy_init(const ProblemInstance& inst) {
  const int horizon = inst.horizon();
  const int lines = inst.num_lines();
  const int n_appl = inst.model.num_appliances();

  StateAssignment s = StateAssignment::zeros(n_appl, horizon);
  std::vector<double> sig(static_cast<std::size_t>(lines));
  for (int t = 0; t < horizon; ++t) {
    for (int r = 0; r < lines; ++r) sig[r] = inst.beta_at(r, inst.layout.offsets[0] + 0);
    for (int i = 1; i < n_appl; ++i) {
      for (int r = 0; r < lines; ++r) sig[r] += inst.beta_at(r, inst.layout.offsets[i] + 0);
    }
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int i = 0; i < n_appl; ++i) {
        const int base = inst.layout.offsets[i];
        const int cur = s.at(i, t);
        int best = cur;
        double best_cost = 0.0;
        for (int k = 0; k < inst.model.appliances[i].num_states(); ++k) {
          double cost = 0.0;
          for (int r = 0; r < lines; ++r) {
            const double resid = inst.agg.at(t, r) - (sig[r] - inst.beta_at(r, base + cur) + inst.beta_at(r, base + k));
            cost += resid * resid;
          }
          if (k == 0 || cost < best_cost) {
            best_cost = cost;
            best = k;
          }
        }
        if (best != cur) {
          for (int r = 0; r < lines; ++r) {
            sig[r] += inst.beta_at(r, base + best) - inst.beta_at(r, base + cur);
          }
          s.at(i, t) = best;
        }
      }
    }
  }
  return s;
}

}  // namespace

SolveResult solve(const ProblemInstance& inst, const SolverOptions& opts) {
  if (opts.max_iters < 1) {
    throw std::invalid_argument("solve: max_iters must be >= 1, got " + std::to_string(opts.max_iters));
  }

  StateAssignment current;
  switch (opts.init) {
    case InitPolicy::random:
      current = random_init(inst, opts.seed);
      break;
    case InitPolicy::per_time_greedy:
      current = greedy_init(inst);
      break;
    case InitPolicy::given:
      if (!opts.init_assignment) {
        throw std::invalid_argument("solve: init policy 'given' requires init_assignment");
      }
      current = *opts.init_assignment;
      validate_assignment(inst.model, current, inst.horizon());
      break;
  }

  SolveResult result;
  auto record = [&](const StateAssignment& s) {
    if (!opts.record_trace) return;
    const SetCostParts parts = eval_set_cost(inst, s);
    result.trace.set_costs.push_back(parts.f);
    result.trace.residual_costs.push_back(eval_residual_cost(inst, s));
  };
  record(current);

  result.trace.stop_reason = StopReason::max_iters;
  for (int k = 0; k < opts.max_iters; ++k) {
    const Permutation pi =
        permutation_from_set(inst.layout, current, opts.tail_policy, Rng::mix(opts.seed, static_cast<std::uint64_t>(k) + 1));
    const ModularBound bound = modular_upper_bound_of_f(inst, current, pi);
    StateAssignment next = modular_minimize(inst, bound.m);
    ++result.trace.iterations;
    record(next);
    if (next == current) {
      result.trace.stop_reason = StopReason::converged;
      break;
    }
    current = std::move(next);
  }

  result.states = std::move(current);
  return result;
}

DisaggregationResult disaggregate(const HouseholdModel& model, const AggregateSeries& agg,
                                  const SolverOptions& opts) {
  const ProblemInstance inst = build_instance(model, agg);
  SolveResult solved = solve(inst, opts);

  DisaggregationResult out;
  out.states = std::move(solved.states);
  out.trace = std::move(solved.trace);
  out.num_lines = inst.num_lines();

  const int horizon = inst.horizon();
  const int lines = inst.num_lines();
  const int n_appl = model.num_appliances();
  out.xhat.assign(static_cast<std::size_t>(n_appl) * horizon, 0.0);
  out.yhat.assign(static_cast<std::size_t>(horizon) * lines, 0.0);
  for (int i = 0; i < n_appl; ++i) {
    const auto& a = model.appliances[i];
    for (int t = 0; t < horizon; ++t) {
      const double watts = a.mu[out.states.at(i, t)];
      out.xhat[static_cast<std::size_t>(i) * horizon + t] = watts;
      for (int r = 0; r < lines; ++r) {
        out.yhat[static_cast<std::size_t>(t) * lines + r] += a.weights[r] * watts;
      }
    }
  }
  return out;
}

}  // namespace nilm
