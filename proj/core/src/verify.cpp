#include "phasenilm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "phasenilm/bounds.hpp"
#include "phasenilm/oracle.hpp"
#include "phasenilm/setfn.hpp"
#include "phasenilm/solver.hpp"

namespace nilm {

HouseholdModel random_model(Rng& rng, const RandomInstanceSpec& spec) {
  HouseholdModel model;
  model.num_lines = spec.num_lines;
  const int n_appl =
      spec.min_appliances + static_cast<int>(rng.uniform_below(
                                static_cast<std::uint64_t>(spec.max_appliances - spec.min_appliances + 1)));
  for (int i = 0; i < n_appl; ++i) {
    ApplianceModel a;
    a.name = "appliance_" + std::to_string(i + 1);
    const int n_states =
        spec.min_states + static_cast<int>(rng.uniform_below(
                              static_cast<std::uint64_t>(spec.max_states - spec.min_states + 1)));
    a.mu.resize(static_cast<std::size_t>(n_states));
    for (double& v : a.mu) v = rng.uniform(0.0, spec.max_watts);
    std::sort(a.mu.begin(), a.mu.end());
    a.weights.resize(static_cast<std::size_t>(spec.num_lines));
    double sum = 0.0;
    for (double& w : a.weights) {
      w = 0.05 + rng.uniform01();  // bounded away from 0 so the sum never degenerates
      sum += w;
    }
    for (double& w : a.weights) w /= sum;
    a.lambda = rng.uniform(0.1, 2.0);
    model.appliances.push_back(std::move(a));
  }
  return model;
}

AggregateSeries random_aggregate(Rng& rng, int num_lines, int horizon, double max_watts) {
  AggregateSeries agg;
  agg.num_lines = num_lines;
  agg.values.resize(static_cast<std::size_t>(horizon) * num_lines);
  for (double& v : agg.values) v = rng.uniform(0.0, max_watts);
  return agg;
}

ProblemInstance random_instance(Rng& rng, const RandomInstanceSpec& spec) {
  const HouseholdModel model = random_model(rng, spec);
  const AggregateSeries agg = random_aggregate(rng, spec.num_lines, spec.horizon, spec.max_watts);
  return build_instance(model, agg);
}

StateAssignment random_assignment(Rng& rng, const HouseholdModel& model, int horizon) {
  StateAssignment s = StateAssignment::zeros(model.num_appliances(), horizon);
  for (int i = 0; i < s.num_appliances; ++i) {
    const int n_states = model.appliances[i].num_states();
    for (int t = 0; t < horizon; ++t) {
      s.at(i, t) = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_states)));
    }
  }
  return s;
}

namespace {

constexpr double kTol = 1e-9;

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_mask(std::uint32_t mask) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", mask);
  return buf;
}

// An instance whose ground set stays exhaustively enumerable (N*T <= 12).
ProblemInstance tiny_instance(std::uint64_t seed, bool corrupt_lambda) {
  Rng rng(seed);
  RandomInstanceSpec spec;
  spec.num_lines = 1 + static_cast<int>(rng.uniform_below(2));
  spec.min_appliances = 1;
  spec.max_appliances = 2;
  spec.horizon = 2;
  HouseholdModel model = random_model(rng, spec);
  const int width = model.total_states();
  const int horizon = std::max(2, 12 / width);
  AggregateSeries agg = random_aggregate(rng, spec.num_lines, horizon, spec.max_watts);
  ProblemInstance inst = build_instance(model, agg);
  if (corrupt_lambda) {
    for (double& lam : inst.lambda_diag) lam = -lam;
  }
  return inst;
}

std::vector<int> mask_to_flat(std::uint32_t mask) {
  std::vector<int> flat;
  for (int j = 0; mask != 0; ++j, mask >>= 1) {
    if (mask & 1u) flat.push_back(j);
  }
  return flat;
}

void fail(CheckResult& check, std::uint64_t seed, const std::string& what) {
  if (!check.passed) return;  // keep the first witness
  check.passed = false;
  check.detail = "seed " + std::to_string(seed) + ": " + what;
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& opts) {
  const bool tiny = opts.size == VerifySize::tiny;
  const int seeds = std::max(1, opts.seeds);

  CheckResult check_g{"submodularity of g"};
  CheckResult check_h{"submodularity of h"};
  CheckResult check_upper{"upper bound dominates g, tight at Y"};
  CheckResult check_lower{"lower bound under h, tight at Y + chain prefixes"};
  CheckResult check_full{"modular bound dominates f, tight at Y"};
  CheckResult check_closed{"closed-form gradients match definitional"};
  CheckResult check_descent{"solver cost trace non-increasing"};
  CheckResult check_oracle{"solver dominated by oracles, oracles agree"};

  // --- Submodularity, bound dominance, tightness: exhaustive on tiny sets.
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = Rng::mix(opts.base_seed, static_cast<std::uint64_t>(s));
    const ProblemInstance inst = tiny_instance(seed, opts.corrupt_lambda);
    const int n = inst.ground_size();

    const auto g_result = is_submodular_bruteforce(n, g_mask_function(inst), kTol);
    ++check_g.cases;
    if (!g_result.submodular) {
      const auto& w = *g_result.witness;
      fail(check_g, seed,
           "adding element " + std::to_string(w.element) + " gains " + format_value(w.gain_at_x) + " at X=" +
               format_mask(w.x_mask) + " but " + format_value(w.gain_at_y) + " at Y=" + format_mask(w.y_mask));
    }
    const auto h_result = is_submodular_bruteforce(n, h_mask_function(inst), kTol);
    ++check_h.cases;
    if (!h_result.submodular) {
      const auto& w = *h_result.witness;
      fail(check_h, seed,
           "adding element " + std::to_string(w.element) + " gains " + format_value(w.gain_at_x) + " at X=" +
               format_mask(w.x_mask) + " but " + format_value(w.gain_at_y) + " at Y=" + format_mask(w.y_mask));
    }

    Rng rng(Rng::mix(seed, 77));
    const StateAssignment y = random_assignment(rng, inst.model, inst.horizon());
    const auto y_flat = assignment_to_flat(inst, y);
    const Permutation pi = permutation_from_set(inst.layout, y, TailPolicy::shuffled, Rng::mix(seed, 78));

    const ModularVector u = supergradient_g(inst, y);
    const ModularVector v = subgradient_h(inst, y, pi);
    const ModularBound bound = modular_upper_bound_of_f(inst, y, pi);
    const double g_at_y = eval_g_subset(inst, y_flat);
    const double anchor_g = g_at_y - u.eval(y_flat);

    double scale = 1.0;
    const std::uint32_t count = 1u << n;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
      const auto flat = mask_to_flat(mask);
      scale = std::max(scale, std::fabs(eval_f_subset(inst, flat)));
    }
    const double slack = kTol * scale;

    bool upper_ok = true;
    bool lower_ok = true;
    bool full_ok = true;
    for (std::uint32_t mask = 0; mask < count && (upper_ok || lower_ok || full_ok); ++mask) {
      const auto flat = mask_to_flat(mask);
      const double g_val = eval_g_subset(inst, flat);
      const double h_val = eval_h_subset(inst, flat);
      if (upper_ok && anchor_g + u.eval(flat) < g_val - slack) {
        upper_ok = false;
        fail(check_upper, seed, "u misses g by " + format_value(g_val - anchor_g - u.eval(flat)) + " at mask " +
                                    format_mask(mask));
      }
      if (lower_ok && v.eval(flat) > h_val + slack) {
        lower_ok = false;
        fail(check_lower, seed, "v exceeds h by " + format_value(v.eval(flat) - h_val) + " at mask " +
                                    format_mask(mask));
      }
      if (full_ok && bound.eval(flat) < g_val - h_val - slack) {
        full_ok = false;
        fail(check_full, seed, "m misses f by " + format_value(g_val - h_val - bound.eval(flat)) + " at mask " +
                                   format_mask(mask));
      }
    }
    ++check_upper.cases;
    ++check_lower.cases;
    ++check_full.cases;

    if (std::fabs(anchor_g + u.eval(y_flat) - g_at_y) > slack) {
      fail(check_upper, seed, "upper bound not tight at Y");
    }
    const double h_at_y = eval_h_subset(inst, y_flat);
    if (std::fabs(v.eval(y_flat) - h_at_y) > slack) {
      fail(check_lower, seed, "lower bound not tight at Y");
    }
    if (std::fabs(bound.eval(y_flat) - (g_at_y - h_at_y)) > slack) {
      fail(check_full, seed, "modular bound not tight at Y");
    }
    // Chain prefixes: v must agree with h on every S_pi^(i).
    std::vector<int> prefix;
    prefix.reserve(pi.order.size());
    double v_prefix = 0.0;
    for (int j : pi.order) {
      prefix.push_back(j);
      v_prefix += v.values[j];
      if (std::fabs(v_prefix - eval_h_subset(inst, prefix)) > slack) {
        fail(check_lower, seed, "chain prefix of size " + std::to_string(prefix.size()) + " not tight");
        break;
      }
    }
  }

  // --- Closed forms against the definitional evaluations.
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = Rng::mix(opts.base_seed ^ 0xC10EDFULL, static_cast<std::uint64_t>(s));
    Rng rng(seed);
    RandomInstanceSpec spec;
    spec.min_appliances = 2;
    spec.max_appliances = 4;
    HouseholdModel model = random_model(rng, spec);
    spec.horizon = (tiny ? 60 : 200) / model.total_states();
    const AggregateSeries agg = random_aggregate(rng, spec.num_lines, spec.horizon, spec.max_watts);
    const ProblemInstance inst = build_instance(model, agg);

    const StateAssignment y = random_assignment(rng, inst.model, inst.horizon());
    const Permutation pi = permutation_from_set(inst.layout, y, TailPolicy::shuffled, Rng::mix(seed, 5));
    const ModularVector u_closed = supergradient_g(inst, y);
    const ModularVector u_naive = supergradient_g_definitional(inst, y);
    const ModularVector v_closed = subgradient_h(inst, y, pi);
    const ModularVector v_naive = subgradient_h_definitional(inst, y, pi);

    double u_scale = 1.0;
    double v_scale = 1.0;
    for (double x : u_naive.values) u_scale = std::max(u_scale, std::fabs(x));
    for (double x : v_naive.values) v_scale = std::max(v_scale, std::fabs(x));
    ++check_closed.cases;
    for (int j = 0; j < inst.ground_size(); ++j) {
      if (std::fabs(u_closed.values[j] - u_naive.values[j]) > kTol * u_scale) {
        fail(check_closed, seed, "supergradient entry " + std::to_string(j) + " differs by " +
                                     format_value(u_closed.values[j] - u_naive.values[j]));
        break;
      }
      if (std::fabs(v_closed.values[j] - v_naive.values[j]) > kTol * v_scale) {
        fail(check_closed, seed, "subgradient entry " + std::to_string(j) + " differs by " +
                                     format_value(v_closed.values[j] - v_naive.values[j]));
        break;
      }
    }
  }

  // --- Solver descent.
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = Rng::mix(opts.base_seed ^ 0xDE5CE57ULL, static_cast<std::uint64_t>(s));
    Rng rng(seed);
    RandomInstanceSpec spec;
    spec.min_appliances = 1;
    spec.max_appliances = 4;
    spec.horizon = tiny ? 5 + static_cast<int>(rng.uniform_below(6)) : 20 + static_cast<int>(rng.uniform_below(81));
    const ProblemInstance inst = random_instance(rng, spec);

    SolverOptions sopts;
    sopts.seed = seed;
    sopts.record_trace = true;
    const SolveResult result = solve(inst, sopts);
    ++check_descent.cases;
    for (std::size_t k = 1; k < result.trace.set_costs.size(); ++k) {
      if (result.trace.set_costs[k] > result.trace.set_costs[k - 1]) {
        fail(check_descent, seed, "cost rose from " + format_value(result.trace.set_costs[k - 1]) + " to " +
                                      format_value(result.trace.set_costs[k]) + " at iteration " + std::to_string(k));
        break;
      }
    }
  }

  // --- Oracle domination and cross-oracle agreement.
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = Rng::mix(opts.base_seed ^ 0x0AC1EULL, static_cast<std::uint64_t>(s));
    Rng rng(seed);
    RandomInstanceSpec spec;
    spec.min_appliances = 1;
    spec.max_appliances = 2;
    spec.horizon = 2 + static_cast<int>(rng.uniform_below(4));
    const ProblemInstance inst = random_instance(rng, spec);

    const OracleResult by_enum = enumerate_optimum(inst);
    const OracleResult by_dp = viterbi_optimum(inst);
    ++check_oracle.cases;
    if (by_enum.cost != by_dp.cost) {
      fail(check_oracle, seed, "enumeration found " + format_value(by_enum.cost) + " but the DP found " +
                                   format_value(by_dp.cost));
      continue;
    }
    SolverOptions sopts;
    sopts.seed = seed;
    const SolveResult result = solve(inst, sopts);
    const double final_cost = eval_set_cost(inst, result.states).f;
    if (final_cost < by_enum.cost) {
      fail(check_oracle, seed,
           "solver cost " + format_value(final_cost) + " beats the exact optimum " + format_value(by_enum.cost));
      continue;
    }
    // Seeded at the optimum the solver must stay there (no ascent possible).
    SolverOptions from_opt = sopts;
    from_opt.init = InitPolicy::given;
    from_opt.init_assignment = by_enum.states;
    const SolveResult at_opt = solve(inst, from_opt);
    if (eval_set_cost(inst, at_opt.states).f != by_enum.cost) {
      fail(check_oracle, seed, "solver left the optimum when started there");
    }
  }

  VerifyReport report;
  report.checks = {check_g,      check_h,       check_upper,   check_lower,
                   check_full,   check_closed,  check_descent, check_oracle};
  return report;
}

}  // namespace nilm
