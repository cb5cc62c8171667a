#include "phasenilm/bounds.hpp"

#include <stdexcept>
#include <string>

#include "phasenilm/rng.hpp"
#include "phasenilm/setfn.hpp"

namespace nilm {

namespace {

// Layout-level feasibility: shape matches and every state fits its
// appliance's block. (The model is not available here; block widths are
// recovered from consecutive offsets.)
void check_assignment_shape(const GroundLayout& layout, const StateAssignment& y) {
  const int n_appl = static_cast<int>(layout.offsets.size());
  if (y.num_appliances != n_appl || y.horizon != layout.horizon) {
    throw std::invalid_argument("permutation_from_set: assignment shape " + std::to_string(y.num_appliances) + "x" +
                                std::to_string(y.horizon) + " does not match layout " + std::to_string(n_appl) + "x" +
                                std::to_string(layout.horizon));
  }
  for (int i = 0; i < n_appl; ++i) {
    const int width = (i + 1 < n_appl ? layout.offsets[i + 1] : layout.total_states) - layout.offsets[i];
    for (int t = 0; t < y.horizon; ++t) {
      const int s = y.at(i, t);
      if (s < 0 || s >= width) {
        throw std::invalid_argument("permutation_from_set: state " + std::to_string(s) + " for appliance " +
                                    std::to_string(i) + " at t=" + std::to_string(t) + " outside [0, " +
                                    std::to_string(width) + ")");
      }
    }
  }
}

}  // namespace

Permutation permutation_from_set(const GroundLayout& layout, const StateAssignment& y,
                                 TailPolicy policy, std::uint64_t seed) {
  check_assignment_shape(layout, y);
  const int total = layout.size();
  std::vector<std::uint8_t> selected(static_cast<std::size_t>(total), 0);

  Permutation pi;
  pi.order.reserve(static_cast<std::size_t>(total));
  // Head: (t asc, appliance asc) is ascending flat order under the
  // time-major layout.
  for (int t = 0; t < layout.horizon; ++t) {
    for (int i = 0; i < y.num_appliances; ++i) {
      const int j = layout.flat_index(i, y.at(i, t), t);
      selected[j] = 1;
      pi.order.push_back(j);
    }
  }

  std::vector<int> tail;
  tail.reserve(static_cast<std::size_t>(total) - pi.order.size());
  for (int j = 0; j < total; ++j) {
    if (!selected[j]) tail.push_back(j);
  }
  if (policy == TailPolicy::shuffled) {
    Rng rng(seed);
    rng.shuffle(tail);
  }
  pi.order.insert(pi.order.end(), tail.begin(), tail.end());
  return pi;
}

ModularVector supergradient_g(const ProblemInstance& inst, const StateAssignment& y) {
  validate_assignment(inst.model, y, inst.horizon());
  const int horizon = inst.horizon();

  ModularVector u;
  u.values.assign(static_cast<std::size_t>(inst.ground_size()), 0.0);
  for (int i = 0; i < y.num_appliances; ++i) {
    for (int t = 0; t < horizon; ++t) {
      const int s = y.at(i, t);
      int neighbours = 0;
      if (t > 0 && y.at(i, t - 1) == s) ++neighbours;
      if (t + 1 < horizon && y.at(i, t + 1) == s) ++neighbours;
      if (neighbours == 0) continue;
      const int j = inst.layout.flat_index(i, s, t);
      u.values[j] = -inst.lambda_diag[j % inst.total_states()] * neighbours;
    }
  }
  return u;
}

ModularVector subgradient_h(const ProblemInstance& inst, const StateAssignment& y,
                            const Permutation& pi) {
  validate_assignment(inst.model, y, inst.horizon());
  const int total = inst.ground_size();
  const int n_total = inst.total_states();
  const int lines = inst.num_lines();
  const int horizon = inst.horizon();

  if (pi.size() != total) {
    throw std::invalid_argument("subgradient_h: permutation has " + std::to_string(pi.size()) +
                                " entries, ground set has " + std::to_string(total));
  }
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(total), 0);
  for (int j : pi.order) {
    if (j < 0 || j >= total || seen[j]) {
      throw std::invalid_argument("subgradient_h: pi is not a permutation of the ground set (entry " +
                                  std::to_string(j) + ")");
    }
    seen[j] = 1;
  }
  std::vector<std::uint8_t> selected(static_cast<std::size_t>(total), 0);
  for (int j : assignment_to_flat(inst, y)) selected[j] = 1;
  const int head = y.num_appliances * y.horizon;
  for (int k = 0; k < head; ++k) {
    if (!selected[pi.order[k]]) {
      throw std::invalid_argument("subgradient_h: permutation head entry " + std::to_string(pi.order[k]) +
                                  " is not selected by the assignment");
    }
  }

  // Marginal of appending element (n, t) to the prefix: only the time-t
  // signatures move, so each step costs O(R) given the running accumulators
  // acc[r][t] = beta_r . (prefix restricted to time t).
  ModularVector v;
  v.values.assign(static_cast<std::size_t>(total), 0.0);
  std::vector<double> acc(static_cast<std::size_t>(lines) * horizon, 0.0);
  for (int j : pi.order) {
    const int t = j / n_total;
    const int n = j % n_total;
    double entry = inst.cbar_at(n, t);
    for (int r = 0; r < lines; ++r) {
      const double beta = inst.beta_at(r, n);
      entry -= beta * beta + 2.0 * beta * acc[static_cast<std::size_t>(r) * horizon + t];
    }
    v.values[j] = entry;
    for (int r = 0; r < lines; ++r) {
      acc[static_cast<std::size_t>(r) * horizon + t] += inst.beta_at(r, n);
    }
  }
  return v;
}

ModularBound modular_upper_bound_of_f(const ProblemInstance& inst, const StateAssignment& y,
                                      const Permutation& pi) {
  const ModularVector u = supergradient_g(inst, y);
  const ModularVector v = subgradient_h(inst, y, pi);

  ModularBound bound;
  bound.m.values.resize(u.values.size());
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    bound.m.values[j] = u.values[j] - v.values[j];
  }
  const auto flat = assignment_to_flat(inst, y);
  bound.anchor = eval_set_cost(inst, y).g - u.eval(flat);
  return bound;
}

ModularVector supergradient_g_definitional(const ProblemInstance& inst, const StateAssignment& y) {
  validate_assignment(inst.model, y, inst.horizon());
  const auto flat = assignment_to_flat(inst, y);
  std::vector<std::uint8_t> selected(static_cast<std::size_t>(inst.ground_size()), 0);
  for (int j : flat) selected[j] = 1;

  ModularVector u;
  u.values.assign(static_cast<std::size_t>(inst.ground_size()), 0.0);
  const double g_full = eval_g_subset(inst, flat);
  std::vector<int> reduced(flat.size() - 1);
  for (int j = 0; j < inst.ground_size(); ++j) {
    if (selected[j]) {
      std::size_t w = 0;
      for (int k : flat) {
        if (k != j) reduced[w++] = k;
      }
      u.values[j] = g_full - eval_g_subset(inst, reduced);
    } else {
      const int singleton[1] = {j};
      u.values[j] = eval_g_subset(inst, singleton);  // g(empty) = 0
    }
  }
  return u;
}

ModularVector subgradient_h_definitional(const ProblemInstance& inst, const StateAssignment& y,
                                         const Permutation& pi) {
  validate_assignment(inst.model, y, inst.horizon());
  if (pi.size() != inst.ground_size()) {
    throw std::invalid_argument("subgradient_h_definitional: permutation has " + std::to_string(pi.size()) +
                                " entries, ground set has " + std::to_string(inst.ground_size()));
  }
  ModularVector v;
  v.values.assign(static_cast<std::size_t>(inst.ground_size()), 0.0);
  std::vector<int> prefix;
  prefix.reserve(pi.order.size());
  double prev = 0.0;  // h(empty)
  for (int j : pi.order) {
    prefix.push_back(j);
    const double cur = eval_h_subset(inst, prefix);
    v.values[j] = cur - prev;
    prev = cur;
  }
  return v;
}

}  // namespace nilm
