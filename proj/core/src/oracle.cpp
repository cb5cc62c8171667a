#include "phasenilm/oracle.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasenilm/setfn.hpp"

namespace nilm {

namespace {

constexpr std::uint64_t kEnumerationLimit = 1ull << 20;
constexpr std::uint64_t kJointStateLimit = 4096;

std::uint64_t per_tick_states(const ProblemInstance& inst) {
  std::uint64_t m = 1;
  for (const auto& a : inst.model.appliances) {
    m *= static_cast<std::uint64_t>(a.num_states());
    if (m > kEnumerationLimit) break;  // already past every limit we check against
  }
  return m;
}

}  // namespace

OracleResult enumerate_optimum(const ProblemInstance& inst) {
  const std::uint64_t per_tick = per_tick_states(inst);
  std::uint64_t count = 1;
  bool too_large = per_tick > kEnumerationLimit;
  if (!too_large) {
    for (int t = 0; t < inst.horizon(); ++t) {
      count *= per_tick;
      if (count > kEnumerationLimit) {
        too_large = true;
        break;
      }
    }
  }
  if (too_large) {
    throw std::invalid_argument("enumerate_optimum: " + std::to_string(per_tick) + "^" +
                                std::to_string(inst.horizon()) + " assignments exceed the 2^20 enumeration limit");
  }

  const int n_appl = inst.model.num_appliances();
  const int horizon = inst.horizon();
  const int cells = n_appl * horizon;

  StateAssignment current = StateAssignment::zeros(n_appl, horizon);
  OracleResult best;
  best.states = current;
  best.cost = eval_set_cost(inst, current).f;

  // Odometer over the flattened state matrix; the last cell varies fastest,
  // so assignments come out in ascending lexicographic order and keeping
  // strict improvements makes the tie-break "first seen".
  while (true) {
    int pos = cells - 1;
    while (pos >= 0) {
      const int i = pos / horizon;
      if (++current.states[pos] < inst.model.appliances[i].num_states()) break;
      current.states[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    const double cost = eval_set_cost(inst, current).f;
    if (cost < best.cost) {
      best.cost = cost;
      best.states = current;
    }
  }
  return best;
}

OracleResult viterbi_optimum(const ProblemInstance& inst) {
  const std::uint64_t per_tick = per_tick_states(inst);
  if (per_tick > kJointStateLimit) {
    throw std::invalid_argument("viterbi_optimum: joint state space " + std::to_string(per_tick) +
                                " exceeds the limit of " + std::to_string(kJointStateLimit));
  }
  const int m_count = static_cast<int>(per_tick);
  const int n_appl = inst.model.num_appliances();
  const int horizon = inst.horizon();
  const int lines = inst.num_lines();

  // Joint index -> per-appliance states (last appliance fastest) and the
  // per-line signature of each joint state.
  std::vector<int> joint_states(static_cast<std::size_t>(m_count) * n_appl);
  std::vector<double> sig(static_cast<std::size_t>(m_count) * lines, 0.0);
  for (int m = 0; m < m_count; ++m) {
    int rem = m;
    for (int i = n_appl - 1; i >= 0; --i) {
      const int n_states = inst.model.appliances[i].num_states();
      joint_states[static_cast<std::size_t>(m) * n_appl + i] = rem % n_states;
      rem /= n_states;
    }
    for (int r = 0; r < lines; ++r) {
      double v = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        v += inst.beta_at(r, inst.layout.offsets[i] + joint_states[static_cast<std::size_t>(m) * n_appl + i]);
      }
      sig[static_cast<std::size_t>(m) * lines + r] = v;
    }
  }
  std::vector<double> lambda(static_cast<std::size_t>(n_appl));
  for (int i = 0; i < n_appl; ++i) lambda[i] = inst.lambda_diag[inst.layout.offsets[i]];

  auto node_cost = [&](int t, int m) {
    double c = 0.0;
    for (int r = 0; r < lines; ++r) {
      const double s = sig[static_cast<std::size_t>(m) * lines + r];
      c += s * s - 2.0 * inst.agg.at(t, r) * s;
    }
    return c;
  };
  auto edge_cost = [&](int m_prev, int m_next) {
    double c = 0.0;
    const int* a = &joint_states[static_cast<std::size_t>(m_prev) * n_appl];
    const int* b = &joint_states[static_cast<std::size_t>(m_next) * n_appl];
    for (int i = 0; i < n_appl; ++i) {
      if (a[i] == b[i]) c -= lambda[i];
    }
    return c;
  };

  std::vector<double> dp(static_cast<std::size_t>(m_count));
  std::vector<double> dp_next(static_cast<std::size_t>(m_count));
  std::vector<int> back(static_cast<std::size_t>(horizon) * m_count, -1);
  for (int m = 0; m < m_count; ++m) dp[m] = node_cost(0, m);

  for (int t = 1; t < horizon; ++t) {
    for (int m = 0; m < m_count; ++m) {
      double best = std::numeric_limits<double>::infinity();
      int best_prev = 0;
      for (int p = 0; p < m_count; ++p) {
        const double c = dp[p] + edge_cost(p, m);
        if (c < best) {  // strict: ties keep the smallest predecessor
          best = c;
          best_prev = p;
        }
      }
      dp_next[m] = best + node_cost(t, m);
      back[static_cast<std::size_t>(t) * m_count + m] = best_prev;
    }
    dp.swap(dp_next);
  }

  int last = 0;
  for (int m = 1; m < m_count; ++m) {
    if (dp[m] < dp[last]) last = m;
  }

  OracleResult result;
  result.states = StateAssignment::zeros(n_appl, horizon);
  int m = last;
  for (int t = horizon - 1; t >= 0; --t) {
    for (int i = 0; i < n_appl; ++i) {
      result.states.at(i, t) = joint_states[static_cast<std::size_t>(m) * n_appl + i];
    }
    if (t > 0) m = back[static_cast<std::size_t>(t) * m_count + m];
  }
  // Re-evaluate through the shared evaluator so comparisons against the
  // solver and the enumerator are free of accumulation-order noise.
  result.cost = eval_set_cost(inst, result.states).f;
  return result;
}

}  // namespace nilm
