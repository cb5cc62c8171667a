#include "phasenilm/setfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nilm {

SetCostParts eval_set_cost(const ProblemInstance& inst, const StateAssignment& s) {
  validate_assignment(inst.model, s, inst.horizon());
  const int lines = inst.num_lines();
  const int horizon = inst.horizon();
  const int n_appl = inst.model.num_appliances();

  SetCostParts parts;

  // Data part: per time tick the selected indicator hits one beta entry per
  // appliance, so beta_r . z_t is a plain sum over appliances.
  for (int r = 0; r < lines; ++r) {
    for (int t = 0; t < horizon; ++t) {
      double sig = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        sig += inst.beta_at(r, inst.layout.offsets[i] + s.at(i, t));
      }
      parts.h += -sig * sig + 2.0 * inst.agg.at(t, r) * sig;
    }
  }

  // Smoothing part: adjacent ticks with equal state.
  for (int i = 0; i < n_appl; ++i) {
    const double lam = inst.lambda_diag[inst.layout.offsets[i]];
    for (int t = 0; t + 1 < horizon; ++t) {
      if (s.at(i, t) == s.at(i, t + 1)) parts.g -= lam;
    }
  }

  parts.f = parts.g - parts.h;
  return parts;
}

double eval_residual_cost(const ProblemInstance& inst, const StateAssignment& s) {
  validate_assignment(inst.model, s, inst.horizon());
  const int lines = inst.num_lines();
  const int horizon = inst.horizon();
  const int n_appl = inst.model.num_appliances();

  double cost = 0.0;
  for (int r = 0; r < lines; ++r) {
    for (int t = 0; t < horizon; ++t) {
      double yhat = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        yhat += inst.beta_at(r, inst.layout.offsets[i] + s.at(i, t));
      }
      const double resid = inst.agg.at(t, r) - yhat;
      cost += resid * resid;
    }
  }
  for (int i = 0; i < n_appl; ++i) {
    const double lam = inst.lambda_diag[inst.layout.offsets[i]];
    for (int t = 0; t + 1 < horizon; ++t) {
      if (s.at(i, t) == s.at(i, t + 1)) cost -= lam;
    }
  }
  return cost;
}

namespace {

void check_flat_indices(const ProblemInstance& inst, std::span<const int> flat) {
  const int limit = inst.ground_size();
  for (int j : flat) {
    if (j < 0 || j >= limit) {
      throw std::invalid_argument("subset: flat index " + std::to_string(j) + " outside ground set of size " +
                                  std::to_string(limit));
    }
  }
}

}  // namespace

double eval_g_subset(const ProblemInstance& inst, std::span<const int> flat) {
  check_flat_indices(inst, flat);
  const int n_total = inst.total_states();
  // Membership grid over (slot, time); subsets here are tiny or moderate, so
  // a dense byte grid is fine.
  std::vector<std::uint8_t> member(static_cast<std::size_t>(inst.ground_size()), 0);
  for (int j : flat) member[j] = 1;

  double g = 0.0;
  for (int j : flat) {
    const int t = j / n_total;
    const int n = j % n_total;
    if (t + 1 < inst.horizon() && member[j + n_total]) {
      g -= inst.lambda_diag[n];
    }
  }
  return g;
}

double eval_h_subset(const ProblemInstance& inst, std::span<const int> flat) {
  check_flat_indices(inst, flat);
  const int n_total = inst.total_states();
  const int lines = inst.num_lines();
  const int horizon = inst.horizon();

  // Accumulate beta_r . z_t per (line, time) touched by the subset.
  std::vector<double> acc(static_cast<std::size_t>(lines) * horizon, 0.0);
  for (int j : flat) {
    const int t = j / n_total;
    const int n = j % n_total;
    for (int r = 0; r < lines; ++r) {
      acc[static_cast<std::size_t>(r) * horizon + t] += inst.beta_at(r, n);
    }
  }
  double h = 0.0;
  for (int r = 0; r < lines; ++r) {
    for (int t = 0; t < horizon; ++t) {
      const double sig = acc[static_cast<std::size_t>(r) * horizon + t];
      if (sig != 0.0) {
        h += -sig * sig + 2.0 * inst.agg.at(t, r) * sig;
      }
    }
  }
  return h;
}

double eval_f_subset(const ProblemInstance& inst, std::span<const int> flat) {
  return eval_g_subset(inst, flat) - eval_h_subset(inst, flat);
}

std::vector<int> assignment_to_flat(const ProblemInstance& inst, const StateAssignment& s) {
  validate_assignment(inst.model, s, inst.horizon());
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(s.num_appliances) * s.horizon);
  for (int t = 0; t < s.horizon; ++t) {
    for (int i = 0; i < s.num_appliances; ++i) {
      flat.push_back(inst.layout.flat_index(i, s.at(i, t), t));
    }
  }
  return flat;
}

SubmodularityCheck is_submodular_bruteforce(int n, const MaskFunction& fn, double tol) {
  if (n < 0 || n > 14) {
    throw std::invalid_argument("is_submodular_bruteforce: ground set size " + std::to_string(n) +
                                " exceeds the enumerable limit of 14");
  }
  const std::uint32_t count = 1u << n;
  std::vector<double> table(count);
  double scale = 1.0;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    table[mask] = fn(mask);
    scale = std::max(scale, std::fabs(table[mask]));
  }
  const double slack = tol * scale;

  SubmodularityCheck result;
  // For every Y, every X subset of Y, every v outside Y:
  //   f(X u {v}) - f(X) >= f(Y u {v}) - f(Y).
  for (std::uint32_t y = 0; y < count; ++y) {
    for (std::uint32_t x = y;; x = (x - 1) & y) {
      for (int v = 0; v < n; ++v) {
        const std::uint32_t bit = 1u << v;
        if (y & bit) continue;
        const double gain_x = table[x | bit] - table[x];
        const double gain_y = table[y | bit] - table[y];
        if (gain_x < gain_y - slack) {
          result.submodular = false;
          result.witness = SubmodularityWitness{x, y, v, gain_x, gain_y};
          return result;
        }
      }
      if (x == 0) break;
    }
  }
  return result;
}

namespace {

std::vector<int> mask_to_flat(std::uint32_t mask) {
  std::vector<int> flat;
  for (int j = 0; mask != 0; ++j, mask >>= 1) {
    if (mask & 1u) flat.push_back(j);
  }
  return flat;
}

}  // namespace

MaskFunction g_mask_function(const ProblemInstance& inst) {
  return [inst](std::uint32_t mask) {
    const auto flat = mask_to_flat(mask);
    return eval_g_subset(inst, flat);
  };
}

MaskFunction h_mask_function(const ProblemInstance& inst) {
  return [inst](std::uint32_t mask) {
    const auto flat = mask_to_flat(mask);
    return eval_h_subset(inst, flat);
  };
}

MaskFunction quadratic_mask_function(int n, std::vector<double> a_matrix, std::vector<double> b_vector) {
  if (static_cast<int>(a_matrix.size()) != n * n || static_cast<int>(b_vector.size()) != n) {
    throw std::invalid_argument("quadratic_mask_function: matrix/vector sizes do not match n");
  }
  return [n, a = std::move(a_matrix), b = std::move(b_vector)](std::uint32_t mask) {
    double val = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!(mask & (1u << j))) continue;
      val += b[j];
      for (int k = 0; k < n; ++k) {
        if (mask & (1u << k)) val += a[static_cast<std::size_t>(j) * n + k];
      }
    }
    return val;
  };
}

}  // namespace nilm
