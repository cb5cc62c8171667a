#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phasenilm/instance.hpp"

namespace nilm {

// A modular set function over the ground set: evaluating at S sums the
// entries selected by S.
struct ModularVector {
  std::vector<double> values;  // length N*T, flat ground-set indexing

  double eval(std::span<const int> flat) const {
    double sum = 0.0;
    for (int j : flat) sum += values[static_cast<std::size_t>(j)];
    return sum;
  }
};

// Modular function plus a constant: M(S) = anchor + sum_{j in S} m(j).
// The anchor makes tightness at the expansion point an exact statement;
// the solver itself only reads the vector (constants do not move argmins).
struct ModularBound {
  ModularVector m;
  double anchor = 0.0;

  double eval(std::span<const int> flat) const { return anchor + m.eval(flat); }
};

enum class TailPolicy {
  deterministic,  // tail = remaining elements in ascending flat order
  shuffled,       // tail = seeded Fisher-Yates shuffle of the remainder
};

// Permutation of the ground set; order[k] is the flat index visited at
// position k. When built from an assignment, the first L*T positions list
// exactly the selected elements.
struct Permutation {
  std::vector<int> order;

  int size() const { return static_cast<int>(order.size()); }
};

// Head = y's selected flat indices ordered by (time asc, appliance asc),
// i.e. ascending flat order. Tail covers the unselected elements per
// `policy`; the same seed always yields the same permutation.
Permutation permutation_from_set(const GroundLayout& layout, const StateAssignment& y,
                                 TailPolicy policy, std::uint64_t seed = 0);

// Supergradient of the smoothing part g at the feasible set Y. The entry at
// a selected element (n, t) is -lambda(n) * (Z_Y(n,t-1) + Z_Y(n,t+1)) with
// out-of-range neighbours absent; unselected entries are zero, so at most
// L*T entries are nonzero. The affine bound tight at Y is
//   U(S) = g(Y) - u(Y) + sum_{j in S} u(j)  >= g(S).
ModularVector supergradient_g(const ProblemInstance& inst, const StateAssignment& y);

// Edmonds-greedy subgradient of the data part h along the chain induced by
// pi: entry at pi(i) is h(prefix_i) - h(prefix_{i-1}), computed in O(R) per
// step via running per-(line, time) signature accumulators (O(N*T*R) total).
// The induced modular function satisfies v(S) <= h(S) with v(Y) = h(Y) when
// pi's head enumerates Y. Throws std::invalid_argument when pi is not a
// permutation of the ground set or its head does not match y's selection.
ModularVector subgradient_h(const ProblemInstance& inst, const StateAssignment& y,
                            const Permutation& pi);

// The modular upper bound of f = g - h minimized at each solver iteration:
// m = supergradient_g - subgradient_h, anchor = g(Y) - sum_{j in Y} u(j).
// Satisfies M(S) >= f(S) for all S and M(Y) = f(Y).
ModularBound modular_upper_bound_of_f(const ProblemInstance& inst, const StateAssignment& y,
                                      const Permutation& pi);

// Definitional counterparts computed through full set-function evaluations:
// g(Y) - g(Y \ {j}) for selected j and g({j}) - g(empty) otherwise, and the
// chain differences h(prefix_i) - h(prefix_{i-1}). Slow (O(n) evaluations);
// they exist to cross-check the closed forms above.
ModularVector supergradient_g_definitional(const ProblemInstance& inst, const StateAssignment& y);
ModularVector subgradient_h_definitional(const ProblemInstance& inst, const StateAssignment& y,
                                         const Permutation& pi);

}  // namespace nilm
