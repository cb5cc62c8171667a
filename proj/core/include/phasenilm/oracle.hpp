#pragma once

#include "phasenilm/instance.hpp"

namespace nilm {

struct OracleResult {
  StateAssignment states;
  double cost = 0.0;  // set-cost convention, re-evaluated through eval_set_cost
};

// Global minimum by enumerating every feasible assignment (odometer over the
// L*T state cells, last cell fastest; ties keep the first minimizer, i.e.
// the lexicographically smallest state matrix). Requires
// (prod_i N_i)^T <= 2^20; throws std::invalid_argument with the computed
// count otherwise.
OracleResult enumerate_optimum(const ProblemInstance& inst);

// Global minimum by forward dynamic programming over joint per-tick states.
// Exact because the data term is separable per tick and the smoothness term
// couples only adjacent ticks. Joint states are indexed with the last
// appliance varying fastest, so numeric order is lexicographic; ties during
// backtracking go to the smallest joint index. Requires M = prod_i N_i
// <= 4096; throws std::invalid_argument with the computed M otherwise.
// O(T * M^2 * L) time.
OracleResult viterbi_optimum(const ProblemInstance& inst);

}  // namespace nilm
