#pragma once

#include "phasenilm/model.hpp"

namespace nilm {

// A household model bound to a measurement window, with the arrays the
// solver and bound computations read. The quadratic structure (per-line
// rank-one blocks replicated over time, and the temporal coupling) is kept
// implicit: only the per-line scaled level vectors, the linear data terms,
// and the smoothness diagonal are stored. No (N*T)^2 matrix is ever formed.
struct ProblemInstance {
  HouseholdModel model;
  AggregateSeries agg;
  GroundLayout layout;

  // beta[r*N + n] = weights[i][r] * mu[i][k], n = offset(i) + k.
  std::vector<double> beta;
  // cbar[t*N + n] = sum_r 2 * y(t,r) * beta(r,n); flat layout matches the
  // ground set.
  std::vector<double> cbar;
  // lambda_diag[n] = lambda of the appliance owning slot n.
  std::vector<double> lambda_diag;
  // sum_sq_y = sum over (r,t) of y(t,r)^2; offset between the residual and
  // set-cost conventions.
  double sum_sq_y = 0.0;

  int num_lines() const { return agg.num_lines; }
  int horizon() const { return agg.num_samples(); }
  int total_states() const { return layout.total_states; }
  int ground_size() const { return layout.size(); }

  double beta_at(int r, int n) const { return beta[static_cast<std::size_t>(r) * layout.total_states + n]; }
  double cbar_at(int n, int t) const { return cbar[static_cast<std::size_t>(t) * layout.total_states + n]; }
};

// Precomputes the instance arrays. Throws std::invalid_argument when the
// aggregate column count does not match the model's line count or when
// either input fails validation.
ProblemInstance build_instance(const HouseholdModel& model, const AggregateSeries& agg);

}  // namespace nilm
