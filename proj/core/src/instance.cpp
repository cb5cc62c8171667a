#include "phasenilm/instance.hpp"

#include <stdexcept>
#include <string>

namespace nilm {

ProblemInstance build_instance(const HouseholdModel& model, const AggregateSeries& agg) {
  model.validate();
  agg.validate();
  if (agg.num_lines != model.num_lines) {
    throw std::invalid_argument("build_instance: aggregate series has " + std::to_string(agg.num_lines) +
                                " line columns but the model expects " + std::to_string(model.num_lines));
  }

  ProblemInstance inst;
  inst.model = model;
  inst.agg = agg;
  inst.layout = make_layout(model, agg.num_samples());

  const int n_total = inst.layout.total_states;
  const int horizon = inst.layout.horizon;
  const int lines = agg.num_lines;

  inst.beta.assign(static_cast<std::size_t>(lines) * n_total, 0.0);
  for (int r = 0; r < lines; ++r) {
    for (int i = 0; i < model.num_appliances(); ++i) {
      const auto& a = model.appliances[i];
      const int base = inst.layout.offsets[i];
      for (int k = 0; k < a.num_states(); ++k) {
        inst.beta[static_cast<std::size_t>(r) * n_total + base + k] = a.weights[r] * a.mu[k];
      }
    }
  }

  inst.cbar.assign(static_cast<std::size_t>(horizon) * n_total, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int n = 0; n < n_total; ++n) {
      double c = 0.0;
      for (int r = 0; r < lines; ++r) {
        c += 2.0 * agg.at(t, r) * inst.beta_at(r, n);
      }
      inst.cbar[static_cast<std::size_t>(t) * n_total + n] = c;
    }
  }

  inst.lambda_diag.resize(n_total);
  for (int i = 0; i < model.num_appliances(); ++i) {
    const auto& a = model.appliances[i];
    for (int k = 0; k < a.num_states(); ++k) {
      inst.lambda_diag[inst.layout.offsets[i] + k] = a.lambda;
    }
  }

  inst.sum_sq_y = 0.0;
  for (double v : agg.values) inst.sum_sq_y += v * v;

  return inst;
}

}  // namespace nilm
