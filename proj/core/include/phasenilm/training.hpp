#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasenilm/model.hpp"

namespace nilm {

// Per-appliance submetered power used for training, one aligned row per
// appliance.
struct ApplianceSeries {
  std::vector<std::string> names;          // length L
  std::vector<std::vector<double>> power;  // L rows of equal length
  std::vector<std::int64_t> timestamps;    // empty, or one per sample

  int num_appliances() const { return static_cast<int>(power.size()); }
  int num_samples() const { return power.empty() ? 0 : static_cast<int>(power[0].size()); }

  // Shapes agree, readings are >= 0, timestamps (when present) strictly
  // increase. Throws std::invalid_argument.
  void validate() const;
};

struct QuantizationResult {
  std::vector<double> levels;  // ascending
  bool padded = false;         // fewer distinct samples than states
};

// 1-D Lloyd quantizer: centroids initialized at the (2j+1)/(2k) quantiles of
// the sorted sample, then nearest-centroid / cluster-mean alternation until
// the partition stops changing. Empty clusters are reseeded at the sample
// with the largest quantization error. The input is sorted internally, so
// the result depends only on the multiset of readings. Requires k >= 2 and
// at least k samples; with fewer than k distinct values the distinct values
// are returned padded with the largest, and `padded` is set.
QuantizationResult lloyd_max_quantize(const std::vector<double>& series, int k);

// Euclidean projection onto the probability simplex {w >= 0, sum w = 1},
// by the sort-descending threshold rule.
std::vector<double> simplex_project(const std::vector<double>& v);

struct ConnectivityFitOptions {
  int max_iters = 50000;
  double tol = 1e-10;  // stop when the iterate moves less than this in max-norm
  bool record_objective = false;
};

struct ConnectivityFit {
  std::vector<double> weights;  // L x R, row-major; each row on the simplex
  std::vector<bool> underdetermined;  // appliance rows with identically-zero power
  int iterations = 0;
  double objective = 0.0;               // sum of squared residuals at the result
  std::vector<double> objective_trace;  // per-iteration objective when recorded
};

// Least-squares fit of the per-line draw fractions: minimizes
// sum_{r,t} (y_rt - sum_i w_i^r x_it)^2 over the product of per-appliance
// simplices, by projected gradient with fixed step 1/L_f, where L_f bounds
// the gradient Lipschitz constant as twice the top eigenvalue of the
// appliance Gram matrix (power iteration, 50 steps). Appliances whose series
// is identically zero contribute nothing to the objective; their rows are
// reported uniform and flagged.
ConnectivityFit fit_connectivity(const ApplianceSeries& series, const AggregateSeries& agg,
                                 const ConnectivityFitOptions& opts = {});

struct TrainResult {
  HouseholdModel model;
  std::vector<bool> quantization_padded;         // per appliance
  std::vector<bool> connectivity_underdetermined;  // per appliance
};

// Quantizes each appliance's series into its requested state count and fits
// the connectivity weights against the raw (unquantized) appliance power.
// `lambdas` may be empty (all smoothness weights default to 1) or have one
// entry per appliance. Throws std::invalid_argument on shape mismatches.
TrainResult train_model(const ApplianceSeries& series, const AggregateSeries& agg,
                        const std::vector<int>& states_per_appliance,
                        const std::vector<double>& lambdas = {});

}  // namespace nilm
