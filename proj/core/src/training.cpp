#include "phasenilm/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nilm {

void ApplianceSeries::validate() const {
  if (power.size() != names.size()) {
    throw std::invalid_argument("appliance series has " + std::to_string(power.size()) + " power rows but " +
                                std::to_string(names.size()) + " names");
  }
  const std::size_t horizon = power.empty() ? 0 : power[0].size();
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (power[i].size() != horizon) {
      throw std::invalid_argument("appliance series rows have unequal lengths (row " + std::to_string(i) + ")");
    }
    for (double v : power[i]) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument("appliance '" + names[i] + "' has a negative or non-finite reading");
      }
    }
  }
  if (!timestamps.empty()) {
    if (timestamps.size() != horizon) {
      throw std::invalid_argument("appliance series has " + std::to_string(timestamps.size()) + " timestamps for " +
                                  std::to_string(horizon) + " samples");
    }
    for (std::size_t t = 1; t < timestamps.size(); ++t) {
      if (timestamps[t] <= timestamps[t - 1]) {
        throw std::invalid_argument("appliance series timestamps must be strictly increasing");
      }
    }
  }
}

QuantizationResult lloyd_max_quantize(const std::vector<double>& series, int k) {
  if (k < 2) {
    throw std::invalid_argument("lloyd_max_quantize: need at least 2 states, got " + std::to_string(k));
  }
  if (static_cast<int>(series.size()) < k) {
    throw std::invalid_argument("lloyd_max_quantize: " + std::to_string(series.size()) + " samples cannot support " +
                                std::to_string(k) + " states");
  }

  std::vector<double> sample = series;
  std::sort(sample.begin(), sample.end());
  const int n = static_cast<int>(sample.size());

  // Degenerate input: fewer distinct readings than requested states.
  std::vector<double> distinct;
  for (double v : sample) {
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  }
  if (static_cast<int>(distinct.size()) < k) {
    QuantizationResult out;
    out.levels = distinct;
    out.levels.resize(static_cast<std::size_t>(k), distinct.back());
    out.padded = true;
    return out;
  }

  // Centroids start at the mid-bin quantiles (linear interpolation).
  std::vector<double> centroids(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double pos = (2.0 * j + 1.0) / (2.0 * k) * (n - 1);
    const int lo = static_cast<int>(pos);
    const double frac = pos - lo;
    centroids[j] = lo + 1 < n ? sample[lo] * (1.0 - frac) + sample[lo + 1] * frac : sample[lo];
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> prev_assign;
  for (int sweep = 0; sweep < 1000; ++sweep) {
    // Nearest centroid, ties toward the lower index.
    for (int s = 0; s < n; ++s) {
      int best = 0;
      double best_dist = std::fabs(sample[s] - centroids[0]);
      for (int j = 1; j < k; ++j) {
        const double dist = std::fabs(sample[s] - centroids[j]);
        if (dist < best_dist) {
          best_dist = dist;
          best = j;
        }
      }
      assign[s] = best;
    }
    if (assign == prev_assign) break;
    prev_assign = assign;

    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int s = 0; s < n; ++s) {
      sums[assign[s]] += sample[s];
      ++counts[assign[s]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) centroids[j] = sums[j] / counts[j];
    }
    // Reseed empty clusters at the worst-quantized samples, one each.
    std::vector<double> errors;
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      if (errors.empty()) {
        errors.resize(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s) errors[s] = std::fabs(sample[s] - centroids[assign[s]]);
      }
      const int worst = static_cast<int>(std::max_element(errors.begin(), errors.end()) - errors.begin());
      centroids[j] = sample[worst];
      errors[worst] = -1.0;
    }
  }

  std::sort(centroids.begin(), centroids.end());
  QuantizationResult out;
  out.levels = std::move(centroids);
  return out;
}

std::vector<double> simplex_project(const std::vector<double>& v) {
  if (v.empty()) {
    throw std::invalid_argument("simplex_project: empty vector");
  }
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  double running = 0.0;
  double threshold = sorted[0] - 1.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }

  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::max(v[j] - threshold, 0.0);
  }
  return out;
}

namespace {

double fit_objective(const ApplianceSeries& series, const AggregateSeries& agg,
                     const std::vector<double>& weights) {
  const int n_appl = series.num_appliances();
  const int horizon = series.num_samples();
  const int lines = agg.num_lines;
  double obj = 0.0;
  for (int r = 0; r < lines; ++r) {
    for (int t = 0; t < horizon; ++t) {
      double yhat = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        yhat += weights[static_cast<std::size_t>(i) * lines + r] * series.power[i][t];
      }
      const double resid = agg.at(t, r) - yhat;
      obj += resid * resid;
    }
  }
  return obj;
}

}  // namespace

ConnectivityFit fit_connectivity(const ApplianceSeries& series, const AggregateSeries& agg,
                                 const ConnectivityFitOptions& opts) {
  series.validate();
  agg.validate();
  const int n_appl = series.num_appliances();
  const int horizon = series.num_samples();
  const int lines = agg.num_lines;
  if (n_appl == 0) {
    throw std::invalid_argument("fit_connectivity: no appliances");
  }
  if (horizon != agg.num_samples()) {
    throw std::invalid_argument("fit_connectivity: appliance series has " + std::to_string(horizon) +
                                " samples, aggregate has " + std::to_string(agg.num_samples()));
  }
  if (opts.max_iters < 0) {
    throw std::invalid_argument("fit_connectivity: max_iters must be >= 0");
  }

  ConnectivityFit fit;
  fit.underdetermined.assign(static_cast<std::size_t>(n_appl), false);
  for (int i = 0; i < n_appl; ++i) {
    bool all_zero = true;
    for (double v : series.power[i]) {
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    }
    fit.underdetermined[i] = all_zero;
  }

  // Gram matrix over appliances and the data cross-term; the gradient of the
  // objective in W is 2 (gram W - cross).
  std::vector<double> gram(static_cast<std::size_t>(n_appl) * n_appl, 0.0);
  std::vector<double> cross(static_cast<std::size_t>(n_appl) * lines, 0.0);
  for (int i = 0; i < n_appl; ++i) {
    for (int j = i; j < n_appl; ++j) {
      double dot = 0.0;
      for (int t = 0; t < horizon; ++t) dot += series.power[i][t] * series.power[j][t];
      gram[static_cast<std::size_t>(i) * n_appl + j] = dot;
      gram[static_cast<std::size_t>(j) * n_appl + i] = dot;
    }
    for (int r = 0; r < lines; ++r) {
      double dot = 0.0;
      for (int t = 0; t < horizon; ++t) dot += series.power[i][t] * agg.at(t, r);
      cross[static_cast<std::size_t>(i) * lines + r] = dot;
    }
  }

  // Step size 1/L_f with L_f = 2 * lambda_max(gram), estimated by 50 power
  // iterations from the all-ones vector.
  std::vector<double> vec(static_cast<std::size_t>(n_appl), 1.0);
  std::vector<double> next(static_cast<std::size_t>(n_appl));
  double lipschitz = 0.0;
  for (int step = 0; step < 50; ++step) {
    double norm_sq = 0.0;
    double quad = 0.0;
    for (int i = 0; i < n_appl; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n_appl; ++j) acc += gram[static_cast<std::size_t>(i) * n_appl + j] * vec[j];
      next[i] = acc;
      quad += vec[i] * acc;
      norm_sq += vec[i] * vec[i];
    }
    lipschitz = 2.0 * quad / norm_sq;
    double next_norm = 0.0;
    for (double x : next) next_norm += x * x;
    next_norm = std::sqrt(next_norm);
    if (next_norm == 0.0) {
      lipschitz = 0.0;
      break;
    }
    for (int i = 0; i < n_appl; ++i) vec[i] = next[i] / next_norm;
  }

  // Start at the uniform split; rows of zero-power appliances never move.
  fit.weights.assign(static_cast<std::size_t>(n_appl) * lines, 1.0 / lines);
  if (opts.record_objective) fit.objective_trace.push_back(fit_objective(series, agg, fit.weights));

  if (lipschitz > 0.0) {
    const double step = 1.0 / lipschitz;
    std::vector<double> row(static_cast<std::size_t>(lines));
    for (int iter = 0; iter < opts.max_iters; ++iter) {
      double move = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        for (int r = 0; r < lines; ++r) {
          double grad = -cross[static_cast<std::size_t>(i) * lines + r];
          for (int j = 0; j < n_appl; ++j) {
            grad += gram[static_cast<std::size_t>(i) * n_appl + j] * fit.weights[static_cast<std::size_t>(j) * lines + r];
          }
          row[r] = fit.weights[static_cast<std::size_t>(i) * lines + r] - step * 2.0 * grad;
        }
        const std::vector<double> projected = simplex_project(row);
        for (int r = 0; r < lines; ++r) {
          const std::size_t idx = static_cast<std::size_t>(i) * lines + r;
          move = std::max(move, std::fabs(projected[r] - fit.weights[idx]));
          fit.weights[idx] = projected[r];
        }
      }
      ++fit.iterations;
      if (opts.record_objective) fit.objective_trace.push_back(fit_objective(series, agg, fit.weights));
      if (move < opts.tol) break;
    }
  }

  for (int i = 0; i < n_appl; ++i) {
    if (!fit.underdetermined[i]) continue;
    for (int r = 0; r < lines; ++r) fit.weights[static_cast<std::size_t>(i) * lines + r] = 1.0 / lines;
  }
  fit.objective = fit_objective(series, agg, fit.weights);
  return fit;
}

TrainResult train_model(const ApplianceSeries& series, const AggregateSeries& agg,
                        const std::vector<int>& states_per_appliance,
                        const std::vector<double>& lambdas) {
  series.validate();
  const int n_appl = series.num_appliances();
  if (static_cast<int>(states_per_appliance.size()) != n_appl) {
    throw std::invalid_argument("train_model: " + std::to_string(states_per_appliance.size()) +
                                " state counts for " + std::to_string(n_appl) + " appliances");
  }
  if (!lambdas.empty() && static_cast<int>(lambdas.size()) != n_appl) {
    throw std::invalid_argument("train_model: " + std::to_string(lambdas.size()) + " lambdas for " +
                                std::to_string(n_appl) + " appliances");
  }

  TrainResult out;
  out.quantization_padded.assign(static_cast<std::size_t>(n_appl), false);

  const ConnectivityFit fit = fit_connectivity(series, agg);
  out.connectivity_underdetermined = fit.underdetermined;

  out.model.num_lines = agg.num_lines;
  out.model.appliances.resize(static_cast<std::size_t>(n_appl));
  for (int i = 0; i < n_appl; ++i) {
    auto& a = out.model.appliances[i];
    a.name = series.names[i];
    QuantizationResult q = lloyd_max_quantize(series.power[i], states_per_appliance[i]);
    a.mu = std::move(q.levels);
    out.quantization_padded[i] = q.padded;
    a.weights.assign(fit.weights.begin() + static_cast<std::ptrdiff_t>(i) * agg.num_lines,
                     fit.weights.begin() + static_cast<std::ptrdiff_t>(i + 1) * agg.num_lines);
    a.lambda = lambdas.empty() ? 1.0 : lambdas[i];
  }
  return out;
}

}  // namespace nilm
