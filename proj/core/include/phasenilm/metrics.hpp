#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nilm {

// One house's evaluation inputs: true and estimated per-appliance watts plus
// the per-tick aggregate summed over lines.
struct HouseObservation {
  std::vector<std::vector<double>> x_true;  // L rows of length T
  std::vector<std::vector<double>> x_hat;   // L rows of length T
  std::vector<double> total_aggregate;      // length T, sum over lines of y
};

struct MetricsReport {
  std::vector<std::string> appliance_names;
  std::vector<double> aped;   // per appliance, pooled over houses and ticks
  double average_aped = 0.0;  // mean over appliances
  std::vector<int> house_ticks;  // counted (non-skipped) ticks per house
  int skipped_samples = 0;       // zero-aggregate ticks, pooled
};

// Share of the tick's total consumption misallocated to/from one appliance:
// |x_true - x_hat| / y_total. A tick with zero aggregate has no meaningful
// share; it is skipped (nullopt) and the caller counts it.
std::optional<double> ped(double x_true, double x_hat, double y_total);

// Pools PED over all ticks of all houses: APED_i = sum of PED_i over counted
// ticks / number of counted ticks. Skipped ticks leave both the numerator
// and the denominator. Throws std::invalid_argument on shape mismatches.
MetricsReport aped(const std::vector<std::string>& appliance_names,
                   const std::vector<HouseObservation>& houses);

std::string report_to_json_text(const MetricsReport& report);
std::string report_to_table_text(const MetricsReport& report);

}  // namespace nilm
