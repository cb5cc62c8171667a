#include "phasenilm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace nilm {

std::optional<double> ped(double x_true, double x_hat, double y_total) {
  if (y_total == 0.0) return std::nullopt;
  return std::fabs(x_true - x_hat) / y_total;
}

MetricsReport aped(const std::vector<std::string>& appliance_names,
                   const std::vector<HouseObservation>& houses) {
  const std::size_t n_appl = appliance_names.size();
  if (n_appl == 0) throw std::invalid_argument("aped: no appliances");

  MetricsReport report;
  report.appliance_names = appliance_names;
  report.aped.assign(n_appl, 0.0);
  report.house_ticks.reserve(houses.size());

  std::vector<double> sums(n_appl, 0.0);
  long long counted_total = 0;
  for (std::size_t h = 0; h < houses.size(); ++h) {
    const auto& house = houses[h];
    if (house.x_true.size() != n_appl || house.x_hat.size() != n_appl) {
      throw std::invalid_argument("aped: house " + std::to_string(h + 1) + " has " +
                                  std::to_string(house.x_true.size()) + "/" + std::to_string(house.x_hat.size()) +
                                  " appliance rows, expected " + std::to_string(n_appl));
    }
    const std::size_t horizon = house.total_aggregate.size();
    for (std::size_t i = 0; i < n_appl; ++i) {
      if (house.x_true[i].size() != horizon || house.x_hat[i].size() != horizon) {
        throw std::invalid_argument("aped: house " + std::to_string(h + 1) + " appliance " +
                                    std::to_string(i + 1) + " row length does not match the aggregate");
      }
    }
    int counted = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
      if (house.total_aggregate[t] == 0.0) {
        ++report.skipped_samples;
        continue;
      }
      ++counted;
      for (std::size_t i = 0; i < n_appl; ++i) {
        sums[i] += *ped(house.x_true[i][t], house.x_hat[i][t], house.total_aggregate[t]);
      }
    }
    report.house_ticks.push_back(counted);
    counted_total += counted;
  }

  if (counted_total == 0) {
    throw std::invalid_argument("aped: every tick was skipped (zero aggregate throughout)");
  }
  for (std::size_t i = 0; i < n_appl; ++i) {
    report.aped[i] = sums[i] / static_cast<double>(counted_total);
    report.average_aped += report.aped[i];
  }
  report.average_aped /= static_cast<double>(n_appl);
  return report;
}

std::string report_to_json_text(const MetricsReport& report) {
  nlohmann::json doc;
  doc["appliances"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.appliance_names.size(); ++i) {
    doc["appliances"].push_back({{"name", report.appliance_names[i]}, {"aped", report.aped[i]}});
  }
  doc["average_aped"] = report.average_aped;
  doc["house_ticks"] = report.house_ticks;
  doc["skipped_samples"] = report.skipped_samples;
  return doc.dump(2) + "\n";
}

std::string report_to_table_text(const MetricsReport& report) {
  std::size_t width = std::string("appliance").size();
  for (const auto& name : report.appliance_names) width = std::max(width, name.size());

  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-*s  %10s\n", static_cast<int>(width), "appliance", "APED");
  out += line;
  for (std::size_t i = 0; i < report.appliance_names.size(); ++i) {
    std::snprintf(line, sizeof line, "%-*s  %10.4f\n", static_cast<int>(width),
                  report.appliance_names[i].c_str(), report.aped[i]);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-*s  %10.4f\n", static_cast<int>(width), "average", report.average_aped);
  out += line;
  if (report.skipped_samples > 0) {
    std::snprintf(line, sizeof line, "(%d zero-aggregate ticks skipped)\n", report.skipped_samples);
    out += line;
  }
  return out;
}

}  // namespace nilm
