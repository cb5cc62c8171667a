#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nilm {

// One appliance: its per-state consumption levels (watts, ascending), the
// fraction of power it draws from each line, and the temporal smoothness
// weight used by the disaggregation objective.
struct ApplianceModel {
  std::string name;
  std::vector<double> mu;       // consumption level per state, sorted ascending, >= 0
  std::vector<double> weights;  // per-line draw fraction, in [0,1], sums to 1
  double lambda = 1.0;          // smoothness weight, >= 0

  int num_states() const { return static_cast<int>(mu.size()); }
};

struct HouseholdModel {
  int num_lines = 2;
  std::vector<ApplianceModel> appliances;

  int num_appliances() const { return static_cast<int>(appliances.size()); }

  // Total number of (appliance, state) slots; the per-time width of the
  // ground set.
  int total_states() const;

  // Start of appliance i's contiguous state block within [0, total_states()).
  std::vector<int> state_offsets() const;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

// T x R aggregate power readings, one column per line. Stored row-major
// (time-major). Timestamps, when present, are strictly increasing epoch
// seconds.
struct AggregateSeries {
  int num_lines = 0;
  std::vector<double> values;           // size T * num_lines
  std::vector<std::int64_t> timestamps; // empty, or size T

  int num_samples() const {
    return num_lines == 0 ? 0 : static_cast<int>(values.size()) / num_lines;
  }
  double at(int t, int r) const { return values[static_cast<std::size_t>(t) * num_lines + r]; }
  double& at(int t, int r) { return values[static_cast<std::size_t>(t) * num_lines + r]; }

  void validate() const;
};

// One state per (appliance, time). States are 0-based internally; entry
// (i, t) must lie in [0, N_i). Exactly one state per appliance per tick is
// what membership in the feasible family means.
struct StateAssignment {
  int num_appliances = 0;
  int horizon = 0;
  std::vector<int> states;  // size L * T, appliance-major: states[i * T + t]

  static StateAssignment zeros(int num_appliances, int horizon) {
    StateAssignment s;
    s.num_appliances = num_appliances;
    s.horizon = horizon;
    s.states.assign(static_cast<std::size_t>(num_appliances) * horizon, 0);
    return s;
  }

  int at(int i, int t) const { return states[static_cast<std::size_t>(i) * horizon + t]; }
  int& at(int i, int t) { return states[static_cast<std::size_t>(i) * horizon + t]; }

  bool operator==(const StateAssignment& o) const = default;
};

// Ground-set layout. Elements are (appliance, local state, time) triples laid
// out time-major in blocks of width N: flat = t * N + offset(i) + state.
struct GroundLayout {
  int total_states = 0;  // N
  int horizon = 0;       // T
  std::vector<int> offsets;             // per appliance
  std::vector<int> state_to_appliance;  // size N

  int size() const { return total_states * horizon; }

  int flat_index(int appliance, int state, int time) const {
    return time * total_states + offsets[appliance] + state;
  }

  struct Element {
    int appliance;
    int state;  // local, within the appliance's block
    int time;
  };

  Element decode(int flat) const {
    Element e;
    e.time = flat / total_states;
    const int within = flat % total_states;
    e.appliance = state_to_appliance[within];
    e.state = within - offsets[e.appliance];
    return e;
  }
};

GroundLayout make_layout(const HouseholdModel& model, int horizon);

// Checks s against the model's state counts and the expected horizon; throws
// std::invalid_argument on any violation.
void validate_assignment(const HouseholdModel& model, const StateAssignment& s, int horizon);

// JSON persistence of a household model. Schema:
//   {"num_lines": R, "appliances": [{"name": ..., "mu": [...],
//    "weights": [...], "lambda": ...}]}
// Unknown fields are rejected; "lambda" may be omitted and defaults to 1.
HouseholdModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const HouseholdModel& model);
HouseholdModel load_model(const std::string& path);
void save_model(const HouseholdModel& model, const std::string& path);

}  // namespace nilm
