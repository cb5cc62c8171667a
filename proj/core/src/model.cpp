#include "phasenilm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nilm {

int HouseholdModel::total_states() const {
  int n = 0;
  for (const auto& a : appliances) n += a.num_states();
  return n;
}

std::vector<int> HouseholdModel::state_offsets() const {
  std::vector<int> offsets(appliances.size());
  int n = 0;
  for (std::size_t i = 0; i < appliances.size(); ++i) {
    offsets[i] = n;
    n += appliances[i].num_states();
  }
  return offsets;
}

void HouseholdModel::validate() const {
  if (num_lines < 1) {
    throw std::invalid_argument("model: num_lines must be >= 1, got " + std::to_string(num_lines));
  }
  if (appliances.empty()) {
    throw std::invalid_argument("model: at least one appliance is required");
  }
  for (std::size_t i = 0; i < appliances.size(); ++i) {
    const auto& a = appliances[i];
    const std::string who = "appliance " + (a.name.empty() ? std::to_string(i + 1) : a.name);
    if (a.num_states() < 2) {
      throw std::invalid_argument(who + ": needs at least 2 states, got " + std::to_string(a.num_states()));
    }
    for (std::size_t k = 0; k < a.mu.size(); ++k) {
      if (!(a.mu[k] >= 0.0)) {
        throw std::invalid_argument(who + ": consumption level " + std::to_string(k + 1) + " is negative");
      }
      if (k > 0 && a.mu[k] < a.mu[k - 1]) {
        throw std::invalid_argument(who + ": consumption levels must be sorted ascending");
      }
    }
    if (static_cast<int>(a.weights.size()) != num_lines) {
      throw std::invalid_argument(who + ": has " + std::to_string(a.weights.size()) +
                                  " line weights but the model has " + std::to_string(num_lines) + " lines");
    }
    double sum = 0.0;
    for (double w : a.weights) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw std::invalid_argument(who + ": line weights must lie in [0,1]");
      }
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument(who + ": line weights sum to " + std::to_string(sum) + ", expected 1");
    }
    if (!(a.lambda >= 0.0)) {
      throw std::invalid_argument(who + ": smoothness weight must be >= 0");
    }
  }
}

void AggregateSeries::validate() const {
  if (num_lines < 1) {
    throw std::invalid_argument("aggregate series: needs at least one line column");
  }
  if (values.empty() || values.size() % static_cast<std::size_t>(num_lines) != 0) {
    throw std::invalid_argument("aggregate series: value count is not a multiple of the line count");
  }
  for (double v : values) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("aggregate series: readings must be >= 0 watts");
    }
  }
  if (!timestamps.empty()) {
    if (static_cast<int>(timestamps.size()) != num_samples()) {
      throw std::invalid_argument("aggregate series: timestamp count does not match the sample count");
    }
    for (std::size_t t = 1; t < timestamps.size(); ++t) {
      if (timestamps[t] <= timestamps[t - 1]) {
        throw std::invalid_argument("aggregate series: timestamps must be strictly increasing");
      }
    }
  }
}

GroundLayout make_layout(const HouseholdModel& model, int horizon) {
  GroundLayout layout;
  layout.total_states = model.total_states();
  layout.horizon = horizon;
  layout.offsets = model.state_offsets();
  layout.state_to_appliance.resize(layout.total_states);
  for (int i = 0; i < model.num_appliances(); ++i) {
    for (int k = 0; k < model.appliances[i].num_states(); ++k) {
      layout.state_to_appliance[layout.offsets[i] + k] = i;
    }
  }
  return layout;
}

void validate_assignment(const HouseholdModel& model, const StateAssignment& s, int horizon) {
  if (s.num_appliances != model.num_appliances()) {
    throw std::invalid_argument("assignment: has " + std::to_string(s.num_appliances) +
                                " appliances, model has " + std::to_string(model.num_appliances()));
  }
  if (s.horizon != horizon) {
    throw std::invalid_argument("assignment: horizon " + std::to_string(s.horizon) +
                                " does not match series length " + std::to_string(horizon));
  }
  for (int i = 0; i < s.num_appliances; ++i) {
    const int n_i = model.appliances[i].num_states();
    for (int t = 0; t < s.horizon; ++t) {
      const int v = s.at(i, t);
      if (v < 0 || v >= n_i) {
        throw std::invalid_argument("assignment: state " + std::to_string(v + 1) + " out of range for appliance " +
                                    std::to_string(i + 1) + " at tick " + std::to_string(t + 1));
      }
    }
  }
}

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) { known = true; break; }
    }
    if (!known) {
      throw std::invalid_argument("model json: unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

}  // namespace

HouseholdModel model_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model json: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("model json: top level must be an object");
  reject_unknown_keys(doc, {"num_lines", "appliances"}, "the top-level object");
  HouseholdModel model;
  if (!doc.contains("num_lines") || !doc["num_lines"].is_number_integer()) {
    throw std::invalid_argument("model json: \"num_lines\" integer field is required");
  }
  model.num_lines = doc["num_lines"].get<int>();
  if (!doc.contains("appliances") || !doc["appliances"].is_array()) {
    throw std::invalid_argument("model json: \"appliances\" array field is required");
  }
  for (const auto& entry : doc["appliances"]) {
    if (!entry.is_object()) throw std::invalid_argument("model json: appliance entries must be objects");
    reject_unknown_keys(entry, {"name", "mu", "weights", "lambda"}, "an appliance entry");
    ApplianceModel a;
    if (!entry.contains("name") || !entry["name"].is_string()) {
      throw std::invalid_argument("model json: appliance \"name\" string field is required");
    }
    a.name = entry["name"].get<std::string>();
    if (!entry.contains("mu") || !entry["mu"].is_array()) {
      throw std::invalid_argument("model json: appliance \"" + a.name + "\" needs a \"mu\" array");
    }
    a.mu = entry["mu"].get<std::vector<double>>();
    if (!entry.contains("weights") || !entry["weights"].is_array()) {
      throw std::invalid_argument("model json: appliance \"" + a.name + "\" needs a \"weights\" array");
    }
    a.weights = entry["weights"].get<std::vector<double>>();
    a.lambda = entry.value("lambda", 1.0);
    model.appliances.push_back(std::move(a));
  }
  model.validate();
  return model;
}

std::string model_to_json_text(const HouseholdModel& model) {
  json doc;
  doc["num_lines"] = model.num_lines;
  doc["appliances"] = json::array();
  for (const auto& a : model.appliances) {
    json entry;
    entry["name"] = a.name;
    entry["mu"] = a.mu;
    entry["weights"] = a.weights;
    entry["lambda"] = a.lambda;
    doc["appliances"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

HouseholdModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json_text(buf.str());
}

void save_model(const HouseholdModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json_text(model);
}

}  // namespace nilm
