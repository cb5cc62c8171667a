#include "phasenilm/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "phasenilm/rng.hpp"

namespace fs = std::filesystem;

namespace nilm {

void Dataset::validate() const {
  agg.validate();
  if (appliances) {
    appliances->validate();
    if (appliances->num_samples() != agg.num_samples()) {
      throw std::invalid_argument("dataset: appliance series has " + std::to_string(appliances->num_samples()) +
                                  " samples, aggregate has " + std::to_string(agg.num_samples()));
    }
    if (appliances->timestamps != agg.timestamps) {
      throw std::invalid_argument("dataset: appliance and aggregate timestamp grids differ");
    }
  }
  if (planted_states && !planted_model) {
    throw std::invalid_argument("dataset: planted states without a planted model");
  }
  if (planted_model) {
    planted_model->validate();
    if (planted_model->num_lines != agg.num_lines) {
      throw std::invalid_argument("dataset: planted model has " + std::to_string(planted_model->num_lines) +
                                  " lines, aggregate has " + std::to_string(agg.num_lines));
    }
    if (planted_states) {
      validate_assignment(*planted_model, *planted_states, agg.num_samples());
    }
    if (appliances) {
      for (int i = 0; i < planted_model->num_appliances(); ++i) {
        if (i >= appliances->num_appliances() || appliances->names[i] != planted_model->appliances[i].name) {
          throw std::invalid_argument("dataset: appliance series names do not match the planted model");
        }
      }
      if (appliances->num_appliances() != planted_model->num_appliances()) {
        throw std::invalid_argument("dataset: appliance series names do not match the planted model");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic households
// ---------------------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (num_lines < 1) throw std::invalid_argument("synthetic spec: num_lines must be >= 1");
  if (horizon < 1) throw std::invalid_argument("synthetic spec: horizon must be >= 1");
  if (!(p_stay > 0.0 && p_stay <= 1.0)) {
    throw std::invalid_argument("synthetic spec: p_stay must lie in (0, 1]");
  }
  if (!(noise_std >= 0.0)) throw std::invalid_argument("synthetic spec: noise_std must be >= 0");
  if (!(gap > 0.0)) throw std::invalid_argument("synthetic spec: gap must be > 0");
  if (appliances.empty()) throw std::invalid_argument("synthetic spec: at least one appliance is required");

  for (std::size_t i = 0; i < appliances.size(); ++i) {
    const auto& a = appliances[i];
    const std::string who = "synthetic appliance " + (a.name.empty() ? std::to_string(i + 1) : a.name);
    if (a.num_states < 2) {
      throw std::invalid_argument(who + ": needs at least 2 states");
    }
    if (!a.levels.empty()) {
      if (static_cast<int>(a.levels.size()) != a.num_states) {
        throw std::invalid_argument(who + ": " + std::to_string(a.levels.size()) + " levels for " +
                                    std::to_string(a.num_states) + " states");
      }
      for (std::size_t k = 0; k < a.levels.size(); ++k) {
        if (!(a.levels[k] >= 0.0)) throw std::invalid_argument(who + ": levels must be >= 0");
        if (k > 0 && a.levels[k] < a.levels[k - 1]) {
          throw std::invalid_argument(who + ": levels must be sorted ascending");
        }
      }
    }
    const auto& c = a.connection;
    if (c.kind == SyntheticConnection::Kind::single_line) {
      if (c.line < 0 || c.line >= num_lines) {
        throw std::invalid_argument(who + ": connection line out of range");
      }
    } else {
      if (c.line_a < 0 || c.line_a >= num_lines || c.line_b < 0 || c.line_b >= num_lines || c.line_a == c.line_b) {
        throw std::invalid_argument(who + ": split connection needs two distinct in-range lines");
      }
      if (!(c.fraction >= 0.0 && c.fraction <= 1.0)) {
        throw std::invalid_argument(who + ": split fraction must lie in [0, 1]");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!a.name.empty() && appliances[j].name == a.name) {
        throw std::invalid_argument("synthetic spec: duplicate appliance name \"" + a.name + "\"");
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
      throw std::invalid_argument("synthetic spec json: unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

SyntheticConnection connection_from_json(const json& obj, const std::string& who) {
  if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string()) {
    throw std::invalid_argument("synthetic spec json: " + who + " needs a connection object with a \"type\"");
  }
  SyntheticConnection c;
  const std::string type = obj["type"].get<std::string>();
  if (type == "single_line") {
    reject_unknown_keys(obj, {"type", "line"}, who + " connection");
    if (!obj.contains("line") || !obj["line"].is_number_integer()) {
      throw std::invalid_argument("synthetic spec json: " + who + " single_line connection needs a \"line\"");
    }
    c.kind = SyntheticConnection::Kind::single_line;
    c.line = obj["line"].get<int>() - 1;  // external line numbers are 1-based
  } else if (type == "split_pair") {
    reject_unknown_keys(obj, {"type", "lines", "fraction"}, who + " connection");
    if (!obj.contains("lines") || !obj["lines"].is_array() || obj["lines"].size() != 2) {
      throw std::invalid_argument("synthetic spec json: " + who + " split_pair connection needs \"lines\": [a, b]");
    }
    if (!obj.contains("fraction") || !obj["fraction"].is_number()) {
      throw std::invalid_argument("synthetic spec json: " + who + " split_pair connection needs a \"fraction\"");
    }
    c.kind = SyntheticConnection::Kind::split_pair;
    c.line_a = obj["lines"][0].get<int>() - 1;
    c.line_b = obj["lines"][1].get<int>() - 1;
    c.fraction = obj["fraction"].get<double>();
  } else {
    throw std::invalid_argument("synthetic spec json: unknown connection type \"" + type + "\"");
  }
  return c;
}

}  // namespace

SyntheticSpec synthetic_spec_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("synthetic spec json: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("synthetic spec json: top level must be an object");
  reject_unknown_keys(doc, {"num_lines", "horizon", "p_stay", "noise_std", "gap", "seed", "appliances"},
                      "the top-level object");

  SyntheticSpec spec;
  if (!doc.contains("num_lines") || !doc["num_lines"].is_number_integer()) {
    throw std::invalid_argument("synthetic spec json: \"num_lines\" integer field is required");
  }
  spec.num_lines = doc["num_lines"].get<int>();
  if (!doc.contains("horizon") || !doc["horizon"].is_number_integer()) {
    throw std::invalid_argument("synthetic spec json: \"horizon\" integer field is required");
  }
  spec.horizon = doc["horizon"].get<int>();
  spec.p_stay = doc.value("p_stay", 0.95);
  spec.noise_std = doc.value("noise_std", 0.0);
  spec.gap = doc.value("gap", 50.0);
  spec.seed = doc.value("seed", std::uint64_t{0});

  if (!doc.contains("appliances") || !doc["appliances"].is_array()) {
    throw std::invalid_argument("synthetic spec json: \"appliances\" array field is required");
  }
  for (const auto& entry : doc["appliances"]) {
    if (!entry.is_object()) throw std::invalid_argument("synthetic spec json: appliance entries must be objects");
    reject_unknown_keys(entry, {"name", "num_states", "levels", "connection"}, "an appliance entry");
    SyntheticAppliance a;
    if (!entry.contains("name") || !entry["name"].is_string()) {
      throw std::invalid_argument("synthetic spec json: appliance \"name\" string field is required");
    }
    a.name = entry["name"].get<std::string>();
    if (!entry.contains("num_states") || !entry["num_states"].is_number_integer()) {
      throw std::invalid_argument("synthetic spec json: appliance \"" + a.name + "\" needs \"num_states\"");
    }
    a.num_states = entry["num_states"].get<int>();
    if (entry.contains("levels")) {
      const auto& lv = entry["levels"];
      if (lv.is_string()) {
        if (lv.get<std::string>() != "auto") {
          throw std::invalid_argument("synthetic spec json: appliance \"" + a.name +
                                      "\" levels must be an array or \"auto\"");
        }
      } else if (lv.is_array()) {
        a.levels = lv.get<std::vector<double>>();
      } else {
        throw std::invalid_argument("synthetic spec json: appliance \"" + a.name +
                                    "\" levels must be an array or \"auto\"");
      }
    }
    if (!entry.contains("connection")) {
      throw std::invalid_argument("synthetic spec json: appliance \"" + a.name + "\" needs a \"connection\"");
    }
    a.connection = connection_from_json(entry["connection"], "appliance \"" + a.name + "\"");
    spec.appliances.push_back(std::move(a));
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return synthetic_spec_from_json_text(buf.str());
}

Dataset generate(const SyntheticSpec& input_spec) {
  SyntheticSpec spec = input_spec;
  for (std::size_t i = 0; i < spec.appliances.size(); ++i) {
    if (spec.appliances[i].name.empty()) {
      spec.appliances[i].name = "appliance_" + std::to_string(i + 1);
    }
  }
  spec.validate();

  const int n_appl = static_cast<int>(spec.appliances.size());
  const int horizon = spec.horizon;
  const int lines = spec.num_lines;

  // Auto level base: appliance i gets spacing gap * B^i with B one larger
  // than the widest state count, so no two joint states share a total.
  int widest = 0;
  for (const auto& a : spec.appliances) widest = std::max(widest, a.num_states);
  const double level_base = static_cast<double>(widest) + 1.0;

  HouseholdModel model;
  model.num_lines = lines;
  double spacing = spec.gap;
  for (int i = 0; i < n_appl; ++i) {
    const auto& sa = spec.appliances[i];
    ApplianceModel a;
    a.name = sa.name;
    if (!sa.levels.empty()) {
      a.mu = sa.levels;
    } else {
      a.mu.resize(static_cast<std::size_t>(sa.num_states));
      for (int k = 0; k < sa.num_states; ++k) a.mu[k] = k * spacing;
    }
    spacing *= level_base;
    a.weights.assign(static_cast<std::size_t>(lines), 0.0);
    if (sa.connection.kind == SyntheticConnection::Kind::single_line) {
      a.weights[sa.connection.line] = 1.0;
    } else {
      a.weights[sa.connection.line_a] = sa.connection.fraction;
      a.weights[sa.connection.line_b] = 1.0 - sa.connection.fraction;
    }
    a.lambda = 1.0;
    model.appliances.push_back(std::move(a));
  }
  model.validate();

  // Per-appliance Markov chains, each on its own seed stream.
  StateAssignment states = StateAssignment::zeros(n_appl, horizon);
  for (int i = 0; i < n_appl; ++i) {
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(i) + 1));
    const int n_states = spec.appliances[i].num_states;
    int cur = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_states)));
    states.at(i, 0) = cur;
    for (int t = 1; t < horizon; ++t) {
      if (rng.uniform01() >= spec.p_stay) {
        int jump = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_states - 1)));
        if (jump >= cur) ++jump;  // uniform over the other states
        cur = jump;
      }
      states.at(i, t) = cur;
    }
  }

  Dataset ds;
  ds.appliances.emplace();
  ds.appliances->names.reserve(static_cast<std::size_t>(n_appl));
  ds.appliances->power.assign(static_cast<std::size_t>(n_appl), std::vector<double>(static_cast<std::size_t>(horizon)));
  for (int i = 0; i < n_appl; ++i) {
    ds.appliances->names.push_back(model.appliances[i].name);
    for (int t = 0; t < horizon; ++t) {
      ds.appliances->power[i][t] = model.appliances[i].mu[states.at(i, t)];
    }
  }

  Rng noise(Rng::mix(spec.seed, 0));
  ds.agg.num_lines = lines;
  ds.agg.values.assign(static_cast<std::size_t>(horizon) * lines, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int r = 0; r < lines; ++r) {
      double y = 0.0;
      for (int i = 0; i < n_appl; ++i) {
        y += model.appliances[i].weights[r] * ds.appliances->power[i][t];
      }
      if (spec.noise_std > 0.0) {
        y = std::max(0.0, y + noise.normal(0.0, spec.noise_std));
      }
      ds.agg.at(t, r) = y;
    }
  }

  ds.agg.timestamps.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) ds.agg.timestamps[t] = 1700000040 + 60LL * t;
  ds.appliances->timestamps = ds.agg.timestamps;

  ds.planted_model = std::move(model);
  ds.planted_states = std::move(states);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// CSV ingestion and persistence
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void csv_error(const std::string& path, int lineno, const std::string& what) {
  throw std::runtime_error(path + " line " + std::to_string(lineno) + ": " + what);
}

std::int64_t parse_timestamp(const std::string& field, const std::string& path, int lineno) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    csv_error(path, lineno, "cannot parse \"" + field + "\" as an epoch-second timestamp");
  }
  return value;
}

double parse_watts(const std::string& field, const std::string& path, int lineno) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    csv_error(path, lineno, "cannot parse \"" + field + "\" as a number");
  }
  return value;
}

std::string format_watts(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

NamedSeriesTable load_named_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  if (header.empty() || header[0] != "timestamp") {
    csv_error(path, 1, "header must start with \"timestamp\"");
  }
  if (header.size() < 2) csv_error(path, 1, "header needs at least one value column");

  NamedSeriesTable table;
  table.names.assign(header.begin() + 1, header.end());
  table.columns.resize(table.names.size());

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) csv_error(path, lineno, "empty row");
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      csv_error(path, lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    }
    const std::int64_t ts = parse_timestamp(fields[0], path, lineno);
    if (!table.timestamps.empty() && ts <= table.timestamps.back()) {
      csv_error(path, lineno, "timestamps must be strictly increasing");
    }
    table.timestamps.push_back(ts);
    for (std::size_t c = 0; c < table.names.size(); ++c) {
      table.columns[c].push_back(parse_watts(fields[c + 1], path, lineno));
    }
  }
  if (table.timestamps.empty()) throw std::runtime_error(path + ": no data rows");
  return table;
}

void save_named_csv(const NamedSeriesTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << "timestamp";
  for (const auto& name : table.names) out << ',' << name;
  out << '\n';
  for (int t = 0; t < table.num_rows(); ++t) {
    out << table.timestamps[t];
    for (const auto& col : table.columns) out << ',' << format_watts(col[t]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing csv file: " + path);
}

AggregateSeries load_aggregate_csv(const std::string& path) {
  const NamedSeriesTable table = load_named_csv(path);
  for (std::size_t r = 0; r < table.names.size(); ++r) {
    const std::string expected = "line_" + std::to_string(r + 1);
    if (table.names[r] != expected) {
      csv_error(path, 1, "aggregate column " + std::to_string(r + 2) + " must be named \"" + expected + "\"");
    }
  }
  AggregateSeries agg;
  agg.num_lines = static_cast<int>(table.names.size());
  agg.timestamps = table.timestamps;
  agg.values.resize(table.timestamps.size() * table.names.size());
  for (int t = 0; t < table.num_rows(); ++t) {
    for (std::size_t r = 0; r < table.names.size(); ++r) {
      agg.at(t, static_cast<int>(r)) = table.columns[r][t];
    }
  }
  try {
    agg.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return agg;
}

void save_aggregate_csv(const AggregateSeries& agg, const std::string& path) {
  if (agg.timestamps.empty()) {
    throw std::runtime_error("cannot write " + path + ": aggregate series has no timestamps");
  }
  NamedSeriesTable table;
  for (int r = 0; r < agg.num_lines; ++r) table.names.push_back("line_" + std::to_string(r + 1));
  table.timestamps = agg.timestamps;
  table.columns.assign(static_cast<std::size_t>(agg.num_lines),
                       std::vector<double>(agg.timestamps.size()));
  for (int t = 0; t < agg.num_samples(); ++t) {
    for (int r = 0; r < agg.num_lines; ++r) table.columns[r][t] = agg.at(t, r);
  }
  save_named_csv(table, path);
}

namespace {

std::string appliance_name_from_path(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  constexpr const char* kPrefix = "appliance_";
  if (stem.rfind(kPrefix, 0) == 0) stem.erase(0, std::string(kPrefix).size());
  return stem;
}

struct WattsStream {
  std::string name;
  std::vector<std::int64_t> timestamps;
  std::vector<double> watts;
};

WattsStream load_watts_csv(const std::string& path) {
  const NamedSeriesTable table = load_named_csv(path);
  if (table.names.size() != 1 || table.names[0] != "watts") {
    csv_error(path, 1, "appliance files must have exactly the columns \"timestamp,watts\"");
  }
  WattsStream stream;
  stream.name = appliance_name_from_path(path);
  stream.timestamps = table.timestamps;
  stream.watts = table.columns[0];
  return stream;
}

std::vector<std::size_t> positions_of(const std::vector<std::int64_t>& grid,
                                      const std::vector<std::int64_t>& subset) {
  std::vector<std::size_t> pos;
  pos.reserve(subset.size());
  std::size_t i = 0;
  for (std::int64_t ts : subset) {
    while (grid[i] != ts) ++i;
    pos.push_back(i++);
  }
  return pos;
}

}  // namespace

Dataset load_csv(const std::string& aggregate_path, const std::vector<std::string>& appliance_paths) {
  const AggregateSeries raw_agg = load_aggregate_csv(aggregate_path);
  std::vector<WattsStream> streams;
  streams.reserve(appliance_paths.size());
  for (const auto& p : appliance_paths) streams.push_back(load_watts_csv(p));

  // Keep only the timestamps present in every stream.
  std::vector<std::int64_t> common = raw_agg.timestamps;
  for (const auto& s : streams) {
    std::vector<std::int64_t> next;
    std::set_intersection(common.begin(), common.end(), s.timestamps.begin(), s.timestamps.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) {
    throw std::runtime_error("no timestamp is present in every input file; nothing to join");
  }

  Dataset ds;
  ds.agg.num_lines = raw_agg.num_lines;
  ds.agg.timestamps = common;
  ds.agg.values.resize(common.size() * static_cast<std::size_t>(raw_agg.num_lines));
  const std::vector<std::size_t> agg_pos = positions_of(raw_agg.timestamps, common);
  for (std::size_t k = 0; k < common.size(); ++k) {
    for (int r = 0; r < raw_agg.num_lines; ++r) {
      ds.agg.at(static_cast<int>(k), r) = raw_agg.at(static_cast<int>(agg_pos[k]), r);
    }
  }

  if (!streams.empty()) {
    ds.appliances.emplace();
    ds.appliances->timestamps = common;
    for (const auto& s : streams) {
      const std::vector<std::size_t> pos = positions_of(s.timestamps, common);
      std::vector<double> watts(common.size());
      for (std::size_t k = 0; k < common.size(); ++k) watts[k] = s.watts[pos[k]];
      ds.appliances->names.push_back(s.name);
      ds.appliances->power.push_back(std::move(watts));
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  ds.validate();
  if (ds.agg.timestamps.empty()) {
    throw std::runtime_error("cannot save dataset: no timestamps to key the CSV rows on");
  }
  fs::create_directories(dir);
  const fs::path base(dir);
  save_aggregate_csv(ds.agg, (base / "aggregate.csv").string());

  if (ds.appliances) {
    for (int i = 0; i < ds.appliances->num_appliances(); ++i) {
      const std::string& name = ds.appliances->names[i];
      if (name.empty() || name.find('/') != std::string::npos) {
        throw std::runtime_error("cannot save dataset: appliance name \"" + name + "\" is not a valid file stem");
      }
      NamedSeriesTable table;
      table.names = {"watts"};
      table.timestamps = ds.agg.timestamps;
      table.columns = {ds.appliances->power[i]};
      save_named_csv(table, (base / ("appliance_" + name + ".csv")).string());
    }
  }
  if (ds.planted_model) {
    save_model(*ds.planted_model, (base / "model.json").string());
  }
  if (ds.planted_states) {
    NamedSeriesTable table;
    table.timestamps = ds.agg.timestamps;
    for (int i = 0; i < ds.planted_model->num_appliances(); ++i) {
      table.names.push_back(ds.planted_model->appliances[i].name);
      std::vector<double> column(static_cast<std::size_t>(ds.planted_states->horizon));
      for (int t = 0; t < ds.planted_states->horizon; ++t) {
        column[t] = ds.planted_states->at(i, t) + 1;  // external states are 1-based
      }
      table.columns.push_back(std::move(column));
    }
    save_named_csv(table, (base / "truth.csv").string());
  }
}

Dataset load_dataset(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base / "aggregate.csv")) {
    throw std::runtime_error("missing aggregate.csv in " + dir);
  }
  Dataset ds;
  ds.agg = load_aggregate_csv((base / "aggregate.csv").string());

  std::vector<std::string> appliance_files;
  for (const auto& entry : fs::directory_iterator(base)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("appliance_", 0) == 0 && fname.size() > 14 && fname.substr(fname.size() - 4) == ".csv") {
      appliance_files.push_back(entry.path().string());
    }
  }
  std::sort(appliance_files.begin(), appliance_files.end());

  if (fs::exists(base / "model.json")) {
    ds.planted_model = load_model((base / "model.json").string());
  }

  if (!appliance_files.empty()) {
    std::vector<WattsStream> streams;
    for (const auto& p : appliance_files) streams.push_back(load_watts_csv(p));
    if (ds.planted_model) {
      // The model fixes the appliance order; match streams to it by name.
      std::vector<WattsStream> ordered;
      for (const auto& a : ds.planted_model->appliances) {
        auto it = std::find_if(streams.begin(), streams.end(),
                               [&](const WattsStream& s) { return s.name == a.name; });
        if (it == streams.end()) {
          throw std::runtime_error(dir + ": model.json lists appliance \"" + a.name +
                                   "\" but appliance_" + a.name + ".csv is missing");
        }
        ordered.push_back(std::move(*it));
        streams.erase(it);
      }
      if (!streams.empty()) {
        throw std::runtime_error(dir + ": appliance_" + streams[0].name +
                                 ".csv has no matching appliance in model.json");
      }
      streams = std::move(ordered);
    }
    ds.appliances.emplace();
    for (auto& s : streams) {
      if (s.timestamps != ds.agg.timestamps) {
        throw std::runtime_error(dir + ": appliance \"" + s.name + "\" is not on the aggregate timestamp grid");
      }
      ds.appliances->names.push_back(std::move(s.name));
      ds.appliances->power.push_back(std::move(s.watts));
    }
    ds.appliances->timestamps = ds.agg.timestamps;
  }

  if (fs::exists(base / "truth.csv")) {
    if (!ds.planted_model) {
      throw std::runtime_error(dir + ": truth.csv requires model.json to interpret the states");
    }
    const NamedSeriesTable table = load_named_csv((base / "truth.csv").string());
    if (table.timestamps != ds.agg.timestamps) {
      throw std::runtime_error(dir + ": truth.csv is not on the aggregate timestamp grid");
    }
    const auto& model = *ds.planted_model;
    if (static_cast<int>(table.names.size()) != model.num_appliances()) {
      throw std::runtime_error(dir + ": truth.csv has " + std::to_string(table.names.size()) +
                               " state columns for " + std::to_string(model.num_appliances()) + " appliances");
    }
    StateAssignment states = StateAssignment::zeros(model.num_appliances(), ds.agg.num_samples());
    for (int i = 0; i < model.num_appliances(); ++i) {
      if (table.names[i] != model.appliances[i].name) {
        throw std::runtime_error(dir + ": truth.csv column \"" + table.names[i] +
                                 "\" does not match model appliance \"" + model.appliances[i].name + "\"");
      }
      for (int t = 0; t < ds.agg.num_samples(); ++t) {
        const double v = table.columns[i][t];
        if (v != std::floor(v) || v < 1 || v > model.appliances[i].num_states()) {
          throw std::runtime_error(dir + ": truth.csv holds an invalid state for \"" + table.names[i] +
                                   "\" at row " + std::to_string(t + 2));
        }
        states.at(i, t) = static_cast<int>(v) - 1;
      }
    }
    ds.planted_states = std::move(states);
  }

  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Preparation
// ---------------------------------------------------------------------------

Dataset downsample_1min(const Dataset& ds) {
  ds.validate();
  if (ds.agg.timestamps.empty()) {
    throw std::invalid_argument("downsample_1min: dataset has no timestamps");
  }
  const int horizon = ds.agg.num_samples();
  const int lines = ds.agg.num_lines;
  const int n_appl = ds.appliances ? ds.appliances->num_appliances() : 0;

  auto bucket_of = [](std::int64_t ts) {
    return ts >= 0 ? ts / 60 : -((-ts + 59) / 60);  // floor division
  };

  Dataset out;
  out.agg.num_lines = lines;
  out.planted_model = ds.planted_model;
  if (ds.appliances) {
    out.appliances.emplace();
    out.appliances->names = ds.appliances->names;
    out.appliances->power.assign(static_cast<std::size_t>(n_appl), {});
  }

  bool singleton_buckets = true;
  int t = 0;
  while (t < horizon) {
    const std::int64_t bucket = bucket_of(ds.agg.timestamps[t]);
    int end = t + 1;
    while (end < horizon && bucket_of(ds.agg.timestamps[end]) == bucket) ++end;
    const int count = end - t;
    if (count > 1) singleton_buckets = false;

    out.agg.timestamps.push_back(bucket * 60);
    for (int r = 0; r < lines; ++r) {
      double sum = 0.0;
      for (int k = t; k < end; ++k) sum += ds.agg.at(k, r);
      out.agg.values.push_back(sum / count);
    }
    if (ds.appliances) {
      for (int i = 0; i < n_appl; ++i) {
        double sum = 0.0;
        for (int k = t; k < end; ++k) sum += ds.appliances->power[i][k];
        out.appliances->power[i].push_back(sum / count);
      }
    }
    t = end;
  }
  if (out.appliances) out.appliances->timestamps = out.agg.timestamps;

  // Averaged buckets have no single true state; keep the planted assignment
  // only when nothing was merged.
  if (ds.planted_states && singleton_buckets) {
    out.planted_states = ds.planted_states;
  }
  out.validate();
  return out;
}

namespace {

Dataset slice_dataset(const Dataset& ds, int from, int count) {
  Dataset out;
  out.agg.num_lines = ds.agg.num_lines;
  out.agg.values.assign(ds.agg.values.begin() + static_cast<std::ptrdiff_t>(from) * ds.agg.num_lines,
                        ds.agg.values.begin() + static_cast<std::ptrdiff_t>(from + count) * ds.agg.num_lines);
  if (!ds.agg.timestamps.empty()) {
    out.agg.timestamps.assign(ds.agg.timestamps.begin() + from, ds.agg.timestamps.begin() + from + count);
  }
  if (ds.appliances) {
    out.appliances.emplace();
    out.appliances->names = ds.appliances->names;
    for (const auto& row : ds.appliances->power) {
      out.appliances->power.emplace_back(row.begin() + from, row.begin() + from + count);
    }
    if (!ds.appliances->timestamps.empty()) {
      out.appliances->timestamps = out.agg.timestamps;
    }
  }
  out.planted_model = ds.planted_model;
  if (ds.planted_states) {
    StateAssignment states = StateAssignment::zeros(ds.planted_states->num_appliances, count);
    for (int i = 0; i < states.num_appliances; ++i) {
      for (int t = 0; t < count; ++t) states.at(i, t) = ds.planted_states->at(i, from + t);
    }
    out.planted_states = std::move(states);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_halves(const Dataset& ds) {
  ds.validate();
  const int horizon = ds.agg.num_samples();
  if (horizon < 2) {
    throw std::invalid_argument("split_halves: need at least 2 samples, got " + std::to_string(horizon));
  }
  const int head = (horizon + 1) / 2;
  return {slice_dataset(ds, 0, head), slice_dataset(ds, head, horizon - head)};
}

}  // namespace nilm
