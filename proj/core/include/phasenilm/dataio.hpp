#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasenilm/model.hpp"
#include "phasenilm/training.hpp"

namespace nilm {

// A household's measurement bundle: aggregates always, submetered appliance
// power when available, and — for synthetic data — the planted model and
// state sequence that produced it. All present streams share one timestamp
// grid.
struct Dataset {
  AggregateSeries agg;
  std::optional<ApplianceSeries> appliances;
  std::optional<HouseholdModel> planted_model;
  std::optional<StateAssignment> planted_states;

  void validate() const;  // throws std::invalid_argument on misaligned streams
};

// ---------------------------------------------------------------------------
// Synthetic households
// ---------------------------------------------------------------------------

struct SyntheticConnection {
  enum class Kind { single_line, split_pair };
  Kind kind = Kind::single_line;
  int line = 0;  // single_line: the one line drawn from (0-based)
  int line_a = 0;
  int line_b = 1;          // split_pair: the two lines drawn from
  double fraction = 0.5;  // split_pair: share on line_a; line_b gets the rest
};

struct SyntheticAppliance {
  std::string name;            // auto-filled as "appliance_<i>" when empty
  int num_states = 3;
  std::vector<double> levels;  // watts per state, ascending; empty = auto
  SyntheticConnection connection;
};

struct SyntheticSpec {
  int num_lines = 2;
  int horizon = 0;
  double p_stay = 0.95;    // Markov self-transition probability, in (0, 1]
  double noise_std = 0.0;  // per-line Gaussian noise, watts
  double gap = 50.0;       // spacing unit for auto levels
  std::uint64_t seed = 0;
  std::vector<SyntheticAppliance> appliances;

  void validate() const;
};

// JSON form of a SyntheticSpec. "levels" is a number array or the string
// "auto"; "connection" is {"type": "single_line", "line": r} or
// {"type": "split_pair", "lines": [a, b], "fraction": f} with 1-based line
// numbers matching the CSV column names. Unknown fields are rejected.
SyntheticSpec synthetic_spec_from_json_text(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::string& path);

// Simulates the household: each appliance follows its own Markov chain
// (stay with p_stay, otherwise jump uniformly to another state), aggregates
// are the weighted sums of the appliance levels plus optional Gaussian noise
// clamped at 0. Auto levels are j * gap * B^i with B = max_i N_i + 1, which
// keeps every joint state's consumption signature distinct. Deterministic
// per seed: appliance i draws from stream mix(seed, i+1), noise from
// mix(seed, 0). Timestamps start at 1700000040 and step 60 s.
Dataset generate(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// CSV ingestion and persistence
// ---------------------------------------------------------------------------

// A parsed CSV of named value columns keyed by a leading timestamp column.
struct NamedSeriesTable {
  std::vector<std::string> names;            // column headers after "timestamp"
  std::vector<std::int64_t> timestamps;
  std::vector<std::vector<double>> columns;  // one vector per name

  int num_rows() const { return static_cast<int>(timestamps.size()); }
};

// Strict readers/writers: header row mandatory, integer epoch-second
// timestamps strictly increasing, '.' decimal separator, doubles written
// with enough digits to round-trip bit-exactly. Parse errors name the file
// and 1-based line number.
NamedSeriesTable load_named_csv(const std::string& path);
void save_named_csv(const NamedSeriesTable& table, const std::string& path);

// Aggregate CSV: header "timestamp,line_1,...,line_R"; R is inferred from
// the column count. Appliance CSV: header "timestamp,watts".
AggregateSeries load_aggregate_csv(const std::string& path);
void save_aggregate_csv(const AggregateSeries& agg, const std::string& path);

// Inner-joins the aggregate stream with each appliance stream on timestamp:
// only ticks present in every file survive. Appliance names are taken from
// the file names (an "appliance_" prefix and ".csv" suffix are stripped).
// Throws std::runtime_error when the joined grid is empty.
Dataset load_csv(const std::string& aggregate_path, const std::vector<std::string>& appliance_paths);

// Directory bundle: aggregate.csv, appliance_<name>.csv per appliance,
// model.json and truth.csv (1-based planted states) when present.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// ---------------------------------------------------------------------------
// Preparation
// ---------------------------------------------------------------------------

// Buckets every stream by floor(timestamp / 60) and averages within each
// bucket. Streams inside a Dataset share one grid, so buckets are complete
// by construction; ticks missing from some raw file are dropped earlier, by
// load_csv's inner join. Planted states survive only when every bucket held
// a single sample (averaging invalidates a per-tick state otherwise).
Dataset downsample_1min(const Dataset& ds);

// First ceil(T/2) ticks for training, the rest for testing; no shuffling.
// Requires T >= 2.
std::pair<Dataset, Dataset> split_halves(const Dataset& ds);

}  // namespace nilm
