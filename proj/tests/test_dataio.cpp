#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasenilm/dataio.hpp"

using namespace nilm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nilm_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.num_lines = 2;
  spec.horizon = 40;
  spec.p_stay = 0.8;
  spec.seed = 5;
  spec.appliances.resize(2);
  spec.appliances[0].name = "fridge";
  spec.appliances[0].num_states = 3;
  spec.appliances[0].connection = {SyntheticConnection::Kind::single_line, 0, 0, 1, 0.5};
  spec.appliances[1].name = "oven";
  spec.appliances[1].num_states = 2;
  spec.appliances[1].connection = {SyntheticConnection::Kind::split_pair, 0, 0, 1, 0.7};
  return spec;
}

}  // namespace

TEST_CASE("synthetic spec json parsing") {
  const char* text = R"({
    "num_lines": 2, "horizon": 10, "p_stay": 0.9, "seed": 4,
    "appliances": [
      {"name": "a", "num_states": 3, "levels": "auto",
       "connection": {"type": "single_line", "line": 2}},
      {"name": "b", "num_states": 2, "levels": [0, 150],
       "connection": {"type": "split_pair", "lines": [1, 2], "fraction": 0.25}}
    ]})";
  const SyntheticSpec spec = synthetic_spec_from_json_text(text);
  CHECK(spec.num_lines == 2);
  CHECK(spec.horizon == 10);
  CHECK(spec.p_stay == 0.9);
  CHECK(spec.noise_std == 0.0);  // defaulted
  REQUIRE(spec.appliances.size() == 2);
  CHECK(spec.appliances[0].levels.empty());  // "auto"
  CHECK(spec.appliances[0].connection.line == 1);  // 1-based in json
  CHECK(spec.appliances[1].levels == std::vector<double>{0.0, 150.0});
  CHECK(spec.appliances[1].connection.line_a == 0);
  CHECK(spec.appliances[1].connection.line_b == 1);
  CHECK(spec.appliances[1].connection.fraction == 0.25);
}

TEST_CASE("synthetic spec rejections") {
  CHECK_THROWS_AS(synthetic_spec_from_json_text("{oops"), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_spec_from_json_text(R"({"num_lines": 2})"), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_spec_from_json_text(
                      R"({"num_lines": 2, "horizon": 5, "appliances": [], "color": 1})"),
                  std::invalid_argument);

  SyntheticSpec spec = small_spec();
  spec.p_stay = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.p_stay = 1.0;  // boundary included: constant chains are legal
  CHECK_NOTHROW(spec.validate());
  spec.p_stay = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = small_spec();
  spec.noise_std = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = small_spec();
  spec.appliances[1].connection.line_b = 0;  // same as line_a
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = small_spec();
  spec.appliances[1].name = "fridge";  // duplicate
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = small_spec();
  spec.appliances[0].levels = {0.0, 50.0};  // two levels, three states
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("generator satisfies the aggregation identity and is deterministic") {
  const SyntheticSpec spec = small_spec();
  const Dataset ds = generate(spec);
  REQUIRE(ds.appliances.has_value());
  REQUIRE(ds.planted_model.has_value());
  REQUIRE(ds.planted_states.has_value());

  // Noiseless: y = W x exactly.
  for (int t = 0; t < ds.agg.num_samples(); ++t) {
    for (int r = 0; r < ds.agg.num_lines; ++r) {
      double expect = 0.0;
      for (int i = 0; i < ds.appliances->num_appliances(); ++i) {
        expect += ds.planted_model->appliances[i].weights[r] * ds.appliances->power[i][t];
      }
      CHECK(std::fabs(ds.agg.at(t, r) - expect) <= 1e-12 * std::max(1.0, expect));
    }
  }
  // Appliance power is the planted level of the planted state.
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t < ds.agg.num_samples(); ++t) {
      CHECK(ds.appliances->power[i][t] ==
            ds.planted_model->appliances[i].mu[ds.planted_states->at(i, t)]);
    }
  }
  // Auto levels: spacing grows by (widest states + 1) per appliance.
  CHECK(ds.planted_model->appliances[0].mu == std::vector<double>{0.0, 50.0, 100.0});
  CHECK(ds.planted_model->appliances[1].mu == std::vector<double>{0.0, 200.0});

  // Minute-aligned timestamp grid.
  for (int t = 0; t < ds.agg.num_samples(); ++t) {
    CHECK(ds.agg.timestamps[t] == 1700000040 + 60LL * t);
  }

  const Dataset again = generate(spec);
  CHECK(again.agg.values == ds.agg.values);
  CHECK(again.planted_states->states == ds.planted_states->states);

  SyntheticSpec other = spec;
  other.seed = 6;
  CHECK(generate(other).planted_states->states != ds.planted_states->states);
}

TEST_CASE("generator corner cases") {
  SyntheticSpec frozen = small_spec();
  frozen.p_stay = 1.0;
  const Dataset ds = generate(frozen);
  for (int i = 0; i < 2; ++i) {
    for (int t = 1; t < ds.agg.num_samples(); ++t) {
      CHECK(ds.planted_states->at(i, t) == ds.planted_states->at(i, 0));
    }
  }

  SyntheticSpec noisy = small_spec();
  noisy.noise_std = 30.0;
  const Dataset nds = generate(noisy);
  bool saw_difference = false;
  for (std::size_t k = 0; k < nds.agg.values.size(); ++k) {
    CHECK(nds.agg.values[k] >= 0.0);  // clamped at zero
    if (nds.agg.values[k] != ds.agg.values[k]) saw_difference = true;
  }
  CHECK(saw_difference);

  // Unnamed appliances get numbered names.
  SyntheticSpec anon = small_spec();
  anon.appliances[0].name.clear();
  anon.appliances[1].name.clear();
  const Dataset ads = generate(anon);
  CHECK(ads.appliances->names == std::vector<std::string>{"appliance_1", "appliance_2"});
}

TEST_CASE("named csv round trip and parse errors") {
  const fs::path dir = fresh_dir("csv");

  NamedSeriesTable table;
  table.names = {"a", "b"};
  table.timestamps = {100, 160, 220};
  table.columns = {{0.1, 1.0 / 3.0, 123456.789}, {0.0, 2e-7, 5.5}};
  const std::string path = (dir / "t.csv").string();
  save_named_csv(table, path);

  const NamedSeriesTable back = load_named_csv(path);
  CHECK(back.names == table.names);
  CHECK(back.timestamps == table.timestamps);
  CHECK(back.columns == table.columns);  // %.17g round-trips doubles bit-exactly

  SUBCASE("bad header") {
    write_file(dir / "h.csv", "time,a\n1,2\n");
    CHECK_THROWS_WITH_AS(load_named_csv((dir / "h.csv").string()),
                         doctest::Contains("header must start with \"timestamp\""),
                         std::runtime_error);
  }
  SUBCASE("no value columns") {
    write_file(dir / "h2.csv", "timestamp\n1\n");
    CHECK_THROWS_AS(load_named_csv((dir / "h2.csv").string()), std::runtime_error);
  }
  SUBCASE("non-numeric cell names its line") {
    write_file(dir / "bad.csv", "timestamp,watts\n100,1.5\n160,oops\n");
    CHECK_THROWS_WITH_AS(load_named_csv((dir / "bad.csv").string()),
                         doctest::Contains("line 3"), std::runtime_error);
  }
  SUBCASE("field count mismatch") {
    write_file(dir / "f.csv", "timestamp,watts\n100,1.5,9\n");
    CHECK_THROWS_WITH_AS(load_named_csv((dir / "f.csv").string()),
                         doctest::Contains("line 2"), std::runtime_error);
  }
  SUBCASE("timestamps must increase") {
    write_file(dir / "ts.csv", "timestamp,watts\n100,1\n100,2\n");
    CHECK_THROWS_AS(load_named_csv((dir / "ts.csv").string()), std::runtime_error);
  }
  SUBCASE("missing and empty files") {
    CHECK_THROWS_AS(load_named_csv((dir / "nope.csv").string()), std::runtime_error);
    write_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_named_csv((dir / "empty.csv").string()), std::runtime_error);
    write_file(dir / "no_rows.csv", "timestamp,watts\n");
    CHECK_THROWS_AS(load_named_csv((dir / "no_rows.csv").string()), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("aggregate csv enforces line_<r> columns") {
  const fs::path dir = fresh_dir("agg");
  write_file(dir / "ok.csv", "timestamp,line_1,line_2\n100,10,20\n160,30,40\n");
  const AggregateSeries agg = load_aggregate_csv((dir / "ok.csv").string());
  CHECK(agg.num_lines == 2);
  CHECK(agg.at(1, 1) == 40.0);

  write_file(dir / "bad.csv", "timestamp,line_1,phase_b\n100,10,20\n");
  CHECK_THROWS_WITH_AS(load_aggregate_csv((dir / "bad.csv").string()),
                       doctest::Contains("line_2"), std::runtime_error);

  write_file(dir / "neg.csv", "timestamp,line_1\n100,-5\n");
  CHECK_THROWS_AS(load_aggregate_csv((dir / "neg.csv").string()), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("load_csv inner-joins on timestamps") {
  const fs::path dir = fresh_dir("join");
  write_file(dir / "aggregate.csv",
             "timestamp,line_1\n100,10\n160,20\n220,30\n280,40\n340,50\n");
  write_file(dir / "appliance_tv.csv", "timestamp,watts\n100,1\n220,3\n340,5\n400,9\n");

  const Dataset ds =
      load_csv((dir / "aggregate.csv").string(), {(dir / "appliance_tv.csv").string()});
  CHECK(ds.agg.timestamps == std::vector<std::int64_t>{100, 220, 340});
  CHECK(ds.agg.values == std::vector<double>{10.0, 30.0, 50.0});
  REQUIRE(ds.appliances.has_value());
  CHECK(ds.appliances->names == std::vector<std::string>{"tv"});
  CHECK(ds.appliances->power[0] == std::vector<double>{1.0, 3.0, 5.0});

  write_file(dir / "appliance_never.csv", "timestamp,watts\n999,1\n");
  CHECK_THROWS_WITH_AS(load_csv((dir / "aggregate.csv").string(),
                                {(dir / "appliance_never.csv").string()}),
                       doctest::Contains("nothing to join"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("dataset bundle round trip") {
  const fs::path dir = fresh_dir("bundle");
  const Dataset ds = generate(small_spec());
  save_dataset(ds, dir.string());

  CHECK(fs::exists(dir / "aggregate.csv"));
  CHECK(fs::exists(dir / "appliance_fridge.csv"));
  CHECK(fs::exists(dir / "appliance_oven.csv"));
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "truth.csv"));

  const Dataset back = load_dataset(dir.string());
  CHECK(back.agg.values == ds.agg.values);
  CHECK(back.agg.timestamps == ds.agg.timestamps);
  REQUIRE(back.appliances.has_value());
  CHECK(back.appliances->names == ds.appliances->names);
  CHECK(back.appliances->power == ds.appliances->power);
  REQUIRE(back.planted_states.has_value());
  CHECK(back.planted_states->states == ds.planted_states->states);
  CHECK(model_to_json_text(*back.planted_model) == model_to_json_text(*ds.planted_model));

  // Save the re-loaded bundle: bytes must not drift.
  const fs::path dir2 = fresh_dir("bundle2");
  save_dataset(back, dir2.string());
  for (const char* f : {"aggregate.csv", "appliance_fridge.csv", "appliance_oven.csv",
                        "model.json", "truth.csv"}) {
    CHECK(read_file(dir / f) == read_file(dir2 / f));
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("load_dataset cross-checks the bundle") {
  const fs::path dir = fresh_dir("crosscheck");
  save_dataset(generate(small_spec()), dir.string());

  SUBCASE("aggregate is mandatory") {
    fs::remove(dir / "aggregate.csv");
    CHECK_THROWS_WITH_AS(load_dataset(dir.string()), doctest::Contains("aggregate.csv"),
                         std::runtime_error);
  }
  SUBCASE("model names must match the appliance files") {
    fs::rename(dir / "appliance_oven.csv", dir / "appliance_toaster.csv");
    CHECK_THROWS_AS(load_dataset(dir.string()), std::runtime_error);
  }
  SUBCASE("truth without model is rejected") {
    fs::remove(dir / "model.json");
    CHECK_THROWS_WITH_AS(load_dataset(dir.string()), doctest::Contains("truth.csv"),
                         std::runtime_error);
  }
  SUBCASE("appliance files must share the aggregate grid") {
    write_file(dir / "appliance_oven.csv", "timestamp,watts\n100,1\n");
    CHECK_THROWS_AS(load_dataset(dir.string()), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("downsampling to one minute") {
  Dataset ds;
  ds.agg.num_lines = 1;
  for (int k = 0; k < 60; ++k) {
    ds.agg.timestamps.push_back(k);  // all within minute bucket 0
    ds.agg.values.push_back(100.0);
  }
  const Dataset one = downsample_1min(ds);
  CHECK(one.agg.num_samples() == 1);
  CHECK(one.agg.timestamps[0] == 0);
  CHECK(one.agg.values[0] == 100.0);

  Dataset pair;
  pair.agg.num_lines = 1;
  pair.agg.timestamps = {120, 150, 185};
  pair.agg.values = {90.0, 110.0, 7.0};
  const Dataset mean = downsample_1min(pair);
  CHECK(mean.agg.timestamps == std::vector<std::int64_t>{120, 180});
  CHECK(mean.agg.values == std::vector<double>{100.0, 7.0});
}

TEST_CASE("join drops a minute missing from one stream") {
  const fs::path dir = fresh_dir("dropminute");
  // Aggregate covers two minutes; the appliance only reported in the first.
  write_file(dir / "aggregate.csv", "timestamp,line_1\n0,10\n30,20\n60,30\n90,40\n");
  write_file(dir / "appliance_tv.csv", "timestamp,watts\n0,1\n30,2\n");
  const Dataset joined =
      load_csv((dir / "aggregate.csv").string(), {(dir / "appliance_tv.csv").string()});
  const Dataset down = downsample_1min(joined);
  CHECK(down.agg.num_samples() == 1);
  CHECK(down.agg.timestamps[0] == 0);
  CHECK(down.agg.values[0] == 15.0);
  CHECK(down.appliances->power[0] == std::vector<double>{1.5});
  fs::remove_all(dir);
}

TEST_CASE("planted states survive only singleton buckets") {
  const Dataset ds = generate(small_spec());  // 60 s cadence: all singletons
  const Dataset down = downsample_1min(ds);
  CHECK(down.planted_states.has_value());
  CHECK(down.agg.num_samples() == ds.agg.num_samples());

  Dataset squeezed = ds;
  for (std::size_t t = 0; t < squeezed.agg.timestamps.size(); ++t) {
    squeezed.agg.timestamps[t] = 1700000040 + 30LL * t;  // two samples per minute
  }
  squeezed.appliances->timestamps = squeezed.agg.timestamps;
  const Dataset merged = downsample_1min(squeezed);
  CHECK(merged.agg.num_samples() == ds.agg.num_samples() / 2);
  CHECK_FALSE(merged.planted_states.has_value());
  CHECK(merged.planted_model.has_value());
}

TEST_CASE("train/test split") {
  Dataset ds;
  ds.agg.num_lines = 1;
  for (int t = 0; t < 11; ++t) {
    ds.agg.timestamps.push_back(60 * t);
    ds.agg.values.push_back(t);
  }
  const auto [train, test] = split_halves(ds);
  CHECK(train.agg.num_samples() == 6);
  CHECK(test.agg.num_samples() == 5);
  CHECK(train.agg.values.back() == 5.0);
  CHECK(test.agg.values.front() == 6.0);

  ds.agg.values.pop_back();
  ds.agg.timestamps.pop_back();
  const auto [even_train, even_test] = split_halves(ds);
  CHECK(even_train.agg.num_samples() == 5);
  CHECK(even_test.agg.num_samples() == 5);

  Dataset tiny;
  tiny.agg.num_lines = 1;
  tiny.agg.values = {1.0};
  tiny.agg.timestamps = {0};
  CHECK_THROWS_AS(split_halves(tiny), std::invalid_argument);
}

TEST_CASE("downsample and split commute on bucket-aligned data") {
  // Eight samples, 30 s cadence, so each minute holds exactly two and the
  // half split lands on a bucket boundary.
  Dataset ds;
  ds.agg.num_lines = 1;
  for (int t = 0; t < 8; ++t) {
    ds.agg.timestamps.push_back(30 * t);
    ds.agg.values.push_back(10.0 * t);
  }
  const Dataset down_first_all = downsample_1min(ds);
  const auto [down_train, down_test] = split_halves(down_first_all);

  const auto [raw_train, raw_test] = split_halves(ds);
  const Dataset train_down = downsample_1min(raw_train);
  const Dataset test_down = downsample_1min(raw_test);

  CHECK(down_train.agg.values == train_down.agg.values);
  CHECK(down_train.agg.timestamps == train_down.agg.timestamps);
  CHECK(down_test.agg.values == test_down.agg.values);
  CHECK(down_test.agg.timestamps == test_down.agg.timestamps);
}
