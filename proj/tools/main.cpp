// Command-line front end: generate synthetic households, train models from
// submetered data, disaggregate aggregates, score estimates, and run the
// solver's invariant battery.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or data error.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasenilm/dataio.hpp"
#include "phasenilm/metrics.hpp"
#include "phasenilm/model.hpp"
#include "phasenilm/solver.hpp"
#include "phasenilm/training.hpp"
#include "phasenilm/verify.hpp"

namespace {

std::string format_watts_list(const std::vector<double>& values) {
  std::string out = "[";
  char buf[48];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6g", values[k]);
    if (k > 0) out += ", ";
    out += buf;
  }
  return out + "]";
}

std::vector<int> parse_states_flag(const std::string& flag, int n_appliances) {
  std::vector<int> states;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = flag.find(',', start);
    const std::string piece = flag.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      const int k = std::stoi(piece, &used);
      if (used != piece.size() || k < 2) throw std::invalid_argument(piece);
      states.push_back(k);
    } catch (const std::exception&) {
      throw std::runtime_error("--states expects an integer >= 2 or a comma list of them, got \"" + flag + "\"");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (states.size() == 1) states.assign(static_cast<std::size_t>(n_appliances), states[0]);
  if (static_cast<int>(states.size()) != n_appliances) {
    throw std::runtime_error("--states lists " + std::to_string(states.size()) + " counts for " +
                             std::to_string(n_appliances) + " appliances");
  }
  return states;
}

int run_generate(const std::string& spec_path, const std::string& out_dir) {
  const nilm::SyntheticSpec spec = nilm::load_synthetic_spec(spec_path);
  const nilm::Dataset ds = nilm::generate(spec);
  nilm::save_dataset(ds, out_dir);
  std::cout << "wrote " << ds.agg.num_samples() << " ticks, " << ds.agg.num_lines << " lines, "
            << ds.appliances->num_appliances() << " appliances to " << out_dir << "\n";
  return 0;
}

int run_train(const std::string& data_dir, const std::string& states_flag, double lambda,
              const std::string& out_path) {
  const nilm::Dataset ds = nilm::load_dataset(data_dir);
  if (!ds.appliances) {
    throw std::runtime_error(data_dir + " holds no appliance_<name>.csv files; training needs submetered data");
  }
  const std::vector<int> states = parse_states_flag(states_flag, ds.appliances->num_appliances());
  const std::vector<double> lambdas(static_cast<std::size_t>(ds.appliances->num_appliances()), lambda);

  const nilm::TrainResult trained = nilm::train_model(*ds.appliances, ds.agg, states, lambdas);
  for (int i = 0; i < trained.model.num_appliances(); ++i) {
    const auto& a = trained.model.appliances[i];
    std::cout << a.name << ": mu = " << format_watts_list(a.mu) << "  w = " << format_watts_list(a.weights) << "\n";
    if (trained.quantization_padded[i]) {
      std::cerr << "warning: " << a.name << " has fewer distinct readings than states; levels were padded\n";
    }
    if (trained.connectivity_underdetermined[i]) {
      std::cerr << "warning: " << a.name << " never draws power; its line weights default to uniform\n";
    }
  }
  nilm::save_model(trained.model, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_disaggregate(const std::string& model_path, const std::string& agg_path, std::uint64_t seed,
                     int max_iters, double lambda, bool lambda_set, const std::string& out_path,
                     std::string trace_path) {
  nilm::HouseholdModel model = nilm::load_model(model_path);
  if (lambda_set) {  // flag overrides whatever model.json carries
    for (auto& a : model.appliances) a.lambda = lambda;
  }
  const nilm::AggregateSeries agg = nilm::load_aggregate_csv(agg_path);

  nilm::SolverOptions opts;
  opts.seed = seed;
  opts.max_iters = max_iters;
  const nilm::DisaggregationResult result = nilm::disaggregate(model, agg, opts);

  nilm::NamedSeriesTable table;
  table.timestamps = agg.timestamps;
  for (int i = 0; i < model.num_appliances(); ++i) {
    table.names.push_back(model.appliances[i].name);
    table.columns.emplace_back(result.xhat.begin() + static_cast<std::ptrdiff_t>(i) * agg.num_samples(),
                               result.xhat.begin() + static_cast<std::ptrdiff_t>(i + 1) * agg.num_samples());
  }
  nilm::save_named_csv(table, out_path);

  if (trace_path.empty()) trace_path = out_path + ".trace.json";
  nlohmann::json trace;
  trace["iterations"] = result.trace.iterations;
  trace["stop_reason"] = result.trace.stop_reason == nilm::StopReason::converged ? "converged" : "max_iters";
  trace["set_costs"] = result.trace.set_costs;
  trace["residual_costs"] = result.trace.residual_costs;
  std::ofstream trace_out(trace_path);
  if (!trace_out) throw std::runtime_error("cannot write trace file: " + trace_path);
  trace_out << trace.dump(2) << "\n";

  std::cout << "wrote " << out_path << " (" << result.trace.iterations << " iterations, "
            << (result.trace.stop_reason == nilm::StopReason::converged ? "converged" : "hit max-iters") << ")\n";
  return 0;
}

int run_evaluate(const std::string& truth_dir, const std::string& estimates_path,
                 const std::string& report_path) {
  const nilm::Dataset truth = nilm::load_dataset(truth_dir);
  if (!truth.appliances) {
    throw std::runtime_error(truth_dir + " holds no appliance_<name>.csv files; nothing to score against");
  }
  const nilm::NamedSeriesTable estimates = nilm::load_named_csv(estimates_path);
  if (estimates.timestamps != truth.agg.timestamps) {
    throw std::runtime_error("estimates and truth are on different timestamp grids");
  }

  // Column order in the estimates file is free; match by name.
  nilm::HouseObservation house;
  for (int i = 0; i < truth.appliances->num_appliances(); ++i) {
    const std::string& name = truth.appliances->names[i];
    const auto it = std::find(estimates.names.begin(), estimates.names.end(), name);
    if (it == estimates.names.end()) {
      throw std::runtime_error(estimates_path + " has no column for appliance \"" + name + "\"");
    }
    house.x_true.push_back(truth.appliances->power[i]);
    house.x_hat.push_back(estimates.columns[static_cast<std::size_t>(it - estimates.names.begin())]);
  }
  house.total_aggregate.assign(static_cast<std::size_t>(truth.agg.num_samples()), 0.0);
  for (int t = 0; t < truth.agg.num_samples(); ++t) {
    for (int r = 0; r < truth.agg.num_lines; ++r) house.total_aggregate[t] += truth.agg.at(t, r);
  }

  const nilm::MetricsReport report = nilm::aped(truth.appliances->names, {house});
  std::cout << nilm::report_to_table_text(report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write report file: " + report_path);
    out << nilm::report_to_json_text(report);
    std::cout << "wrote " << report_path << "\n";
  }
  return 0;
}

int run_verify(const std::string& size_flag, int seeds, std::uint64_t base_seed, bool corrupt_lambda) {
  nilm::VerifyOptions opts;
  if (size_flag == "tiny") {
    opts.size = nilm::VerifySize::tiny;
  } else if (size_flag == "small") {
    opts.size = nilm::VerifySize::small;
  } else {
    throw std::runtime_error("--size must be tiny or small, got \"" + size_flag + "\"");
  }
  opts.seeds = seeds;
  opts.base_seed = base_seed;
  opts.corrupt_lambda = corrupt_lambda;

  const nilm::VerifyReport report = nilm::run_verification(opts);
  for (const auto& check : report.checks) {
    if (check.passed) {
      std::printf("[PASS] %-55s (%d cases)\n", check.name.c_str(), check.cases);
    } else {
      std::printf("[FAIL] %-55s %s\n", check.name.c_str(), check.detail.c_str());
    }
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-aware energy disaggregation toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  auto* gen = app.add_subcommand("generate", "simulate a synthetic household with planted truth");
  gen->add_option("--spec", spec_path, "synthetic household spec (json)")->required();
  gen->add_option("--out", out_dir, "output dataset directory")->required();

  std::string data_dir, states_flag = "3", model_out;
  double train_lambda = 1.0;
  auto* train = app.add_subcommand("train", "learn state levels and line weights from submetered data");
  train->add_option("--data", data_dir, "dataset directory with appliance_<name>.csv files")->required();
  train->add_option("--states", states_flag, "states per appliance: one integer or a comma list (default 3)");
  train->add_option("--lambda", train_lambda, "smoothness weight written to the model (default 1)");
  train->add_option("--out", model_out, "output model.json path")->required();

  std::string model_path, agg_path, xhat_out, trace_out;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double dis_lambda = 1.0;
  auto* dis = app.add_subcommand("disaggregate", "estimate per-appliance power from aggregates");
  dis->add_option("--model", model_path, "trained model.json")->required();
  dis->add_option("--agg", agg_path, "aggregate.csv to disaggregate")->required();
  dis->add_option("--seed", seed, "solver seed (default 0)");
  dis->add_option("--max-iters", max_iters, "bound minimizations before giving up (default 100)");
  auto* lambda_opt = dis->add_option("--lambda", dis_lambda, "override every appliance's smoothness weight");
  dis->add_option("--out", xhat_out, "output estimates csv")->required();
  dis->add_option("--trace", trace_out, "trace json path (default <out>.trace.json)");

  std::string truth_dir, estimates_path, report_path;
  auto* eval = app.add_subcommand("evaluate", "score estimates against submetered truth");
  eval->add_option("--truth", truth_dir, "dataset directory with true appliance readings")->required();
  eval->add_option("--estimates", estimates_path, "estimates csv from disaggregate")->required();
  eval->add_option("--report", report_path, "write the report as json here too");

  std::string verify_size = "small";
  int verify_seeds = 20;
  std::uint64_t verify_base_seed = 1000;
  bool corrupt_lambda = false;
  auto* verify = app.add_subcommand("verify", "run the solver's invariant battery");
  verify->add_option("--size", verify_size, "instance sizes: tiny or small (default small)");
  verify->add_option("--seeds", verify_seeds, "instances per property (default 20)");
  verify->add_option("--base-seed", verify_base_seed, "seed the instance stream (default 1000)");
  verify->add_flag("--corrupt-lambda", corrupt_lambda)->group("");  // test hook, hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_generate(spec_path, out_dir);
    if (train->parsed()) return run_train(data_dir, states_flag, train_lambda, model_out);
    if (dis->parsed()) {
      return run_disaggregate(model_path, agg_path, seed, max_iters, dis_lambda, lambda_opt->count() > 0,
                              xhat_out, trace_out);
    }
    if (eval->parsed()) return run_evaluate(truth_dir, estimates_path, report_path);
    if (verify->parsed()) return run_verify(verify_size, verify_seeds, verify_base_seed, corrupt_lambda);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable with require_subcommand(1)
}
