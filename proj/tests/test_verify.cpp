#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "phasenilm/verify.hpp"

using namespace nilm;

namespace {

const CheckResult& find_check(const VerifyReport& report, const std::string& name) {
  auto it = std::find_if(report.checks.begin(), report.checks.end(),
                         [&](const CheckResult& c) { return c.name == name; });
  REQUIRE(it != report.checks.end());
  return *it;
}

}  // namespace

TEST_CASE("random generators produce valid inputs") {
  Rng rng(314);
  RandomInstanceSpec spec;
  for (int rep = 0; rep < 30; ++rep) {
    const HouseholdModel model = random_model(rng, spec);
    CHECK_NOTHROW(model.validate());
    CHECK(model.num_appliances() >= spec.min_appliances);
    CHECK(model.num_appliances() <= spec.max_appliances);
    for (const auto& a : model.appliances) {
      CHECK(a.num_states() >= spec.min_states);
      CHECK(a.num_states() <= spec.max_states);
    }

    const AggregateSeries agg = random_aggregate(rng, spec.num_lines, spec.horizon, spec.max_watts);
    CHECK_NOTHROW(agg.validate());
    CHECK(agg.num_lines == spec.num_lines);
    CHECK(agg.num_samples() == spec.horizon);
    for (double v : agg.values) {
      CHECK(v >= 0.0);
      CHECK(v <= spec.max_watts);
    }

    const StateAssignment s = random_assignment(rng, model, 7);
    CHECK_NOTHROW(validate_assignment(model, s, 7));
    CHECK(s.horizon == 7);
  }
}

TEST_CASE("battery passes at tiny size") {
  VerifyOptions opts;
  opts.size = VerifySize::tiny;
  opts.seeds = 5;
  opts.base_seed = 42;
  const VerifyReport report = run_verification(opts);

  CHECK(report.checks.size() == 8);
  CHECK(report.all_passed());
  for (const auto& c : report.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
    CHECK(c.cases == opts.seeds);
    CHECK(c.detail.empty());
  }
}

TEST_CASE("battery passes at small size") {
  VerifyOptions opts;
  opts.size = VerifySize::small;
  opts.seeds = 2;
  opts.base_seed = 9;
  const VerifyReport report = run_verification(opts);
  CHECK(report.all_passed());
}

TEST_CASE("corrupted smoothness coefficients are caught") {
  VerifyOptions opts;
  opts.size = VerifySize::tiny;
  opts.seeds = 3;
  opts.base_seed = 42;
  opts.corrupt_lambda = true;
  const VerifyReport report = run_verification(opts);

  CHECK_FALSE(report.all_passed());
  const CheckResult& g_check = find_check(report, "submodularity of g");
  CHECK_FALSE(g_check.passed);
  // The witness names the violating element and both contexts.
  CHECK_FALSE(g_check.detail.empty());
  CHECK(g_check.detail.find("seed") != std::string::npos);
  CHECK(g_check.detail.find("element") != std::string::npos);
  // The data part does not depend on the smoothness coefficients.
  CHECK(find_check(report, "submodularity of h").passed);
}

TEST_CASE("reports are deterministic for fixed options") {
  VerifyOptions opts;
  opts.size = VerifySize::tiny;
  opts.seeds = 4;
  opts.base_seed = 1234;
  const VerifyReport a = run_verification(opts);
  const VerifyReport b = run_verification(opts);

  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].name == b.checks[i].name);
    CHECK(a.checks[i].passed == b.checks[i].passed);
    CHECK(a.checks[i].cases == b.checks[i].cases);
    CHECK(a.checks[i].detail == b.checks[i].detail);
  }
}
