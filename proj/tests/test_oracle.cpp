#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <stdexcept>
#include <vector>

#include "phasenilm/dataio.hpp"
#include "phasenilm/oracle.hpp"
#include "phasenilm/setfn.hpp"
#include "phasenilm/verify.hpp"

using namespace nilm;

TEST_CASE("enumeration solves the lamp instance") {
  HouseholdModel m;
  m.num_lines = 1;
  m.appliances.push_back({"lamp", {0.0, 100.0}, {1.0}, 1.0});
  AggregateSeries agg;
  agg.num_lines = 1;
  agg.values = {100.0, 100.0};
  const ProblemInstance inst = build_instance(m, agg);

  const OracleResult res = enumerate_optimum(inst);
  CHECK(res.states.at(0, 0) == 1);
  CHECK(res.states.at(0, 1) == 1);
  CHECK(res.cost == doctest::Approx(-20001.0));

  const OracleResult dp = viterbi_optimum(inst);
  CHECK(dp.states == res.states);
  CHECK(dp.cost == res.cost);
}

TEST_CASE("cross-oracle agreement on random instances") {
  Rng rng(101);
  RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.max_appliances = 2;
  spec.max_states = 3;
  spec.horizon = 4;
  for (int rep = 0; rep < 25; ++rep) {
    const ProblemInstance inst = random_instance(rng, spec);
    const OracleResult a = enumerate_optimum(inst);
    const OracleResult b = viterbi_optimum(inst);
    // Both re-evaluate through eval_set_cost, so equality is exact.
    CHECK(a.cost == b.cost);
    CHECK(a.cost == eval_set_cost(inst, a.states).f);
    CHECK(b.cost == eval_set_cost(inst, b.states).f);
  }
}

TEST_CASE("random feasible assignments never beat the oracle") {
  Rng rng(103);
  RandomInstanceSpec spec;
  spec.max_appliances = 2;
  spec.max_states = 3;
  spec.horizon = 3;
  for (int rep = 0; rep < 10; ++rep) {
    const ProblemInstance inst = random_instance(rng, spec);
    const OracleResult opt = viterbi_optimum(inst);
    for (int draw = 0; draw < 200; ++draw) {
      const StateAssignment s = random_assignment(rng, inst.model, inst.horizon());
      CHECK(eval_set_cost(inst, s).f >= opt.cost);
    }
  }
}

TEST_CASE("with no smoothing the chain decouples into per-tick minima") {
  Rng rng(107);
  RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.max_appliances = 2;
  spec.max_states = 3;
  spec.horizon = 4;
  for (int rep = 0; rep < 10; ++rep) {
    ProblemInstance inst = random_instance(rng, spec);
    for (auto& a : inst.model.appliances) a.lambda = 0.0;
    inst = build_instance(inst.model, inst.agg);

    const OracleResult dp = viterbi_optimum(inst);

    // Independent per-tick minimization over joint states.
    double decoupled = 0.0;
    for (int t = 0; t < inst.horizon(); ++t) {
      double best = std::numeric_limits<double>::infinity();
      StateAssignment s = StateAssignment::zeros(inst.model.num_appliances(), 1);
      const int cells = s.num_appliances;
      AggregateSeries one_tick;
      one_tick.num_lines = inst.num_lines();
      for (int r = 0; r < inst.num_lines(); ++r) one_tick.values.push_back(inst.agg.at(t, r));
      const ProblemInstance tick_inst = build_instance(inst.model, one_tick);
      while (true) {
        const double c = eval_set_cost(tick_inst, s).f;
        if (c < best) best = c;
        int pos = cells - 1;
        while (pos >= 0) {
          if (++s.states[pos] < inst.model.appliances[pos].num_states()) break;
          s.states[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
      decoupled += best;
    }
    CHECK(dp.cost == doctest::Approx(decoupled).epsilon(1e-12));
  }
}

TEST_CASE("deterministic tie-breaking") {
  // Two indistinguishable zero-watt states: every assignment fits the data
  // equally, constant assignments win on smoothness, and both oracles must
  // settle on the all-first-state one.
  HouseholdModel m;
  m.num_lines = 1;
  m.appliances.push_back({"ghost", {0.0, 0.0}, {1.0}, 1.0});
  AggregateSeries agg;
  agg.num_lines = 1;
  agg.values = {0.0, 0.0};
  const ProblemInstance inst = build_instance(m, agg);

  const OracleResult a = enumerate_optimum(inst);
  const OracleResult b = viterbi_optimum(inst);
  CHECK(a.cost == doctest::Approx(-1.0));
  CHECK(b.cost == doctest::Approx(-1.0));
  CHECK(a.states.states == std::vector<int>{0, 0});
  CHECK(b.states.states == std::vector<int>{0, 0});
}

TEST_CASE("size guards") {
  HouseholdModel m;
  m.num_lines = 1;
  m.appliances.push_back({"a", {0.0, 10.0}, {1.0}, 1.0});
  AggregateSeries agg;
  agg.num_lines = 1;
  agg.values.assign(21, 5.0);  // 2^21 assignments
  CHECK_THROWS_AS(enumerate_optimum(build_instance(m, agg)), std::invalid_argument);

  // 13 two-state appliances: joint space 8192 > 4096.
  HouseholdModel wide;
  wide.num_lines = 1;
  for (int i = 0; i < 13; ++i) {
    wide.appliances.push_back({"a" + std::to_string(i), {0.0, 10.0}, {1.0}, 1.0});
  }
  AggregateSeries two;
  two.num_lines = 1;
  two.values = {5.0, 5.0};
  CHECK_THROWS_AS(viterbi_optimum(build_instance(wide, two)), std::invalid_argument);
  // ... and enumeration over two ticks of that joint space is also beyond
  // the limit.
  CHECK_THROWS_AS(enumerate_optimum(build_instance(wide, two)), std::invalid_argument);
}

TEST_CASE("DP recovers a planted assignment when signatures are distinct") {
  SyntheticSpec spec;
  spec.num_lines = 2;
  spec.horizon = 60;
  spec.p_stay = 0.9;
  spec.seed = 77;
  spec.appliances.resize(2);
  spec.appliances[0].num_states = 3;
  spec.appliances[0].connection = {SyntheticConnection::Kind::single_line, 0, 0, 1, 0.5};
  spec.appliances[1].num_states = 3;
  spec.appliances[1].connection = {SyntheticConnection::Kind::split_pair, 0, 0, 1, 0.75};
  const Dataset ds = generate(spec);
  REQUIRE(ds.planted_model.has_value());
  REQUIRE(ds.planted_states.has_value());

  const ProblemInstance inst = build_instance(*ds.planted_model, ds.agg);
  const OracleResult dp = viterbi_optimum(inst);
  CHECK(dp.states == *ds.planted_states);
}
