#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "phasenilm/setfn.hpp"
#include "phasenilm/verify.hpp"
#include "support/dense_reference.hpp"

using namespace nilm;

namespace {

// Single on/off appliance on one line: every quantity is hand-computable.
ProblemInstance toy_instance() {
  HouseholdModel m;
  m.num_lines = 1;
  m.appliances.push_back({"lamp", {0.0, 100.0}, {1.0}, 1.0});
  AggregateSeries agg;
  agg.num_lines = 1;
  agg.values = {100.0, 100.0};
  return build_instance(m, agg);
}

}  // namespace

TEST_CASE("set cost on a hand-checked instance") {
  const ProblemInstance inst = toy_instance();

  StateAssignment on = StateAssignment::zeros(1, 2);
  on.at(0, 0) = 1;
  on.at(0, 1) = 1;
  const SetCostParts parts = eval_set_cost(inst, on);
  // h = sum_t [-(100)^2 + 2*100*100] = 2 * 10000; g = -1 for the one
  // adjacent equal-state pair.
  CHECK(parts.h == doctest::Approx(20000.0));
  CHECK(parts.g == doctest::Approx(-1.0));
  CHECK(parts.f == parts.g - parts.h);

  // The fit is perfect, so the residual convention is just the smoothing
  // reward.
  CHECK(eval_residual_cost(inst, on) == doctest::Approx(-1.0));

  StateAssignment off = StateAssignment::zeros(1, 2);
  const SetCostParts parts_off = eval_set_cost(inst, off);
  CHECK(parts_off.h == doctest::Approx(0.0));
  CHECK(parts_off.g == doctest::Approx(-1.0));
  CHECK(eval_residual_cost(inst, off) == doctest::Approx(2.0 * 10000.0 - 1.0));

  // Residual and set conventions differ by the constant sum of squares.
  CHECK(eval_residual_cost(inst, on) - parts.f == doctest::Approx(inst.sum_sq_y));
  CHECK(eval_residual_cost(inst, off) - parts_off.f == doctest::Approx(inst.sum_sq_y));
}

TEST_CASE("subset evaluators match the assignment evaluator on feasible sets") {
  Rng rng(42);
  RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.max_appliances = 3;
  spec.max_states = 4;
  spec.horizon = 5;
  for (int rep = 0; rep < 25; ++rep) {
    const ProblemInstance inst = random_instance(rng, spec);
    const StateAssignment s = random_assignment(rng, inst.model, inst.horizon());
    const auto flat = assignment_to_flat(inst, s);

    REQUIRE(static_cast<int>(flat.size()) == s.num_appliances * s.horizon);
    for (std::size_t k = 1; k < flat.size(); ++k) CHECK(flat[k - 1] < flat[k]);

    const SetCostParts parts = eval_set_cost(inst, s);
    CHECK(eval_g_subset(inst, flat) == doctest::Approx(parts.g).epsilon(1e-12));
    CHECK(eval_h_subset(inst, flat) == doctest::Approx(parts.h).epsilon(1e-12));
    CHECK(eval_f_subset(inst, flat) == doctest::Approx(parts.f).epsilon(1e-12));
  }
}

TEST_CASE("subset evaluators match the dense reference on arbitrary subsets") {
  Rng rng(7);
  RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.max_appliances = 2;
  spec.max_states = 3;
  spec.horizon = 3;
  for (int rep = 0; rep < 15; ++rep) {
    const ProblemInstance inst = random_instance(rng, spec);
    const nilm_test::DenseReference ref = nilm_test::make_dense_reference(inst);

    CHECK(eval_g_subset(inst, {}) == 0.0);
    CHECK(eval_h_subset(inst, {}) == 0.0);

    // Random subsets, including infeasible ones with several states of the
    // same appliance active at once.
    for (int sub = 0; sub < 40; ++sub) {
      std::vector<int> flat;
      for (int j = 0; j < inst.ground_size(); ++j) {
        if (rng.uniform01() < 0.4) flat.push_back(j);
      }
      CHECK(eval_g_subset(inst, flat) == doctest::Approx(ref.g(flat)).epsilon(1e-10));
      CHECK(eval_h_subset(inst, flat) == doctest::Approx(ref.h(flat)).epsilon(1e-10));
      CHECK(eval_f_subset(inst, flat) == doctest::Approx(ref.f(flat)).epsilon(1e-10));
    }
  }
}

TEST_CASE("subset evaluators reject out-of-range indices") {
  const ProblemInstance inst = toy_instance();
  const std::vector<int> bad = {0, inst.ground_size()};
  CHECK_THROWS_AS(eval_g_subset(inst, bad), std::invalid_argument);
  CHECK_THROWS_AS(eval_h_subset(inst, bad), std::invalid_argument);
  const std::vector<int> neg = {-1};
  CHECK_THROWS_AS(eval_f_subset(inst, neg), std::invalid_argument);
}

TEST_CASE("brute-force submodularity check on quadratics") {
  // Nonpositive off-diagonals make a quadratic set function submodular.
  const int n = 4;
  std::vector<double> a(n * n, 0.0);
  std::vector<double> b = {1.0, -2.0, 0.5, 3.0};
  a[0 * n + 1] = a[1 * n + 0] = -1.5;
  a[2 * n + 3] = a[3 * n + 2] = -0.25;
  a[0 * n + 0] = 2.0;  // diagonal sign is irrelevant
  a[1 * n + 1] = -1.0;
  CHECK(is_submodular_bruteforce(n, quadratic_mask_function(n, a, b)).submodular);

  // One positive off-diagonal breaks it, and the witness really violates
  // diminishing returns.
  a[1 * n + 2] = a[2 * n + 1] = 0.75;
  const auto check = is_submodular_bruteforce(n, quadratic_mask_function(n, a, b));
  CHECK_FALSE(check.submodular);
  REQUIRE(check.witness.has_value());
  const auto& w = *check.witness;
  CHECK((w.x_mask & ~w.y_mask) == 0);            // X subset of Y
  CHECK((w.y_mask & (1u << w.element)) == 0);    // v outside Y
  CHECK(w.gain_at_x < w.gain_at_y);
}

TEST_CASE("instance g and h are submodular on enumerable ground sets") {
  Rng rng(99);
  RandomInstanceSpec spec;
  spec.num_lines = 2;
  spec.max_appliances = 2;
  spec.min_states = 2;
  spec.max_states = 3;
  spec.horizon = 2;  // ground set size at most 12
  for (int rep = 0; rep < 10; ++rep) {
    const ProblemInstance inst = random_instance(rng, spec);
    REQUIRE(inst.ground_size() <= 14);
    CHECK(is_submodular_bruteforce(inst.ground_size(), g_mask_function(inst)).submodular);
    CHECK(is_submodular_bruteforce(inst.ground_size(), h_mask_function(inst)).submodular);
  }
}

TEST_CASE("brute-force check guards its limits") {
  CHECK_THROWS_AS(is_submodular_bruteforce(15, [](std::uint32_t) { return 0.0; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(quadratic_mask_function(3, std::vector<double>(4, 0.0), std::vector<double>(3, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("build_instance precomputations") {
  const ProblemInstance inst = toy_instance();
  CHECK(inst.total_states() == 2);
  CHECK(inst.ground_size() == 4);
  CHECK(inst.beta_at(0, 0) == 0.0);
  CHECK(inst.beta_at(0, 1) == 100.0);
  CHECK(inst.cbar_at(1, 0) == doctest::Approx(2.0 * 100.0 * 100.0));
  CHECK(inst.sum_sq_y == doctest::Approx(2.0 * 10000.0));
  CHECK(inst.lambda_diag == std::vector<double>{1.0, 1.0});

  // Line-count mismatch between model and series is caught at build time.
  HouseholdModel m;
  m.num_lines = 2;
  m.appliances.push_back({"lamp", {0.0, 100.0}, {1.0, 0.0}, 1.0});
  AggregateSeries agg;
  agg.num_lines = 1;
  agg.values = {10.0};
  CHECK_THROWS_AS(build_instance(m, agg), std::invalid_argument);
}
