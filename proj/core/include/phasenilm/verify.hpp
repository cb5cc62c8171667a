#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasenilm/instance.hpp"
#include "phasenilm/rng.hpp"

namespace nilm {

// Seeded generators for randomized property checks; shared by the
// verification battery and the test suite.
struct RandomInstanceSpec {
  int num_lines = 2;
  int min_appliances = 1;
  int max_appliances = 2;
  int min_states = 2;
  int max_states = 3;
  int horizon = 3;
  double max_watts = 400.0;
};

HouseholdModel random_model(Rng& rng, const RandomInstanceSpec& spec);
AggregateSeries random_aggregate(Rng& rng, int num_lines, int horizon, double max_watts);
ProblemInstance random_instance(Rng& rng, const RandomInstanceSpec& spec);
StateAssignment random_assignment(Rng& rng, const HouseholdModel& model, int horizon);

enum class VerifySize {
  tiny,   // everything at exhaustively-checkable dimensions; fast
  small,  // solver/gradient checks at moderate dimensions
};

struct VerifyOptions {
  VerifySize size = VerifySize::small;
  int seeds = 20;                  // instances per property
  std::uint64_t base_seed = 1000;  // all instance seeds derive from this
  // Test hook: flips the sign of the smoothness diagonal after instance
  // construction, which plants positive off-diagonal quadratic coefficients;
  // the submodularity check must then fail with a witness.
  bool corrupt_lambda = false;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  int cases = 0;       // property evaluations performed
  std::string detail;  // first failure (with its instance seed), else empty
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

// Runs the full invariant battery: submodularity of g and h, dominance and
// tightness of both modular bounds (exhaustive over subsets), chain-prefix
// agreement, closed-form vs definitional gradients, solver descent, and
// solver-vs-oracle domination with cross-oracle agreement. Deterministic for
// fixed options; seeds are processed in order.
VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace nilm
