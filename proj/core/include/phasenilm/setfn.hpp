#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "phasenilm/instance.hpp"

namespace nilm {

// Cost of a feasible assignment in the subset-selection convention, split
// into its two submodular parts. f = smoothing_part - data_part holds as an
// arithmetic identity of the returned doubles (f is computed as that
// difference).
//
//   data_part  (h) = sum_{r,t} [ -(beta_r . z_t)^2 + 2 y_rt (beta_r . z_t) ]
//   smoothing_part (g) = -sum_{t<T} sum_i lambda_i [s(i,t) == s(i,t+1)]
struct SetCostParts {
  double f = 0.0;
  double g = 0.0;  // smoothing part
  double h = 0.0;  // data part
};

SetCostParts eval_set_cost(const ProblemInstance& inst, const StateAssignment& s);

// Least-squares convention: sum_{r,t}(y_rt - yhat_rt)^2 minus the smoothness
// reward. Differs from the set cost by the constant sum of squared aggregates;
// this is the number reported to users (it is watts^2 and zero at a perfect
// smooth-free fit).
double eval_residual_cost(const ProblemInstance& inst, const StateAssignment& s);

// Evaluation of g, h, f at an arbitrary subset of the ground set, given as
// flat indices (any number of elements per (appliance, time), i.e. not
// necessarily feasible). This is what the submodularity and bound-dominance
// checks enumerate over.
double eval_g_subset(const ProblemInstance& inst, std::span<const int> flat);
double eval_h_subset(const ProblemInstance& inst, std::span<const int> flat);
double eval_f_subset(const ProblemInstance& inst, std::span<const int> flat);

// Flat indices selected by a feasible assignment, ascending (time-major).
std::vector<int> assignment_to_flat(const ProblemInstance& inst, const StateAssignment& s);

// ---------------------------------------------------------------------------
// Brute-force submodularity test over ground sets of up to 14 elements.
// ---------------------------------------------------------------------------

// A set function over n elements presented by bitmask; bit k = element k.
using MaskFunction = std::function<double(std::uint32_t)>;

struct SubmodularityWitness {
  std::uint32_t x_mask = 0;  // X subset of Y
  std::uint32_t y_mask = 0;
  int element = 0;           // v, outside Y
  double gain_at_x = 0.0;
  double gain_at_y = 0.0;
};

struct SubmodularityCheck {
  bool submodular = true;
  std::optional<SubmodularityWitness> witness;
};

// Checks the diminishing-returns inequality for every X subset of Y subset of
// V \ {v}. The comparison allows slack `tol * max(1, max |f|)` so that
// marginals that agree up to floating-point rounding do not register as
// violations. Throws for n > 14.
SubmodularityCheck is_submodular_bruteforce(int n, const MaskFunction& fn, double tol = 1e-9);

// Mask-indexed views of an instance's g and h, for ground sets small enough
// to enumerate (layout.size() <= 14 when used with the brute-force check).
MaskFunction g_mask_function(const ProblemInstance& inst);
MaskFunction h_mask_function(const ProblemInstance& inst);

// Generic quadratic set function 1_S' A 1_S + b' 1_S over n elements.
// Submodular iff all off-diagonal entries of A are <= 0; used to exercise
// the necessity direction of that test.
MaskFunction quadratic_mask_function(int n, std::vector<double> a_matrix, std::vector<double> b_vector);

}  // namespace nilm
