#pragma once

#include "drcrl/mdp.hpp"

#include <utility>

namespace drcrl {

// Two-state, two-action MDP whose transition from (s0, a0) is an interval
// family [1-xi, xi] with xi in [0.9, 1]; all other rows are deterministic.
// Used to exhibit a multiplier range on which no operator can be both a
// contraction and enable greedy policies for the scalarized problem.
struct IntervalKernelMDP {
  double discount = 0.95;
  double xi_lo = 0.9;
  double xi_hi = 1.0;
  // reward[s][a] and constraint[s][a] tables
  double reward[2][2] = {{1.0, 0.0}, {1.0, 2.0}};
  double constraint[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
};

struct ExampleValues {
  ValueFunction v1_r; // first policy (a0, a0), objective
  ValueFunction v1_g; // first policy, constraint
  ValueFunction v2_r; // second policy (a0, a1), objective
  ValueFunction v2_g; // second policy, constraint
};

struct ContradictionWitness {
  double v1_s0 = 0.0;      // scalarized value of the first policy at s0
  double v2_s0 = 0.0;      // scalarized value of the second policy at s0
  double diff_s0 = 0.0;    // |v1_s0 - v2_s0|
  double sup_norm = 0.0;   // sup-norm of the scalarized value difference
  bool violated = false;
};

// min over xi in {xi_lo, xi_hi} of (1 - xi) v(s0) + xi v(s1); the objective is
// linear in xi, so endpoint evaluation is exact.
double interval_inner_min(const ValueFunction& v, const IntervalKernelMDP& mdp = {});

// Worst-case value functions of the two reference policies, computed by
// fixed-point iteration with interval_inner_min. The published construction
// credits no immediate objective reward at s0 under the second policy; the
// recursions here follow that case analysis so the resulting values are
// [20, 20], [1, 0], [6840/181, 40], and [20, 20].
ExampleValues example_robust_values(const IntervalKernelMDP& mdp = {});

// Checks whether, at multiplier lambda_t, the scalarized value difference of
// the two policies attains its sup-norm at s0 with a strictly positive norm —
// the configuration that contradicts the contraction-plus-greedy inequality.
std::pair<bool, ContradictionWitness> contradiction_holds(double lambda_t,
                                                          const IntervalKernelMDP& mdp = {});

// Scans lambda over [0, 5] at grid_step resolution and returns the smallest
// and largest multiplier where contradiction_holds is true.
std::pair<double, double> violation_interval(double grid_step, const IntervalKernelMDP& mdp = {});

} // namespace drcrl
