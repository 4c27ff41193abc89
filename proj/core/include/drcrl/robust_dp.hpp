#pragma once

#include "drcrl/mdp.hpp"

namespace drcrl {

struct RobustEvalConfig {
  double tol = 1e-10;
  int max_iters = 100000;
};

// Closed-form inner minimization over the contamination set:
//   min over P in the set of <P, v> = (1 - beta) <P0_{s,a}, v> + beta * min_s' v(s').
double inner_min(const ValueFunction& v, int s, int a, const ContaminationSet& set,
                 const FiniteCMDP& mdp);

// One application of the robust Bellman consistency operator for policy pi:
//   [T v](s) = reward(s, pi(s)) + discount * inner_min(v, s, pi(s)).
ValueFunction robust_consistency_apply(const ValueFunction& v, const DeterministicPolicy& pi,
                                       const std::vector<double>& reward_matrix,
                                       const ContaminationSet& set, const FiniteCMDP& mdp);

// Fixed point of the robust consistency operator, from v = 0, to sup-norm
// residual <= cfg.tol. Throws ConvergenceError if max_iters is exhausted.
ValueFunction robust_policy_eval(const DeterministicPolicy& pi,
                                 const std::vector<double>& reward_matrix,
                                 const ContaminationSet& set, const FiniteCMDP& mdp,
                                 const RobustEvalConfig& cfg = {});

// Robust optimality-operator value iteration; returns the converged value and
// the greedy policy (argmax ties break to the lowest action index).
std::pair<ValueFunction, DeterministicPolicy> robust_optimal(
    const std::vector<double>& reward_matrix, const ContaminationSet& set, const FiniteCMDP& mdp,
    const RobustEvalConfig& cfg = {});

// Stationary adversarial kernel for a policy whose robust value is v:
//   K[s][a] = (1 - beta) * P0_{s,a} + beta * delta at argmin_s' v(s')
// (argmin ties break to the lowest state index). Flat S*A*S layout.
std::vector<double> worst_case_kernel(const DeterministicPolicy& pi, const ValueFunction& v,
                                      const ContaminationSet& set, const FiniteCMDP& mdp);

// Standard (non-robust) policy evaluation under an explicit kernel and discount.
ValueFunction kernel_policy_eval(const DeterministicPolicy& pi,
                                 const std::vector<double>& reward_matrix,
                                 const std::vector<double>& kernel, double gamma,
                                 const FiniteCMDP& mdp, const RobustEvalConfig& cfg = {});

} // namespace drcrl
