#pragma once

#include "drcrl/robust_dp.hpp"

namespace drcrl {

// Scalarization of the constrained problem at a fixed multiplier: the combined
// reward credits constraint rewards at rate lambda, so its unconstrained
// optimum is the Lagrangian best response, and the contamination robustness is
// folded into the shortened discount gamma * (1 - beta).
struct ScalarizedProblem {
  std::vector<double> combined_reward; // S * A: reward + lambda^T constraints
  double effective_discount = 0.0;     // gamma * (1 - beta)
  std::vector<double> lambda_used;     // length m
};

ScalarizedProblem scalarize(const FiniteCMDP& mdp, const ContaminationSet& set,
                            const std::vector<double>& lambda);

// Maximizes the Lagrangian over deterministic policies by value iteration with
// the standard optimality operator on the scalarized problem (valid because
// the absorbing zero-reward fail state pins the value minimum at zero).
// Requires a fail state when beta > 0. An optional warm-start value replaces
// the zero initial iterate; the fixed point is unaffected.
std::pair<DeterministicPolicy, ValueFunction> best_response(
    const FiniteCMDP& mdp, const ContaminationSet& set, const std::vector<double>& lambda,
    const RobustEvalConfig& cfg = {}, const ValueFunction* warm_start = nullptr);

// One modified-policy-iteration step: exact greedy improvement on v, then
// m_steps applications of the policy's scalarized consistency operator.
std::pair<DeterministicPolicy, ValueFunction> ampi_step(const ValueFunction& v,
                                                        const ScalarizedProblem& prob,
                                                        const FiniteCMDP& mdp, int m_steps);

// Loss ceiling after k iterations with per-step improvement error
// eps_prime_bar and evaluation error eps_bar:
//   2 * gamma^k * l0 + (2*eps_bar*(gamma - gamma^k) + eps_prime_bar*(1 - gamma^k)) / (1-gamma)^2.
double theorem1_bound(double eps_bar, double eps_prime_bar, double gamma_eff, int k, double l0);

} // namespace drcrl
