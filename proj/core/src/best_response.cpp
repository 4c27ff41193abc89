#include "drcrl/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drcrl {

namespace {

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Greedy sweep of the standard optimality operator on the scalarized problem.
// Returns the residual and writes the improved value and greedy policy.
double optimality_sweep(const ScalarizedProblem& prob, const FiniteCMDP& mdp, ValueFunction& v,
                        DeterministicPolicy& greedy) {
  const int S = mdp.n_states, A = mdp.n_actions;
  double res = 0.0;
  ValueFunction next(S);
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      const double* row = mdp.kernel_row(s, a);
      double exp_v = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_v += row[s2] * v[s2];
      double q = prob.combined_reward[static_cast<std::size_t>(s) * A + a] +
                 prob.effective_discount * exp_v;
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    next[s] = best;
    greedy.action_of[s] = best_a;
    res = std::max(res, std::abs(best - v[s]));
  }
  v = std::move(next);
  return res;
}

} // namespace

ScalarizedProblem scalarize(const FiniteCMDP& mdp, const ContaminationSet& set,
                            const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != mdp.num_constraints())
    throw std::invalid_argument("scalarize: lambda length must equal the constraint count");
  for (double l : lambda)
    if (l < 0.0) throw std::invalid_argument("scalarize: lambda entries must be non-negative");
  ScalarizedProblem prob;
  prob.lambda_used = lambda;
  prob.effective_discount = mdp.discount * (1.0 - set.beta);
  prob.combined_reward = mdp.reward;
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t sa = 0; sa < prob.combined_reward.size(); ++sa)
      prob.combined_reward[sa] += lambda[i] * mdp.constraints[i][sa];
  return prob;
}

std::pair<DeterministicPolicy, ValueFunction> best_response(
    const FiniteCMDP& mdp, const ContaminationSet& set, const std::vector<double>& lambda,
    const RobustEvalConfig& cfg, const ValueFunction* warm_start) {
  if (set.beta > 0.0 && !mdp.has_fail_state())
    throw std::invalid_argument(
        "best_response: a fail state is required when the robustness level is positive");
  ScalarizedProblem prob = scalarize(mdp, set, lambda);
  ValueFunction v = warm_start ? *warm_start : ValueFunction(mdp.n_states, 0.0);
  DeterministicPolicy greedy{std::vector<int>(mdp.n_states, 0)};
  for (int it = 0; it < cfg.max_iters; ++it) {
    double res = optimality_sweep(prob, mdp, v, greedy);
    if (res <= cfg.tol) return {greedy, v};
  }
  throw ConvergenceError("best_response: residual above tol after max_iters iterations");
}

std::pair<DeterministicPolicy, ValueFunction> ampi_step(const ValueFunction& v,
                                                        const ScalarizedProblem& prob,
                                                        const FiniteCMDP& mdp, int m_steps) {
  if (m_steps < 1) throw std::invalid_argument("ampi_step: m_steps must be positive");
  const int S = mdp.n_states, A = mdp.n_actions;
  DeterministicPolicy pi{std::vector<int>(S, 0)};
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      const double* row = mdp.kernel_row(s, a);
      double exp_v = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_v += row[s2] * v[s2];
      double q = prob.combined_reward[static_cast<std::size_t>(s) * A + a] +
                 prob.effective_discount * exp_v;
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    pi.action_of[s] = best_a;
  }
  ValueFunction cur = v;
  for (int step = 0; step < m_steps; ++step) {
    ValueFunction next(S);
    for (int s = 0; s < S; ++s) {
      const int a = pi.action_of[s];
      const double* row = mdp.kernel_row(s, a);
      double exp_v = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_v += row[s2] * cur[s2];
      next[s] = prob.combined_reward[static_cast<std::size_t>(s) * A + a] +
                prob.effective_discount * exp_v;
    }
    cur = std::move(next);
  }
  return {pi, cur};
}

double theorem1_bound(double eps_bar, double eps_prime_bar, double gamma_eff, int k, double l0) {
  if (eps_bar < 0.0 || eps_prime_bar < 0.0 || l0 < 0.0 || k < 0)
    throw std::invalid_argument("theorem1_bound: inputs must be non-negative");
  if (!(gamma_eff >= 0.0 && gamma_eff < 1.0))
    throw std::invalid_argument("theorem1_bound: gamma_eff must lie in [0, 1)");
  const double gk = std::pow(gamma_eff, k);
  const double denom = (1.0 - gamma_eff) * (1.0 - gamma_eff);
  return 2.0 * gk * l0 + (2.0 * eps_bar * (gamma_eff - gk) + eps_prime_bar * (1.0 - gk)) / denom;
}

} // namespace drcrl
