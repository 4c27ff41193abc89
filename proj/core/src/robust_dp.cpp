#include "drcrl/robust_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drcrl {

namespace {

double min_entry(const ValueFunction& v) {
  double m = v[0];
  for (double x : v) m = std::min(m, x);
  return m;
}

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

double inner_min(const ValueFunction& v, int s, int a, const ContaminationSet& set,
                 const FiniteCMDP& mdp) {
  const double* row = mdp.kernel_row(s, a);
  double nominal = 0.0;
  for (int s2 = 0; s2 < mdp.n_states; ++s2) nominal += row[s2] * v[s2];
  if (set.beta == 0.0) return nominal;
  return (1.0 - set.beta) * nominal + set.beta * min_entry(v);
}

ValueFunction robust_consistency_apply(const ValueFunction& v, const DeterministicPolicy& pi,
                                       const std::vector<double>& reward_matrix,
                                       const ContaminationSet& set, const FiniteCMDP& mdp) {
  const int S = mdp.n_states, A = mdp.n_actions;
  ValueFunction out(S);
  for (int s = 0; s < S; ++s) {
    const int a = pi.action_of[s];
    out[s] = reward_matrix[static_cast<std::size_t>(s) * A + a] +
             mdp.discount * inner_min(v, s, a, set, mdp);
  }
  return out;
}

ValueFunction robust_policy_eval(const DeterministicPolicy& pi,
                                 const std::vector<double>& reward_matrix,
                                 const ContaminationSet& set, const FiniteCMDP& mdp,
                                 const RobustEvalConfig& cfg) {
  ValueFunction v(mdp.n_states, 0.0);
  for (int it = 0; it < cfg.max_iters; ++it) {
    ValueFunction next = robust_consistency_apply(v, pi, reward_matrix, set, mdp);
    double res = sup_diff(next, v);
    v = std::move(next);
    if (res <= cfg.tol) return v;
  }
  throw ConvergenceError("robust_policy_eval: residual above tol after max_iters iterations");
}

std::pair<ValueFunction, DeterministicPolicy> robust_optimal(
    const std::vector<double>& reward_matrix, const ContaminationSet& set, const FiniteCMDP& mdp,
    const RobustEvalConfig& cfg) {
  const int S = mdp.n_states, A = mdp.n_actions;
  ValueFunction v(S, 0.0);
  DeterministicPolicy greedy{std::vector<int>(S, 0)};
  for (int it = 0; it < cfg.max_iters; ++it) {
    ValueFunction next(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        double q = reward_matrix[static_cast<std::size_t>(s) * A + a] +
                   mdp.discount * inner_min(v, s, a, set, mdp);
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      next[s] = best;
      greedy.action_of[s] = best_a;
    }
    double res = sup_diff(next, v);
    v = std::move(next);
    if (res <= cfg.tol) return {v, greedy};
  }
  throw ConvergenceError("robust_optimal: residual above tol after max_iters iterations");
}

std::vector<double> worst_case_kernel(const DeterministicPolicy& pi, const ValueFunction& v,
                                      const ContaminationSet& set, const FiniteCMDP& mdp) {
  (void)pi; // the adversary's point mass depends on v only; all rows are filled
  const int S = mdp.n_states, A = mdp.n_actions;
  int s_min = 0;
  for (int s = 1; s < S; ++s)
    if (v[s] < v[s_min]) s_min = s;
  std::vector<double> kernel(static_cast<std::size_t>(S) * A * S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double* row = mdp.kernel_row(s, a);
      double* out = kernel.data() + (static_cast<std::size_t>(s) * A + a) * S;
      for (int s2 = 0; s2 < S; ++s2) out[s2] = (1.0 - set.beta) * row[s2];
      out[s_min] += set.beta;
    }
  }
  return kernel;
}

ValueFunction kernel_policy_eval(const DeterministicPolicy& pi,
                                 const std::vector<double>& reward_matrix,
                                 const std::vector<double>& kernel, double gamma,
                                 const FiniteCMDP& mdp, const RobustEvalConfig& cfg) {
  const int S = mdp.n_states, A = mdp.n_actions;
  ValueFunction v(S, 0.0);
  for (int it = 0; it < cfg.max_iters; ++it) {
    ValueFunction next(S);
    for (int s = 0; s < S; ++s) {
      const int a = pi.action_of[s];
      const double* row = kernel.data() + (static_cast<std::size_t>(s) * A + a) * S;
      double exp_v = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_v += row[s2] * v[s2];
      next[s] = reward_matrix[static_cast<std::size_t>(s) * A + a] + gamma * exp_v;
    }
    double res = sup_diff(next, v);
    v = std::move(next);
    if (res <= cfg.tol) return v;
  }
  throw ConvergenceError("kernel_policy_eval: residual above tol after max_iters iterations");
}

} // namespace drcrl
