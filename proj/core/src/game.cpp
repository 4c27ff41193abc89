#include "drcrl/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace drcrl {

double lagrangian(double value_r_mu, const std::vector<double>& value_g_mu,
                  const std::vector<double>& tau, const std::vector<double>& lambda) {
  const std::size_t m = value_g_mu.size();
  if (tau.size() != m || lambda.size() != m + 1)
    throw std::invalid_argument("lagrangian: shape mismatch");
  double acc = value_r_mu;
  for (std::size_t i = 0; i < m; ++i) acc -= lambda[i] * (tau[i] - value_g_mu[i]);
  return acc; // the slack coordinate lambda[m] multiplies a zero residual
}

DualState eg_update(const DualState& state, const std::vector<double>& z) {
  const std::size_t n = state.lambda.size();
  if (z.size() != n) throw std::invalid_argument("eg_update: shape mismatch");
  for (double l : state.lambda)
    if (!(l > 0.0)) throw std::invalid_argument("eg_update: lambda entries must be positive");
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, -state.learning_rate * z[i]);
  DualState next = state;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // floor the weight so extreme gradients cannot underflow a coordinate to
    // exactly zero, which would break the positivity contract
    next.lambda[i] =
        std::max(state.lambda[i] * std::exp(-state.learning_rate * z[i] - shift), 1e-300);
    total += next.lambda[i];
  }
  for (std::size_t i = 0; i < n; ++i) next.lambda[i] = state.bound_B * next.lambda[i] / total;
  return next;
}

double l_min_exact(double value_r_mu, const std::vector<double>& value_g_mu,
                   const std::vector<double>& tau, double B) {
  if (tau.size() != value_g_mu.size()) throw std::invalid_argument("l_min_exact: shape mismatch");
  double worst = 0.0; // the slack vertex contributes a zero residual
  for (std::size_t i = 0; i < tau.size(); ++i) worst = std::max(worst, tau[i] - value_g_mu[i]);
  return value_r_mu - B * worst;
}

namespace {

struct PolicyValues {
  int index = 0;       // position in the policy pool
  double r_mu = 0.0;   // exact objective value at the initial distribution
  std::vector<double> g_mu; // exact constraint values
};

class Evaluator {
 public:
  Evaluator(const FiniteCMDP& mdp, const ContaminationSet& set, const RobustEvalConfig& cfg)
      : mdp_(mdp), set_(set), cfg_(cfg) {}

  const PolicyValues& operator()(const DeterministicPolicy& pi) {
    auto it = cache_.find(pi);
    if (it != cache_.end()) return it->second;
    PolicyValues vals;
    vals.index = static_cast<int>(pool_.size());
    vals.r_mu = scalar_value(robust_policy_eval(pi, mdp_.reward, set_, mdp_, cfg_),
                             mdp_.initial_dist);
    for (int i = 0; i < mdp_.num_constraints(); ++i)
      vals.g_mu.push_back(scalar_value(robust_policy_eval(pi, mdp_.constraints[i], set_, mdp_, cfg_),
                                       mdp_.initial_dist));
    pool_.push_back(pi);
    return cache_.emplace(pi, std::move(vals)).first->second;
  }

  const std::vector<DeterministicPolicy>& pool() const { return pool_; }

 private:
  const FiniteCMDP& mdp_;
  const ContaminationSet& set_;
  const RobustEvalConfig& cfg_;
  std::map<DeterministicPolicy, PolicyValues> cache_;
  std::vector<DeterministicPolicy> pool_;
};

} // namespace

SolveResult solve(const FiniteCMDP& mdp, const ContaminationSet& set, const GameParams& params,
                  const RobustEvalConfig& cfg) {
  if (set.beta > 0.0 && !mdp.has_fail_state())
    throw std::invalid_argument("solve: a fail state is required when the robustness level is positive");
  const int m = mdp.num_constraints();
  const double gamma_eff = mdp.discount * (1.0 - set.beta);
  Evaluator evaluate(mdp, set, cfg);

  DualState dual;
  dual.bound_B = params.B;
  dual.lambda.assign(m + 1, params.B / (m + 1));

  SolveResult result;
  std::vector<double> lambda_sum(m + 1, 0.0);
  double r_sum = 0.0;
  std::vector<double> g_sum(m, 0.0);
  std::vector<int> pool_counts;
  ValueFunction warm_cur(mdp.n_states, 0.0);  // best response at the round multiplier
  ValueFunction warm_avg(mdp.n_states, 0.0);  // best response at the averaged multiplier

  result.terminated = Termination::max_rounds;
  for (int t = 1; t <= params.max_rounds; ++t) {
    std::vector<double> lambda_head(dual.lambda.begin(), dual.lambda.begin() + m);
    auto [pi_t, v_t] = best_response(mdp, set, lambda_head, cfg, &warm_cur);
    warm_cur = v_t;
    const PolicyValues& vals = evaluate(pi_t);
    if (vals.index >= static_cast<int>(pool_counts.size())) pool_counts.push_back(0);
    pool_counts[vals.index] += 1;

    r_sum += vals.r_mu;
    for (int i = 0; i < m; ++i) g_sum[i] += vals.g_mu[i];
    for (int i = 0; i <= m; ++i) lambda_sum[i] += dual.lambda[i];

    std::vector<double> lambda_avg(m + 1);
    for (int i = 0; i <= m; ++i) lambda_avg[i] = lambda_sum[i] / t;
    std::vector<double> lambda_avg_head(lambda_avg.begin(), lambda_avg.begin() + m);
    auto [pi_tilde, v_tilde] = best_response(mdp, set, lambda_avg_head, cfg, &warm_avg);
    warm_avg = v_tilde;
    const PolicyValues& tilde_vals = evaluate(pi_tilde);

    const double l_max = lagrangian(tilde_vals.r_mu, tilde_vals.g_mu, mdp.thresholds, lambda_avg);
    const double r_avg = r_sum / t;
    std::vector<double> g_avg(m);
    for (int i = 0; i < m; ++i) g_avg[i] = g_sum[i] / t;
    const double l_min = l_min_exact(r_avg, g_avg, mdp.thresholds, params.B);
    const double gap = l_max - l_min;

    RoundRecord rec;
    rec.lambda = dual.lambda;
    rec.policy_index = vals.index;
    rec.r_hat = vals.r_mu;
    rec.g_hat = vals.g_mu;
    rec.l_max = l_max;
    rec.l_min = l_min;
    rec.gap = gap;
    result.rounds.push_back(std::move(rec));

    result.final_lambda_avg = lambda_avg;
    result.certified_gap = gap;
    result.objective = r_avg;
    result.constraint_values = g_avg;

    if (gap < params.omega) {
      result.terminated = Termination::gap_below_omega;
      break;
    }
    if (t == params.max_rounds) break;

    dual.learning_rate = params.eta / std::sqrt(static_cast<double>(t));
    std::vector<double> z(m + 1, 0.0);
    for (int i = 0; i < m; ++i) z[i] = vals.g_mu[i] - mdp.thresholds[i];
    dual = eg_update(dual, z);
  }

  result.policy_pool = evaluate.pool();
  const double total_rounds = static_cast<double>(result.rounds.size());
  std::vector<MixedPolicy::Atom> atoms;
  for (std::size_t p = 0; p < pool_counts.size(); ++p)
    if (pool_counts[p] > 0)
      atoms.push_back({pool_counts[p] / total_rounds, result.policy_pool[p]});
  result.final_policy = make_mixed(atoms);

  const double v_bar = mdp.max_reward() / (1.0 - gamma_eff) +
                       params.B * mdp.max_constraint() / (1.0 - gamma_eff);
  result.shortfall_bound = 2.0 * (v_bar + params.omega) / params.B;
  return result;
}

std::string trace_csv(const SolveResult& result) {
  std::string out = "round";
  const std::size_t m1 = result.rounds.empty() ? 1 : result.rounds.front().lambda.size();
  const std::size_t m = m1 - 1;
  char buf[64];
  for (std::size_t i = 0; i < m1; ++i) {
    std::snprintf(buf, sizeof buf, ",lambda_%zu", i);
    out += buf;
  }
  out += ",L_max,L_min,gap,R_hat";
  for (std::size_t i = 0; i < m; ++i) {
    std::snprintf(buf, sizeof buf, ",G_hat_%zu", i);
    out += buf;
  }
  out += "\n";
  auto put = [&out, &buf](double x) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out += buf;
  };
  for (std::size_t t = 0; t < result.rounds.size(); ++t) {
    const RoundRecord& rec = result.rounds[t];
    std::snprintf(buf, sizeof buf, "%zu", t + 1);
    out += buf;
    for (double l : rec.lambda) put(l);
    put(rec.l_max);
    put(rec.l_min);
    put(rec.gap);
    put(rec.r_hat);
    for (double g : rec.g_hat) put(g);
    out += "\n";
  }
  return out;
}

} // namespace drcrl
