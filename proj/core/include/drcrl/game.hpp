#pragma once

#include "drcrl/best_response.hpp"

#include <string>

namespace drcrl {

// Dual iterate on the B-scaled simplex of dimension m+1; the final coordinate
// is the slack that lets the effective multiplier range over the full box.
struct DualState {
  std::vector<double> lambda; // length m+1, entrywise > 0, sums to bound_B
  double bound_B = 0.0;
  double learning_rate = 0.0;
};

struct GameParams {
  double B = 30.0;        // l1 bound on the dual variable
  double eta = 1.0;       // base learning rate; round t uses eta / sqrt(t)
  double omega = 0.01;    // duality-gap termination threshold
  int max_rounds = 200;
};

enum class Termination { gap_below_omega, max_rounds };

struct RoundRecord {
  std::vector<double> lambda; // dual iterate at the start of the round (m+1)
  int policy_index = 0;       // index into SolveResult::policy_pool
  double r_hat = 0.0;         // exact objective value of the round's policy
  std::vector<double> g_hat;  // exact constraint values of the round's policy
  double l_max = 0.0;
  double l_min = 0.0;
  double gap = 0.0;
};

struct SolveResult {
  std::vector<RoundRecord> rounds;
  std::vector<DeterministicPolicy> policy_pool; // distinct policies, first-seen order
  MixedPolicy final_policy;                     // uniform average of round policies
  std::vector<double> final_lambda_avg;         // averaged dual iterate (m+1)
  double certified_gap = 0.0;
  Termination terminated = Termination::max_rounds;
  double objective = 0.0;                 // averaged-policy objective value
  std::vector<double> constraint_values;  // averaged-policy constraint values
  double shortfall_bound = 0.0;           // 2 * (V_bar + omega) / B
};

// Lagrangian with the padded residual: R - lambda^T [(tau - G), 0]; a positive
// multiplier therefore penalizes falling short of the thresholds.
double lagrangian(double value_r_mu, const std::vector<double>& value_g_mu,
                  const std::vector<double>& tau, const std::vector<double>& lambda);

// Exponentiated-gradient (multiplicative-weights) step; preserves positivity
// and the l1 bound. Exponents are max-shifted before exponentiation.
DualState eg_update(const DualState& state, const std::vector<double>& z);

// Exact minimum of the Lagrangian over the B-scaled simplex (attained at a
// vertex): R - B * max(max_i (tau_i - G_i), 0).
double l_min_exact(double value_r_mu, const std::vector<double>& value_g_mu,
                   const std::vector<double>& tau, double B);

// Primal-dual meta game with exact tabular evaluation: best responses for the
// pi-player, exponentiated-gradient updates for the lambda-player, terminated
// by the certified duality gap.
SolveResult solve(const FiniteCMDP& mdp, const ContaminationSet& set, const GameParams& params,
                  const RobustEvalConfig& cfg = {});

// CSV trace, one row per round:
// round, lambda_0..lambda_m, L_max, L_min, gap, R_hat, G_hat_0..G_hat_{m-1}.
std::string trace_csv(const SolveResult& result);

} // namespace drcrl
