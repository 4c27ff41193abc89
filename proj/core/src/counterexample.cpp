#include "drcrl/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drcrl {

double interval_inner_min(const ValueFunction& v, const IntervalKernelMDP& mdp) {
  if (v.size() != 2) throw std::invalid_argument("interval_inner_min: value length must be 2");
  const double lo = (1.0 - mdp.xi_lo) * v[0] + mdp.xi_lo * v[1];
  const double hi = (1.0 - mdp.xi_hi) * v[0] + mdp.xi_hi * v[1];
  return std::min(lo, hi);
}

namespace {

// Fixed point of v(s0) = r_s0 + gamma * min_xi ((1 - xi) v(s0) + xi v_s1),
// with v(s1) held at its absorbing-state value.
double solve_s0(double r_s0, double v_s1, const IntervalKernelMDP& mdp) {
  double v0 = 0.0;
  for (int it = 0; it < 100000; ++it) {
    double next = r_s0 + mdp.discount * interval_inner_min({v0, v_s1}, mdp);
    if (std::abs(next - v0) <= 1e-13) return next;
    v0 = next;
  }
  throw ConvergenceError("counterexample: fixed-point iteration did not converge");
}

} // namespace

ExampleValues example_robust_values(const IntervalKernelMDP& mdp) {
  ExampleValues out;
  const double horizon = 1.0 / (1.0 - mdp.discount);
  // First policy plays a0 in both states; second plays a0 at s0 and a1 at s1.
  // s1 is absorbing under every action, so its values are geometric sums.
  const double v1_r_s1 = mdp.reward[1][0] * horizon;
  const double v1_g_s1 = mdp.constraint[1][0] * horizon;
  const double v2_r_s1 = mdp.reward[1][1] * horizon;
  const double v2_g_s1 = mdp.constraint[1][1] * horizon;
  // Immediate rewards at s0 per policy and quantity; the construction uses a
  // zero objective reward at s0 for the second policy (see header note).
  out.v1_r = {solve_s0(1.0, v1_r_s1, mdp), v1_r_s1};
  out.v1_g = {solve_s0(1.0, v1_g_s1, mdp), v1_g_s1};
  out.v2_r = {solve_s0(0.0, v2_r_s1, mdp), v2_r_s1};
  out.v2_g = {solve_s0(1.0, v2_g_s1, mdp), v2_g_s1};
  return out;
}

namespace {

ContradictionWitness check_at(double lambda_t, const ExampleValues& vals) {
  ContradictionWitness w;
  const double d0 = (vals.v1_r[0] - lambda_t * vals.v1_g[0]) -
                    (vals.v2_r[0] - lambda_t * vals.v2_g[0]);
  const double d1 = (vals.v1_r[1] - lambda_t * vals.v1_g[1]) -
                    (vals.v2_r[1] - lambda_t * vals.v2_g[1]);
  w.v1_s0 = vals.v1_r[0] - lambda_t * vals.v1_g[0];
  w.v2_s0 = vals.v2_r[0] - lambda_t * vals.v2_g[0];
  w.diff_s0 = std::abs(d0);
  w.sup_norm = std::max(std::abs(d0), std::abs(d1));
  w.violated = w.sup_norm > 0.0 && w.diff_s0 >= w.sup_norm - 1e-9;
  return w;
}

} // namespace

std::pair<bool, ContradictionWitness> contradiction_holds(double lambda_t,
                                                          const IntervalKernelMDP& mdp) {
  if (lambda_t < 0.0) throw std::invalid_argument("contradiction_holds: lambda must be >= 0");
  ContradictionWitness w = check_at(lambda_t, example_robust_values(mdp));
  return {w.violated, w};
}

std::pair<double, double> violation_interval(double grid_step, const IntervalKernelMDP& mdp) {
  if (!(grid_step > 0.0) || grid_step > 0.001)
    throw std::invalid_argument("violation_interval: grid_step must lie in (0, 0.001]");
  const ExampleValues vals = example_robust_values(mdp);
  const long n = std::lround(5.0 / grid_step);
  double lo = -1.0, hi = -1.0;
  for (long i = 0; i <= n; ++i) {
    const double lambda = i * grid_step;
    if (check_at(lambda, vals).violated) {
      if (lo < 0.0) lo = lambda;
      hi = lambda;
    }
  }
  if (lo < 0.0) throw std::runtime_error("violation_interval: no violation found on [0, 5]");
  return {lo, hi};
}

} // namespace drcrl
