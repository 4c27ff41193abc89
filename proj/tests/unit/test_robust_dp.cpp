#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drcrl/robust_dp.hpp"
#include "../common/test_util.hpp"

using namespace drcrl;

namespace {

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

TEST_CASE("inner_min closed form") {
  testutil::Rng rng(3);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
  ValueFunction v = {2.0, -1.0, 5.0};

  SUBCASE("beta 0 gives the nominal expectation") {
    double expect = 0.0;
    for (int s2 = 0; s2 < 3; ++s2) expect += mdp.kernel_at(1, 0, s2) * v[s2];
    CHECK(inner_min(v, 1, 0, ContaminationSet{0.0}, mdp) == doctest::Approx(expect).epsilon(1e-15));
  }
  SUBCASE("beta 1 gives the value minimum") {
    CHECK(inner_min(v, 0, 1, ContaminationSet{1.0}, mdp) == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("two-state hand example at beta 0.2") {
    FiniteCMDP two;
    two.n_states = 2;
    two.n_actions = 1;
    two.discount = 0.9;
    two.nominal_kernel = {0.5, 0.5, 0.0, 1.0};
    two.reward = {0.0, 0.0};
    two.initial_dist = {1.0, 0.0};
    // (1 - 0.2) * (0.5*0 + 0.5*10) + 0.2 * 0 = 4
    CHECK(inner_min({0.0, 10.0}, 0, 0, ContaminationSet{0.2}, two) ==
          doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("minimum over sampled set members is attained by the closed form") {
    testutil::Rng rng2(11);
    ContaminationSet set{0.35};
    double closed = inner_min(v, 0, 0, set, mdp);
    double sampled_best = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
      // q puts all mass on one state or is random; both stay inside the set
      std::vector<double> q(3, 0.0);
      if (trial < 3) {
        q[trial] = 1.0;
      } else {
        double total = 0.0;
        for (double& x : q) total += (x = rng2.exponential());
        for (double& x : q) x /= total;
      }
      double val = 0.0;
      for (int s2 = 0; s2 < 3; ++s2)
        val += ((1.0 - set.beta) * mdp.kernel_at(0, 0, s2) + set.beta * q[s2]) * v[s2];
      sampled_best = std::min(sampled_best, val);
    }
    CHECK(closed == doctest::Approx(sampled_best).epsilon(1e-12));
    CHECK(closed <= sampled_best + 1e-12);
  }
}

TEST_CASE("robust_consistency_apply basics") {
  testutil::Rng rng(5);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 2, 0);
  DeterministicPolicy pi = testutil::random_policy(rng, 4, 2);
  ContaminationSet set{0.15};

  SUBCASE("zero value maps to the policy's rewards") {
    ValueFunction out = robust_consistency_apply(ValueFunction(4, 0.0), pi, mdp.reward, set, mdp);
    for (int s = 0; s < 4; ++s)
      CHECK(out[s] == doctest::Approx(mdp.reward_at(s, pi.action_of[s])).epsilon(1e-15));
  }
  SUBCASE("the converged value is stationary") {
    ValueFunction v = robust_policy_eval(pi, mdp.reward, set, mdp);
    ValueFunction tv = robust_consistency_apply(v, pi, mdp.reward, set, mdp);
    CHECK(sup_diff(tv, v) <= 1e-9);
  }
}

TEST_CASE("robust_policy_eval of a zero reward is zero") {
  testutil::Rng rng(9);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
  std::vector<double> zero(mdp.reward.size(), 0.0);
  DeterministicPolicy pi = testutil::random_policy(rng, 3, 2);
  ValueFunction v = robust_policy_eval(pi, zero, ContaminationSet{0.4}, mdp);
  for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("robust_policy_eval raises on an impossible iteration budget") {
  testutil::Rng rng(10);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
  DeterministicPolicy pi = testutil::random_policy(rng, 3, 2);
  CHECK_THROWS_AS(robust_policy_eval(pi, mdp.reward, ContaminationSet{0.0}, mdp,
                                     RobustEvalConfig{1e-10, 3}),
                  ConvergenceError);
}

TEST_CASE("robust_optimal matches brute-force policy enumeration") {
  testutil::Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
    ContaminationSet set{0.3};
    auto [v_star, greedy] = robust_optimal(mdp.reward, set, mdp);
    ValueFunction best(3, -1e300);
    for (const auto& pi : testutil::enumerate_policies(3, 2)) {
      ValueFunction v = robust_policy_eval(pi, mdp.reward, set, mdp);
      for (int s = 0; s < 3; ++s) best[s] = std::max(best[s], v[s]);
    }
    CHECK(sup_diff(v_star, best) <= 1e-8);
    // the greedy policy attains the optimum
    CHECK(sup_diff(robust_policy_eval(greedy, mdp.reward, set, mdp), best) <= 1e-8);
  }
}

TEST_CASE("robust_optimal with a single action equals policy evaluation") {
  testutil::Rng rng(17);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 1, 0);
  ContaminationSet set{0.2};
  auto [v, greedy] = robust_optimal(mdp.reward, set, mdp);
  DeterministicPolicy only{{0, 0, 0, 0}};
  CHECK(sup_diff(v, robust_policy_eval(only, mdp.reward, set, mdp)) <= 1e-9);
  CHECK(greedy == only);
}

TEST_CASE("robust_optimal at beta 0 equals standard value iteration") {
  testutil::Rng rng(19);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 3, 0);
  auto [v_rob, g1] = robust_optimal(mdp.reward, ContaminationSet{0.0}, mdp);
  // reference: plain value iteration on the nominal kernel
  ValueFunction v(4, 0.0);
  for (int it = 0; it < 100000; ++it) {
    ValueFunction next(4);
    for (int s = 0; s < 4; ++s) {
      double best = -1e300;
      for (int a = 0; a < 3; ++a) {
        double exp_v = 0.0;
        for (int s2 = 0; s2 < 4; ++s2) exp_v += mdp.kernel_at(s, a, s2) * v[s2];
        best = std::max(best, mdp.reward_at(s, a) + mdp.discount * exp_v);
      }
      next[s] = best;
    }
    if (sup_diff(next, v) <= 1e-12) { v = next; break; }
    v = next;
  }
  CHECK(sup_diff(v_rob, v) <= 1e-8);
}

TEST_CASE("worst_case_kernel structure") {
  SUBCASE("beta 0 returns the nominal kernel") {
    testutil::Rng rng(23);
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
    DeterministicPolicy pi = testutil::random_policy(rng, 3, 2);
    CHECK(worst_case_kernel(pi, {1.0, 2.0, 3.0}, ContaminationSet{0.0}, mdp) == mdp.nominal_kernel);
  }
  SUBCASE("hand example routes beta mass to the argmin state") {
    FiniteCMDP two;
    two.n_states = 2;
    two.n_actions = 1;
    two.discount = 0.9;
    two.nominal_kernel = {0.5, 0.5, 0.5, 0.5};
    two.reward = {0.0, 0.0};
    two.initial_dist = {1.0, 0.0};
    auto k = worst_case_kernel({{0, 0}}, {3.0, 1.0}, ContaminationSet{0.5}, two);
    CHECK(k[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(k[1] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("fail-state minimum receives the contamination mass") {
    testutil::Rng rng(29);
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 2, 0);
    DeterministicPolicy pi = testutil::random_policy(rng, 4, 2);
    ContaminationSet set{0.3};
    ValueFunction v = robust_policy_eval(pi, mdp.reward, set, mdp);
    auto k = worst_case_kernel(pi, v, set, mdp);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a)
        CHECK(k[(static_cast<std::size_t>(s) * 2 + a) * 4 + 3] >= set.beta - 1e-15);
  }
}

TEST_CASE("kernel_policy_eval basics") {
  SUBCASE("constant reward gives c / (1 - gamma)") {
    testutil::Rng rng(31);
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 3, 2, 0);
    std::vector<double> ones(mdp.reward.size(), 1.0);
    DeterministicPolicy pi = testutil::random_policy(rng, 3, 2);
    ValueFunction v = kernel_policy_eval(pi, ones, mdp.nominal_kernel, 0.9, mdp);
    for (double x : v) CHECK(x == doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("the stationary adversary attains the robust value") {
    testutil::Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
      FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 2, 0);
      DeterministicPolicy pi = testutil::random_policy(rng, 4, 2);
      ContaminationSet set{rng.uniform(0.0, 0.5)};
      RobustEvalConfig cfg{1e-11, 1000000};
      ValueFunction v_rob = robust_policy_eval(pi, mdp.reward, set, mdp, cfg);
      auto adv = worst_case_kernel(pi, v_rob, set, mdp);
      ValueFunction v_adv = kernel_policy_eval(pi, mdp.reward, adv, mdp.discount, mdp, cfg);
      CHECK(sup_diff(v_rob, v_adv) <= 2e-9);
    }
  }
}

TEST_CASE("operator contraction, monotonicity, and transition invariance") {
  testutil::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int S = rng.uniform_int(3, 5), A = rng.uniform_int(2, 3);
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, S, A, 0);
    DeterministicPolicy pi = testutil::random_policy(rng, S, A);
    ContaminationSet set{rng.uniform(0.0, 0.6)};
    ValueFunction v1(S), v2(S);
    for (int s = 0; s < S; ++s) {
      v1[s] = rng.uniform(-5.0, 5.0);
      v2[s] = rng.uniform(-5.0, 5.0);
    }
    ValueFunction t1 = robust_consistency_apply(v1, pi, mdp.reward, set, mdp);
    ValueFunction t2 = robust_consistency_apply(v2, pi, mdp.reward, set, mdp);
    // contraction with modulus gamma for the general robust operator
    CHECK(sup_diff(t1, t2) <= mdp.discount * sup_diff(v1, v2) + 1e-12);
    // monotonicity: apply to the pointwise max
    ValueFunction v_hi(S);
    for (int s = 0; s < S; ++s) v_hi[s] = std::max(v1[s], v2[s]);
    ValueFunction t_hi = robust_consistency_apply(v_hi, pi, mdp.reward, set, mdp);
    for (int s = 0; s < S; ++s) {
      CHECK(t_hi[s] >= t1[s] - 1e-12);
      CHECK(t_hi[s] >= t2[s] - 1e-12);
    }
    // translation: T(v + c) = T(v) + gamma * c for the robust operator
    const double c = rng.uniform(-3.0, 3.0);
    ValueFunction v_shift(S);
    for (int s = 0; s < S; ++s) v_shift[s] = v1[s] + c;
    ValueFunction t_shift = robust_consistency_apply(v_shift, pi, mdp.reward, set, mdp);
    for (int s = 0; s < S; ++s)
      CHECK(t_shift[s] == doctest::Approx(t1[s] + mdp.discount * c).epsilon(1e-10));
  }
}

TEST_CASE("robust values are dominated by nominal values and monotone in beta") {
  testutil::Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 2, 0);
    DeterministicPolicy pi = testutil::random_policy(rng, 4, 2);
    ValueFunction nominal = kernel_policy_eval(pi, mdp.reward, mdp.nominal_kernel, mdp.discount, mdp);
    ValueFunction prev = nominal;
    for (double beta : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      ValueFunction v = robust_policy_eval(pi, mdp.reward, ContaminationSet{beta}, mdp);
      for (int s = 0; s < 4; ++s) {
        CHECK(v[s] <= nominal[s] + 1e-9);
        CHECK(v[s] <= prev[s] + 1e-9);
      }
      prev = v;
    }
  }
}

TEST_CASE("fail-state values are pinned at zero") {
  testutil::Rng rng(47);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 5, 3, 1);
  for (int trial = 0; trial < 5; ++trial) {
    DeterministicPolicy pi = testutil::random_policy(rng, 5, 3);
    ValueFunction v = robust_policy_eval(pi, mdp.reward, ContaminationSet{0.2}, mdp);
    CHECK(std::abs(v[4]) <= 1e-10);
  }
}

TEST_CASE("no sampled set member scores below the robust value") {
  testutil::Rng rng(53);
  FiniteCMDP mdp = testutil::random_fail_state_mdp(rng, 4, 2, 0);
  DeterministicPolicy pi = testutil::random_policy(rng, 4, 2);
  ContaminationSet set{0.3};
  RobustEvalConfig cfg{1e-11, 1000000};
  ValueFunction v_rob = robust_policy_eval(pi, mdp.reward, set, mdp, cfg);
  for (int trial = 0; trial < 100; ++trial) {
    // random member: mix the nominal with a random row-stochastic kernel
    std::vector<double> kernel(mdp.nominal_kernel.size());
    for (int s = 0; s < 4; ++s) {
      for (int a = 0; a < 2; ++a) {
        std::vector<double> q(4);
        double total = 0.0;
        for (double& x : q) total += (x = rng.exponential());
        for (int s2 = 0; s2 < 4; ++s2)
          kernel[(static_cast<std::size_t>(s) * 2 + a) * 4 + s2] =
              (1.0 - set.beta) * mdp.kernel_at(s, a, s2) + set.beta * q[s2] / total;
      }
    }
    ValueFunction v = kernel_policy_eval(pi, mdp.reward, kernel, mdp.discount, mdp, cfg);
    for (int s = 0; s < 4; ++s) CHECK(v[s] >= v_rob[s] - 2e-9);
  }
  auto adv = worst_case_kernel(pi, v_rob, set, mdp);
  ValueFunction v_adv = kernel_policy_eval(pi, mdp.reward, adv, mdp.discount, mdp, cfg);
  CHECK(sup_diff(v_adv, v_rob) <= 2e-9);
}
