#include <benchmark/benchmark.h>

#include <cstdint>

#include "drcrl/game.hpp"

namespace {

// Deterministic instance builder mirroring the shape used throughout the test
// suite: last state is an absorbing zero-reward fail state.
drcrl::FiniteCMDP make_instance(int S, int A, int m, std::uint64_t seed) {
  auto next = [&seed]() {
    std::uint64_t z = (seed += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  auto uniform = [&]() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); };
  drcrl::FiniteCMDP mdp;
  mdp.n_states = S;
  mdp.n_actions = A;
  mdp.discount = 0.95;
  mdp.fail_state = S - 1;
  mdp.nominal_kernel.assign(static_cast<std::size_t>(S) * A * S, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(S) * A, 0.0);
  mdp.constraints.assign(m, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
  mdp.thresholds.assign(m, 0.1);
  for (int s = 0; s < S - 1; ++s) {
    for (int a = 0; a < A; ++a) {
      double total = 0.0;
      std::vector<double> row(S);
      for (int s2 = 0; s2 < S; ++s2) total += (row[s2] = uniform() + 1e-3);
      for (int s2 = 0; s2 < S; ++s2)
        mdp.nominal_kernel[(static_cast<std::size_t>(s) * A + a) * S + s2] = row[s2] / total;
      mdp.reward[static_cast<std::size_t>(s) * A + a] = uniform();
      for (int i = 0; i < m; ++i)
        mdp.constraints[i][static_cast<std::size_t>(s) * A + a] = uniform();
    }
  }
  for (int a = 0; a < A; ++a)
    mdp.nominal_kernel[(static_cast<std::size_t>(S - 1) * A + a) * S + (S - 1)] = 1.0;
  mdp.initial_dist.assign(S, 0.0);
  for (int s = 0; s < S - 1; ++s) mdp.initial_dist[s] = 1.0 / (S - 1);
  return mdp;
}

void BM_robust_policy_eval(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  drcrl::FiniteCMDP mdp = make_instance(S, 3, 1, 1);
  drcrl::DeterministicPolicy pi{std::vector<int>(S, 0)};
  drcrl::ContaminationSet set{0.1};
  for (auto _ : state)
    benchmark::DoNotOptimize(drcrl::robust_policy_eval(pi, mdp.reward, set, mdp));
}
BENCHMARK(BM_robust_policy_eval)->Arg(5)->Arg(20)->Arg(50);

void BM_best_response(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  drcrl::FiniteCMDP mdp = make_instance(S, 3, 1, 2);
  drcrl::ContaminationSet set{0.1};
  for (auto _ : state)
    benchmark::DoNotOptimize(drcrl::best_response(mdp, set, {0.5}));
}
BENCHMARK(BM_best_response)->Arg(5)->Arg(20)->Arg(50);

void BM_solve(benchmark::State& state) {
  drcrl::FiniteCMDP mdp = make_instance(static_cast<int>(state.range(0)), 2, 1, 3);
  drcrl::ContaminationSet set{0.1};
  drcrl::GameParams params{20.0, 1.0, 0.01, 2000};
  for (auto _ : state) benchmark::DoNotOptimize(drcrl::solve(mdp, set, params));
}
BENCHMARK(BM_solve)->Arg(4)->Arg(8);

} // namespace

BENCHMARK_MAIN();
