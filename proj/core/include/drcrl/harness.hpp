#pragma once

#include "drcrl/game.hpp"

#include <cstdint>
#include <string>

namespace drcrl {

enum class ShiftKind { worst_case, random_contamination, explicit_kernel };

struct ShiftSpec {
  ShiftKind kind = ShiftKind::worst_case;
  double magnitude = 0.0;          // contamination level of the deployed shift
  std::uint64_t seed = 0;          // for random_contamination
  std::vector<double> kernel;      // S*A*S, for explicit_kernel
};

struct ShiftEvaluation {
  double objective = 0.0;
  std::vector<double> constraints;
  std::vector<bool> satisfied;
};

struct OracleSolution {
  double optimum = 0.0;
  std::vector<MixedPolicy::Atom> support;
  bool feasible = false;
};

struct SweepRow {
  double beta = 0.0;
  ShiftKind shift_kind = ShiftKind::worst_case;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  std::vector<double> constraints;
  std::vector<bool> satisfied;
};

// Deterministic row-stochastic matrix with rows drawn uniformly from the
// simplex (seeded exponential-spacing sampler); shape S*A rows of length S.
std::vector<double> sample_contamination_kernel(const FiniteCMDP& mdp, std::uint64_t seed);

// Scores a mixed policy in a shifted environment at the given evaluation
// discount. worst_case builds, per atom and per scored quantity, the
// stationary adversarial kernel at the shift magnitude; random_contamination
// mixes the nominal kernel with a seeded random kernel; explicit_kernel uses
// the provided tensor as-is.
ShiftEvaluation evaluate_under_shift(const MixedPolicy& policy, const FiniteCMDP& mdp,
                                     const ShiftSpec& shift, double gamma_eval,
                                     const RobustEvalConfig& cfg = {});

// For each training beta: solve the game, then score the resulting mixture
// across shift magnitudes (the worst-case family plus 3 random seeds per
// magnitude), holding params fixed across betas.
std::vector<SweepRow> beta_sweep(const FiniteCMDP& mdp, const std::vector<double>& betas,
                                 const std::vector<double>& shift_magnitudes,
                                 const GameParams& params, const RobustEvalConfig& cfg = {});

// CSV with columns beta, shift_kind, shift_magnitude, seed, objective,
// g_0..g_{m-1}, satisfied_0..satisfied_{m-1}.
std::string sweep_csv(const std::vector<SweepRow>& rows, int num_constraints);

// Exact optimum of the constrained problem over policy mixtures: enumerates
// all deterministic policies (guard: A^S <= 4096), evaluates robust values at
// tight tolerance, and solves the resulting linear program over mixture
// weights by active-constraint vertex enumeration (support size <= m+1).
OracleSolution oracle_solve(const FiniteCMDP& mdp, const ContaminationSet& set,
                            const RobustEvalConfig& cfg = {1e-12, 1000000});

} // namespace drcrl
