#include "drcrl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "drcrl/robust_dp.hpp"

namespace drcrl {

std::vector<double> sample_contamination_kernel(const FiniteCMDP& mdp, std::uint64_t seed) {
  const int S = mdp.n_states, A = mdp.n_actions;
  std::mt19937_64 gen(seed);
  auto uniform = [&gen]() {
    return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0); // [0, 1)
  };
  std::vector<double> kernel(static_cast<std::size_t>(S) * A * S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double* row = kernel.data() + (static_cast<std::size_t>(s) * A + a) * S;
      double total = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        row[s2] = -std::log1p(-uniform()); // exponential spacing
        total += row[s2];
      }
      for (int s2 = 0; s2 < S; ++s2) row[s2] /= total;
    }
  }
  return kernel;
}

namespace {

std::vector<double> mix_kernels(const FiniteCMDP& mdp, const std::vector<double>& q,
                                double magnitude) {
  std::vector<double> out(mdp.nominal_kernel.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - magnitude) * mdp.nominal_kernel[i] + magnitude * q[i];
  return out;
}

} // namespace

ShiftEvaluation evaluate_under_shift(const MixedPolicy& policy, const FiniteCMDP& mdp,
                                     const ShiftSpec& shift, double gamma_eval,
                                     const RobustEvalConfig& cfg) {
  if (shift.magnitude < 0.0 || shift.magnitude > 1.0)
    throw std::invalid_argument("evaluate_under_shift: magnitude must lie in [0, 1]");
  const int m = mdp.num_constraints();
  std::vector<const std::vector<double>*> quantities;
  quantities.push_back(&mdp.reward);
  for (int i = 0; i < m; ++i) quantities.push_back(&mdp.constraints[i]);

  std::vector<double> fixed_kernel;
  if (shift.kind == ShiftKind::random_contamination) {
    fixed_kernel = mix_kernels(mdp, sample_contamination_kernel(mdp, shift.seed), shift.magnitude);
  } else if (shift.kind == ShiftKind::explicit_kernel) {
    if (shift.kernel.size() != mdp.nominal_kernel.size())
      throw std::invalid_argument("evaluate_under_shift: explicit kernel has wrong shape");
    fixed_kernel = shift.kernel;
  }

  std::vector<double> totals(quantities.size(), 0.0);
  for (const auto& atom : policy.atoms) {
    for (std::size_t q = 0; q < quantities.size(); ++q) {
      ValueFunction v;
      if (shift.kind == ShiftKind::worst_case) {
        // Per-quantity stationary adversary at the deployed contamination level.
        ContaminationSet deployed{shift.magnitude};
        ValueFunction v_rob = robust_policy_eval(atom.policy, *quantities[q], deployed, mdp, cfg);
        std::vector<double> adv = worst_case_kernel(atom.policy, v_rob, deployed, mdp);
        v = kernel_policy_eval(atom.policy, *quantities[q], adv, gamma_eval, mdp, cfg);
      } else {
        v = kernel_policy_eval(atom.policy, *quantities[q], fixed_kernel, gamma_eval, mdp, cfg);
      }
      totals[q] += atom.weight * scalar_value(v, mdp.initial_dist);
    }
  }

  ShiftEvaluation out;
  out.objective = totals[0];
  for (int i = 0; i < m; ++i) {
    out.constraints.push_back(totals[1 + i]);
    out.satisfied.push_back(totals[1 + i] >= mdp.thresholds[i]);
  }
  return out;
}

std::vector<SweepRow> beta_sweep(const FiniteCMDP& mdp, const std::vector<double>& betas,
                                 const std::vector<double>& shift_magnitudes,
                                 const GameParams& params, const RobustEvalConfig& cfg) {
  for (double beta : betas)
    if (beta < 0.0 || beta >= 1.0)
      throw std::invalid_argument("beta_sweep: every beta must lie in [0, 1)");
  std::vector<SweepRow> rows;
  for (double beta : betas) {
    SolveResult solved = solve(mdp, ContaminationSet{beta}, params, cfg);
    for (double magnitude : shift_magnitudes) {
      auto add_row = [&](ShiftKind kind, std::uint64_t seed) {
        ShiftSpec spec;
        spec.kind = kind;
        spec.magnitude = magnitude;
        spec.seed = seed;
        ShiftEvaluation eval =
            evaluate_under_shift(solved.final_policy, mdp, spec, mdp.discount, cfg);
        SweepRow row;
        row.beta = beta;
        row.shift_kind = kind;
        row.magnitude = magnitude;
        row.seed = seed;
        row.objective = eval.objective;
        row.constraints = eval.constraints;
        row.satisfied = eval.satisfied;
        rows.push_back(std::move(row));
      };
      add_row(ShiftKind::worst_case, 0);
      for (std::uint64_t seed = 1; seed <= 3; ++seed)
        add_row(ShiftKind::random_contamination, seed);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, int num_constraints) {
  std::string out = "beta,shift_kind,shift_magnitude,seed";
  char buf[64];
  out += ",objective";
  for (int i = 0; i < num_constraints; ++i) {
    std::snprintf(buf, sizeof buf, ",g_%d", i);
    out += buf;
  }
  for (int i = 0; i < num_constraints; ++i) {
    std::snprintf(buf, sizeof buf, ",satisfied_%d", i);
    out += buf;
  }
  out += "\n";
  auto kind_name = [](ShiftKind kind) {
    switch (kind) {
      case ShiftKind::worst_case: return "worst_case";
      case ShiftKind::random_contamination: return "random_contamination";
      default: return "explicit_kernel";
    }
  };
  for (const SweepRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.beta);
    out += buf;
    out += ",";
    out += kind_name(row.shift_kind);
    std::snprintf(buf, sizeof buf, ",%.17g,%llu", row.magnitude,
                  static_cast<unsigned long long>(row.seed));
    out += buf;
    std::snprintf(buf, sizeof buf, ",%.17g", row.objective);
    out += buf;
    for (double g : row.constraints) {
      std::snprintf(buf, sizeof buf, ",%.17g", g);
      out += buf;
    }
    for (bool s : row.satisfied) out += s ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

namespace {

// Solves a small dense linear system in place; returns false if singular.
bool solve_linear(std::vector<double> a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-12) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * b[c];
    b[r] = acc / a[r * n + r];
  }
  return true;
}

} // namespace

OracleSolution oracle_solve(const FiniteCMDP& mdp, const ContaminationSet& set,
                            const RobustEvalConfig& cfg) {
  const int S = mdp.n_states, A = mdp.n_actions, m = mdp.num_constraints();
  if (m > 2) throw std::invalid_argument("oracle_solve: at most 2 constraints supported");
  double count = std::pow(static_cast<double>(A), S);
  if (count > 4096.0) throw std::invalid_argument("oracle_solve: A^S exceeds the enumeration guard");
  const int n = static_cast<int>(count);

  std::vector<DeterministicPolicy> policies;
  std::vector<double> rv(n);
  std::vector<std::vector<double>> gv(n, std::vector<double>(m));
  for (int idx = 0; idx < n; ++idx) {
    DeterministicPolicy pi{std::vector<int>(S)};
    int rem = idx;
    for (int s = 0; s < S; ++s) {
      pi.action_of[s] = rem % A;
      rem /= A;
    }
    rv[idx] = scalar_value(robust_policy_eval(pi, mdp.reward, set, mdp, cfg), mdp.initial_dist);
    for (int i = 0; i < m; ++i)
      gv[idx][i] =
          scalar_value(robust_policy_eval(pi, mdp.constraints[i], set, mdp, cfg), mdp.initial_dist);
    policies.push_back(std::move(pi));
  }

  const double slack = 1e-9;
  OracleSolution best;
  best.optimum = -std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<int>& support, const std::vector<double>& weights) {
    double obj = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) obj += weights[k] * rv[support[k]];
    for (int i = 0; i < m; ++i) {
      double g = 0.0;
      for (std::size_t k = 0; k < support.size(); ++k) g += weights[k] * gv[support[k]][i];
      if (g < mdp.thresholds[i] - slack) return;
    }
    if (obj > best.optimum) {
      best.optimum = obj;
      best.feasible = true;
      std::vector<MixedPolicy::Atom> atoms;
      for (std::size_t k = 0; k < support.size(); ++k)
        if (weights[k] > 0.0) atoms.push_back({weights[k], policies[support[k]]});
      best.support = make_mixed(atoms).atoms;
    }
  };

  // Vertices with no tight constraint: single policies.
  for (int i = 0; i < n; ++i) consider({i}, {1.0});

  // Vertices with one tight constraint: two-policy mixtures.
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d = gv[i][c] - gv[j][c];
        if (std::abs(d) < 1e-13) continue;
        double a = (mdp.thresholds[c] - gv[j][c]) / d;
        if (a < 0.0 || a > 1.0) continue;
        consider({i, j}, {a, 1.0 - a});
      }
    }
  }

  // Vertices with two tight constraints: three-policy mixtures (m = 2 only).
  if (m == 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          std::vector<double> a = {gv[i][0], gv[j][0], gv[k][0],
                                   gv[i][1], gv[j][1], gv[k][1],
                                   1.0,      1.0,      1.0};
          std::vector<double> b = {mdp.thresholds[0], mdp.thresholds[1], 1.0};
          if (!solve_linear(std::move(a), b, 3)) continue;
          if (b[0] < -1e-12 || b[1] < -1e-12 || b[2] < -1e-12) continue;
          consider({i, j, k}, b);
        }
      }
    }
  }

  return best;
}

} // namespace drcrl
