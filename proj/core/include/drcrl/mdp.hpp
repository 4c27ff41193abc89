#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace drcrl {

// Thrown when a serialized document cannot be parsed into an MDP.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a structurally well-formed document violates model invariants.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what, std::vector<std::string> violations = {})
      : std::runtime_error(what), violations(std::move(violations)) {}
  std::vector<std::string> violations;
};

// Thrown when an iterative solver exhausts its iteration budget.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

using ValueFunction = std::vector<double>;

// Tabular constrained MDP. Tensors are stored flat and row-major:
//   kernel[(s * A + a) * S + s2] = P(s2 | s, a)
//   reward[s * A + a], constraints[i][s * A + a]
struct FiniteCMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> nominal_kernel;          // S * A * S
  std::vector<double> reward;                  // S * A
  std::vector<std::vector<double>> constraints; // m matrices of S * A
  std::vector<double> thresholds;              // length m
  double discount = 0.0;
  std::vector<double> initial_dist;            // length S
  int fail_state = -1;                         // -1 means unset

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  bool has_fail_state() const { return fail_state >= 0; }

  double kernel_at(int s, int a, int s2) const {
    return nominal_kernel[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  const double* kernel_row(int s, int a) const {
    return nominal_kernel.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states;
  }
  double reward_at(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }

  // Data-derived bounds (the model declares no explicit R-bar / G-bar).
  double max_reward() const;
  double max_constraint() const;
};

// R-contamination uncertainty description: every row of the deployed kernel is
// (1 - beta) * nominal + beta * q for an arbitrary distribution q.
struct ContaminationSet {
  double beta = 0.0;
};

struct DeterministicPolicy {
  std::vector<int> action_of; // length S, entries in [0, A)

  friend bool operator==(const DeterministicPolicy& a, const DeterministicPolicy& b) {
    return a.action_of == b.action_of;
  }
  friend auto operator<=>(const DeterministicPolicy& a, const DeterministicPolicy& b) {
    return a.action_of <=> b.action_of;
  }
};

// Weighted finite mixture of deterministic policies. Construction through
// make_mixed merges duplicate policies by adding their weights.
struct MixedPolicy {
  struct Atom {
    double weight = 0.0;
    DeterministicPolicy policy;
  };
  std::vector<Atom> atoms;
};

MixedPolicy make_mixed(const std::vector<MixedPolicy::Atom>& atoms);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Reports every violated model invariant; never throws on finite input.
ValidationReport validate(const FiniteCMDP& mdp);

// Parses the JSON MDP document format. Unknown fields are rejected.
// Throws ParseError on malformed documents and ValidationError when the
// parsed MDP fails validate().
FiniteCMDP load_mdp(const std::string& text);

// Inverse of load_mdp; round-trips all finite binary64 values bit-exactly.
std::string serialize(const FiniteCMDP& mdp);

// Weighted sum of per-policy value functions (no re-solve).
ValueFunction mixed_value(const MixedPolicy& mixed,
                          const std::map<DeterministicPolicy, ValueFunction>& per_policy_values);

// Inner product <v, mu>.
double scalar_value(const ValueFunction& v, const std::vector<double>& mu);

} // namespace drcrl
