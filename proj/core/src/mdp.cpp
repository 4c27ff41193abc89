#include "drcrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace drcrl {

using nlohmann::json;

double FiniteCMDP::max_reward() const {
  double m = 0.0;
  for (double x : reward) m = std::max(m, x);
  return m;
}

double FiniteCMDP::max_constraint() const {
  double m = 0.0;
  for (const auto& g : constraints)
    for (double x : g) m = std::max(m, x);
  return m;
}

MixedPolicy make_mixed(const std::vector<MixedPolicy::Atom>& atoms) {
  std::map<DeterministicPolicy, double> merged;
  for (const auto& atom : atoms) merged[atom.policy] += atom.weight;
  MixedPolicy out;
  for (auto& [policy, weight] : merged) out.atoms.push_back({weight, policy});
  return out;
}

namespace {

std::string loc(int s, int a) {
  return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

} // namespace

ValidationReport validate(const FiniteCMDP& mdp) {
  ValidationReport report;
  auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

  if (mdp.n_states <= 0) add("n_states must be positive");
  if (mdp.n_actions <= 0) add("n_actions must be positive");
  if (!(mdp.discount >= 0.0 && mdp.discount < 1.0)) add("discount must lie in [0, 1)");
  if (!report.ok()) return report;

  const int S = mdp.n_states, A = mdp.n_actions, m = mdp.num_constraints();
  const std::size_t sa = static_cast<std::size_t>(S) * A;

  if (mdp.nominal_kernel.size() != sa * S) {
    add("kernel must have shape S x A x S");
    return report;
  }
  if (mdp.reward.size() != sa) {
    add("reward must have shape S x A");
    return report;
  }
  for (const auto& g : mdp.constraints)
    if (g.size() != sa) {
      add("every constraint matrix must have shape S x A");
      return report;
    }
  if (static_cast<int>(mdp.thresholds.size()) != m)
    add("thresholds length must equal the number of constraint matrices");
  if (mdp.initial_dist.size() != static_cast<std::size_t>(S)) {
    add("initial_dist length must equal n_states");
    return report;
  }

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        double p = mdp.kernel_at(s, a, s2);
        if (!std::isfinite(p) || p < 0.0) add("kernel entry negative or non-finite at " + loc(s, a));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        add("kernel row sum " + std::to_string(sum) + " at " + loc(s, a));
      double r = mdp.reward_at(s, a);
      if (!std::isfinite(r) || r < 0.0) add("reward negative or non-finite at " + loc(s, a));
      for (int i = 0; i < m; ++i) {
        double g = mdp.constraints[i][static_cast<std::size_t>(s) * A + a];
        if (!std::isfinite(g) || g < 0.0)
          add("constraint " + std::to_string(i) + " negative or non-finite at " + loc(s, a));
      }
    }
  }

  double mass = 0.0;
  for (double p : mdp.initial_dist) {
    if (!std::isfinite(p) || p < 0.0) add("initial_dist entry negative or non-finite");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) add("initial_dist sums to " + std::to_string(mass));

  for (double t : mdp.thresholds)
    if (!std::isfinite(t)) add("threshold non-finite");

  if (mdp.fail_state >= 0) {
    const int sf = mdp.fail_state;
    if (sf >= S) {
      add("fail_state index out of range");
    } else {
      for (int a = 0; a < A; ++a) {
        if (mdp.reward_at(sf, a) != 0.0)
          add("fail-state reward must be 0 at " + loc(sf, a));
        for (int i = 0; i < m; ++i)
          if (mdp.constraints[i][static_cast<std::size_t>(sf) * A + a] != 0.0)
            add("fail-state constraint " + std::to_string(i) + " must be 0 at " + loc(sf, a));
        if (std::abs(mdp.kernel_at(sf, a, sf) - 1.0) > 1e-12)
          add("fail-state must be absorbing at " + loc(sf, a));
      }
    }
  }
  return report;
}

namespace {

const json& require_field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("missing field \"") + name + "\"");
  return *it;
}

std::vector<double> parse_matrix(const json& j, std::size_t rows, std::size_t cols,
                                 const std::string& path) {
  if (!j.is_array() || j.size() != rows)
    throw ParseError(path + ": expected array of length " + std::to_string(rows));
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw ParseError(path + "[" + std::to_string(r) + "]: expected array of length " +
                       std::to_string(cols));
    for (const json& x : row) {
      if (!x.is_number()) throw ParseError(path + ": non-numeric entry");
      out.push_back(x.get<double>());
    }
  }
  return out;
}

} // namespace

FiniteCMDP load_mdp(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("top-level document must be an object");

  static const char* known[] = {"n_states", "n_actions", "discount",  "kernel",
                                "reward",   "constraints", "thresholds", "initial_dist",
                                "fail_state"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError("unknown field \"" + it.key() + "\"");
  }

  FiniteCMDP mdp;
  const json& jS = require_field(doc, "n_states");
  const json& jA = require_field(doc, "n_actions");
  if (!jS.is_number_integer() || !jA.is_number_integer())
    throw ParseError("n_states and n_actions must be integers");
  mdp.n_states = jS.get<int>();
  mdp.n_actions = jA.get<int>();
  if (mdp.n_states <= 0 || mdp.n_actions <= 0)
    throw ParseError("n_states and n_actions must be positive");

  const json& jgamma = require_field(doc, "discount");
  if (!jgamma.is_number()) throw ParseError("discount must be a number");
  mdp.discount = jgamma.get<double>();

  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  const json& jker = require_field(doc, "kernel");
  if (!jker.is_array() || jker.size() != S) throw ParseError("kernel: expected S outer entries");
  mdp.nominal_kernel.reserve(S * A * S);
  for (std::size_t s = 0; s < S; ++s) {
    auto block = parse_matrix(jker[s], A, S, "kernel[" + std::to_string(s) + "]");
    mdp.nominal_kernel.insert(mdp.nominal_kernel.end(), block.begin(), block.end());
  }
  mdp.reward = parse_matrix(require_field(doc, "reward"), S, A, "reward");

  const json& jcons = require_field(doc, "constraints");
  if (!jcons.is_array()) throw ParseError("constraints: expected array");
  for (std::size_t i = 0; i < jcons.size(); ++i)
    mdp.constraints.push_back(parse_matrix(jcons[i], S, A, "constraints[" + std::to_string(i) + "]"));

  const json& jtau = require_field(doc, "thresholds");
  if (!jtau.is_array()) throw ParseError("thresholds: expected array");
  for (const json& x : jtau) {
    if (!x.is_number()) throw ParseError("thresholds: non-numeric entry");
    mdp.thresholds.push_back(x.get<double>());
  }

  const json& jmu = require_field(doc, "initial_dist");
  if (!jmu.is_array() || jmu.size() != S) throw ParseError("initial_dist: expected length S");
  for (const json& x : jmu) {
    if (!x.is_number()) throw ParseError("initial_dist: non-numeric entry");
    mdp.initial_dist.push_back(x.get<double>());
  }

  const json& jfail = require_field(doc, "fail_state");
  if (jfail.is_null()) {
    mdp.fail_state = -1;
  } else if (jfail.is_number_integer()) {
    mdp.fail_state = jfail.get<int>();
    if (mdp.fail_state < 0 || mdp.fail_state >= mdp.n_states)
      throw ParseError("fail_state index out of range");
  } else {
    throw ParseError("fail_state must be an integer or null");
  }

  ValidationReport report = validate(mdp);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "invalid MDP:";
    for (const auto& v : report.violations) msg << "\n  - " << v;
    throw ValidationError(msg.str(), report.violations);
  }
  return mdp;
}

std::string serialize(const FiniteCMDP& mdp) {
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  json jker = json::array();
  for (std::size_t s = 0; s < S; ++s) {
    json block = json::array();
    for (std::size_t a = 0; a < A; ++a) {
      json row = json::array();
      for (std::size_t s2 = 0; s2 < S; ++s2) row.push_back(mdp.nominal_kernel[(s * A + a) * S + s2]);
      block.push_back(std::move(row));
    }
    jker.push_back(std::move(block));
  }
  auto matrix = [&](const std::vector<double>& flat) {
    json rows = json::array();
    for (std::size_t s = 0; s < S; ++s) {
      json row = json::array();
      for (std::size_t a = 0; a < A; ++a) row.push_back(flat[s * A + a]);
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json jcons = json::array();
  for (const auto& g : mdp.constraints) jcons.push_back(matrix(g));

  json doc;
  doc["n_states"] = mdp.n_states;
  doc["n_actions"] = mdp.n_actions;
  doc["discount"] = mdp.discount;
  doc["kernel"] = std::move(jker);
  doc["reward"] = matrix(mdp.reward);
  doc["constraints"] = std::move(jcons);
  doc["thresholds"] = mdp.thresholds;
  doc["initial_dist"] = mdp.initial_dist;
  if (mdp.fail_state >= 0)
    doc["fail_state"] = mdp.fail_state;
  else
    doc["fail_state"] = nullptr;
  return doc.dump(2);
}

ValueFunction mixed_value(const MixedPolicy& mixed,
                          const std::map<DeterministicPolicy, ValueFunction>& per_policy_values) {
  if (mixed.atoms.empty()) throw std::invalid_argument("mixed_value: empty mixture");
  ValueFunction out;
  for (const auto& atom : mixed.atoms) {
    auto it = per_policy_values.find(atom.policy);
    if (it == per_policy_values.end())
      throw std::invalid_argument("mixed_value: missing value function for an atom policy");
    if (out.empty()) out.assign(it->second.size(), 0.0);
    if (it->second.size() != out.size())
      throw std::invalid_argument("mixed_value: inconsistent value lengths");
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += atom.weight * it->second[s];
  }
  return out;
}

double scalar_value(const ValueFunction& v, const std::vector<double>& mu) {
  if (v.size() != mu.size()) throw std::invalid_argument("scalar_value: length mismatch");
  double acc = 0.0;
  for (std::size_t s = 0; s < v.size(); ++s) acc += v[s] * mu[s];
  return acc;
}

} // namespace drcrl
