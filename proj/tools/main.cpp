#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "drcrl/counterexample.hpp"
#include "drcrl/game.hpp"
#include "drcrl/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitMismatch = 4;

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write file: " + path);
  out << content;
}

struct RunConfig {
  std::string mdp_path;
  double beta = 0.0;
  double B = 30.0;
  double eta = 1.0;
  double omega = 0.01;
  int max_rounds = 200;
  double tol = 1e-10;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

RunConfig load_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw drcrl::ParseError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw drcrl::ParseError("config must be a JSON object");
  static const char* known[] = {"mdp_path", "beta", "B",   "eta", "omega",
                                "max_rounds", "tol", "output_dir", "seed"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw drcrl::ParseError("config: unknown field \"" + it.key() + "\"");
  }
  RunConfig cfg;
  if (!doc.contains("mdp_path") || !doc["mdp_path"].is_string())
    throw drcrl::ParseError("config: missing string field \"mdp_path\"");
  cfg.mdp_path = doc["mdp_path"].get<std::string>();
  // Relative MDP paths resolve against the config file's directory.
  fs::path mdp(cfg.mdp_path);
  if (mdp.is_relative()) cfg.mdp_path = (fs::path(path).parent_path() / mdp).string();
  if (doc.contains("beta")) cfg.beta = doc["beta"].get<double>();
  if (doc.contains("B")) cfg.B = doc["B"].get<double>();
  if (doc.contains("eta")) cfg.eta = doc["eta"].get<double>();
  if (doc.contains("omega")) cfg.omega = doc["omega"].get<double>();
  if (doc.contains("max_rounds")) cfg.max_rounds = doc["max_rounds"].get<int>();
  if (doc.contains("tol")) cfg.tol = doc["tol"].get<double>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  return cfg;
}

void check_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw drcrl::ValidationError("config: " + msg); };
  if (cfg.beta < 0.0 || cfg.beta >= 1.0) fail("beta must lie in [0, 1)");
  if (!(cfg.B > 0.0)) fail("B must be positive");
  if (!(cfg.eta > 0.0)) fail("eta must be positive");
  if (!(cfg.omega > 0.0)) fail("omega must be positive");
  if (cfg.max_rounds < 1) fail("max_rounds must be positive");
  if (!(cfg.tol > 0.0)) fail("tol must be positive");
}

json policy_json(const drcrl::SolveResult& result, const drcrl::FiniteCMDP& mdp,
                 const drcrl::ContaminationSet& set, const drcrl::RobustEvalConfig& cfg) {
  json atoms = json::array();
  for (const auto& atom : result.final_policy.atoms) {
    json entry;
    entry["weight"] = atom.weight;
    entry["actions"] = atom.policy.action_of;
    entry["value_r"] = drcrl::robust_policy_eval(atom.policy, mdp.reward, set, mdp, cfg);
    json vg = json::array();
    for (const auto& g : mdp.constraints)
      vg.push_back(drcrl::robust_policy_eval(atom.policy, g, set, mdp, cfg));
    entry["value_g"] = std::move(vg);
    atoms.push_back(std::move(entry));
  }
  json doc;
  doc["atoms"] = std::move(atoms);
  doc["beta"] = set.beta;
  doc["certified_gap"] = result.certified_gap;
  doc["objective"] = result.objective;
  doc["constraint_values"] = result.constraint_values;
  doc["lambda_avg"] = result.final_lambda_avg;
  return doc;
}

drcrl::MixedPolicy load_policy(const std::string& path) {
  json doc = json::parse(read_file(path));
  std::vector<drcrl::MixedPolicy::Atom> atoms;
  for (const json& entry : doc.at("atoms")) {
    drcrl::MixedPolicy::Atom atom;
    atom.weight = entry.at("weight").get<double>();
    atom.policy.action_of = entry.at("actions").get<std::vector<int>>();
    atoms.push_back(std::move(atom));
  }
  return drcrl::make_mixed(atoms);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

int cmd_solve(const RunConfig& cfg) {
  check_config(cfg);
  drcrl::FiniteCMDP mdp = drcrl::load_mdp(read_file(cfg.mdp_path));
  drcrl::ContaminationSet set{cfg.beta};
  drcrl::GameParams params{cfg.B, cfg.eta, cfg.omega, cfg.max_rounds};
  drcrl::RobustEvalConfig eval_cfg{cfg.tol, 1000000};
  drcrl::SolveResult result = drcrl::solve(mdp, set, params, eval_cfg);

  fs::create_directories(cfg.output_dir);
  write_file((fs::path(cfg.output_dir) / "trace.csv").string(), drcrl::trace_csv(result));
  write_file((fs::path(cfg.output_dir) / "policy.json").string(),
             policy_json(result, mdp, set, eval_cfg).dump(2) + "\n");

  std::printf("rounds=%zu gap=%.17g objective=%.17g\n", result.rounds.size(),
              result.certified_gap, result.objective);
  return result.terminated == drcrl::Termination::gap_below_omega ? kExitOk : kExitBudget;
}

int cmd_counterexample(double grid_step) {
  drcrl::ExampleValues vals = drcrl::example_robust_values();
  std::printf("value functions (s0, s1):\n");
  std::printf("  V_r policy1 = [%.17g, %.17g]\n", vals.v1_r[0], vals.v1_r[1]);
  std::printf("  V_g policy1 = [%.17g, %.17g]\n", vals.v1_g[0], vals.v1_g[1]);
  std::printf("  V_r policy2 = [%.17g, %.17g]\n", vals.v2_r[0], vals.v2_r[1]);
  std::printf("  V_g policy2 = [%.17g, %.17g]\n", vals.v2_g[0], vals.v2_g[1]);

  std::printf("\nlambda, v1(s0), v2(s0), |diff(s0)|, sup_norm, violated\n");
  for (double lambda = 0.0; lambda <= 5.0 + 1e-12; lambda += 0.25) {
    auto [violated, w] = drcrl::contradiction_holds(lambda);
    std::printf("%.2f, %.6f, %.6f, %.6f, %.6f, %s\n", lambda, w.v1_s0, w.v2_s0, w.diff_s0,
                w.sup_norm, violated ? "yes" : "no");
  }

  auto [lo, hi] = drcrl::violation_interval(grid_step);
  std::printf("\nviolation interval: [%.17g, %.17g]\n", lo, hi);

  const double expected_v2r0 = 6840.0 / 181.0;
  bool values_ok = std::abs(vals.v1_r[0] - 20.0) <= 1e-8 && std::abs(vals.v1_r[1] - 20.0) <= 1e-8 &&
                   std::abs(vals.v1_g[0] - 1.0) <= 1e-8 && std::abs(vals.v1_g[1] - 0.0) <= 1e-8 &&
                   std::abs(vals.v2_r[0] - expected_v2r0) <= 1e-8 &&
                   std::abs(vals.v2_r[1] - 40.0) <= 1e-8 &&
                   std::abs(vals.v2_g[0] - 20.0) <= 1e-8 && std::abs(vals.v2_g[1] - 20.0) <= 1e-8;
  bool interval_ok = std::abs(lo - 0.969) <= 2.0 * grid_step && std::abs(hi - 2.209) <= 2.0 * grid_step;
  if (!values_ok || !interval_ok) {
    std::fprintf(stderr, "verification mismatch (values_ok=%d interval_ok=%d)\n", values_ok,
                 interval_ok);
    return kExitMismatch;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& betas_text,
              const std::string& magnitudes_text) {
  check_config(cfg);
  std::vector<double> betas = parse_list(betas_text);
  std::vector<double> magnitudes = parse_list(magnitudes_text);
  if (betas.empty()) throw drcrl::ValidationError("sweep: the betas list must not be empty");
  if (magnitudes.empty())
    throw drcrl::ValidationError("sweep: the magnitudes list must not be empty");
  drcrl::FiniteCMDP mdp = drcrl::load_mdp(read_file(cfg.mdp_path));
  drcrl::GameParams params{cfg.B, cfg.eta, cfg.omega, cfg.max_rounds};
  drcrl::RobustEvalConfig eval_cfg{cfg.tol, 1000000};
  auto rows = drcrl::beta_sweep(mdp, betas, magnitudes, params, eval_cfg);
  fs::create_directories(cfg.output_dir);
  write_file((fs::path(cfg.output_dir) / "sweep.csv").string(),
             drcrl::sweep_csv(rows, mdp.num_constraints()));
  std::printf("wrote %zu sweep rows\n", rows.size());
  return kExitOk;
}

int cmd_eval(const std::string& policy_path, const std::string& mdp_path,
             const std::string& shift_name, double magnitude, std::uint64_t seed,
             const std::string& kernel_path) {
  drcrl::FiniteCMDP mdp = drcrl::load_mdp(read_file(mdp_path));
  drcrl::MixedPolicy policy = load_policy(policy_path);
  drcrl::ShiftSpec spec;
  spec.magnitude = magnitude;
  spec.seed = seed;
  if (shift_name == "worst") {
    spec.kind = drcrl::ShiftKind::worst_case;
  } else if (shift_name == "random") {
    spec.kind = drcrl::ShiftKind::random_contamination;
  } else if (shift_name == "file") {
    spec.kind = drcrl::ShiftKind::explicit_kernel;
    if (kernel_path.empty())
      throw drcrl::ValidationError("eval: --kernel is required with --shift file");
    json doc = json::parse(read_file(kernel_path));
    for (const auto& block : doc)
      for (const auto& row : block)
        for (const auto& x : row) spec.kernel.push_back(x.get<double>());
  } else {
    throw drcrl::ValidationError("eval: --shift must be one of worst|random|file");
  }
  drcrl::ShiftEvaluation out = drcrl::evaluate_under_shift(policy, mdp, spec, mdp.discount);
  std::printf("objective=%.17g\n", out.objective);
  for (std::size_t i = 0; i < out.constraints.size(); ++i)
    std::printf("g_%zu=%.17g satisfied_%zu=%d\n", i, out.constraints[i], i,
                static_cast<int>(out.satisfied[i]));
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular solver for distributionally robust constrained RL"};
  app.require_subcommand(1);

  auto* solve_cmd = app.add_subcommand("solve", "Run the primal-dual game on an instance");
  std::string config_path;
  solve_cmd->add_option("--config", config_path, "Run configuration file")->required();
  double opt_beta = -1.0, opt_bound = -1.0, opt_eta = -1.0, opt_omega = -1.0;
  int opt_max_rounds = -1;
  std::string opt_out;
  solve_cmd->add_option("--beta", opt_beta, "Override robustness level");
  solve_cmd->add_option("--bound", opt_bound, "Override dual l1 bound B");
  solve_cmd->add_option("--eta", opt_eta, "Override base learning rate");
  solve_cmd->add_option("--omega", opt_omega, "Override duality-gap threshold");
  solve_cmd->add_option("--max-rounds", opt_max_rounds, "Override round budget");
  solve_cmd->add_option("--out", opt_out, "Override output directory");

  auto* ce_cmd = app.add_subcommand("counterexample", "Verify the impossibility construction");
  double grid_step = 0.001;
  ce_cmd->add_option("--grid-step", grid_step, "Multiplier scan resolution");

  auto* sweep_cmd = app.add_subcommand("sweep", "Robustness sweep over training betas");
  std::string sweep_config, betas_text, magnitudes_text;
  sweep_cmd->add_option("--config", sweep_config, "Run configuration file")->required();
  sweep_cmd->add_option("--betas", betas_text, "Comma-separated training betas")->required();
  sweep_cmd->add_option("--magnitudes", magnitudes_text, "Comma-separated shift magnitudes")
      ->required();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved policy under a shift");
  std::string policy_path, mdp_path, shift_name, kernel_path;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  eval_cmd->add_option("--policy", policy_path, "Policy document")->required();
  eval_cmd->add_option("--mdp", mdp_path, "MDP document")->required();
  eval_cmd->add_option("--shift", shift_name, "worst|random|file")->required();
  eval_cmd->add_option("--magnitude", magnitude, "Shift contamination level")->required();
  eval_cmd->add_option("--seed", seed, "Random shift seed");
  eval_cmd->add_option("--kernel", kernel_path, "Explicit kernel file (shift=file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) {
      RunConfig cfg = load_config(config_path);
      if (opt_beta >= 0.0) cfg.beta = opt_beta;
      if (opt_bound >= 0.0) cfg.B = opt_bound;
      if (opt_eta >= 0.0) cfg.eta = opt_eta;
      if (opt_omega >= 0.0) cfg.omega = opt_omega;
      if (opt_max_rounds >= 0) cfg.max_rounds = opt_max_rounds;
      if (!opt_out.empty()) cfg.output_dir = opt_out;
      return cmd_solve(cfg);
    }
    if (*ce_cmd) return cmd_counterexample(grid_step);
    if (*sweep_cmd) {
      RunConfig cfg = load_config(sweep_config);
      return cmd_sweep(cfg, betas_text, magnitudes_text);
    }
    if (*eval_cmd)
      return cmd_eval(policy_path, mdp_path, shift_name, magnitude, seed, kernel_path);
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const drcrl::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const drcrl::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const drcrl::ConvergenceError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitBudget;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "document error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
