// Command line front end: build a task tree from a scenario file, check the
// existence gate, query admissible control sets, run closed-loop simulations,
// and export plot-ready CSV data.
//
// Exit codes: 0 success, 2 validation failure, 3 existence gate refusal,
// 4 runtime infeasibility, 5 monitor failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hjtlt/artifact.hpp"
#include "hjtlt/ctrl_exists.hpp"
#include "hjtlt/errors.hpp"
#include "hjtlt/hj_solver.hpp"
#include "hjtlt/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitGateRefusal = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitMonitorFailure = 5;

std::vector<double> parse_state(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string part = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw hjtlt::ValidationError("--state: '" + part + "' is not a number");
    }
    pos = comma + 1;
  }
  return out;
}

std::map<int, double> parse_fixes(const std::vector<std::string>& fixes) {
  std::map<int, double> out;
  for (const std::string& fix : fixes) {
    const std::size_t eq = fix.find('=');
    if (eq == std::string::npos)
      throw hjtlt::ValidationError("--fix expects dim=value, got '" + fix + "'");
    try {
      std::size_t used = 0;
      const int dim = std::stoi(fix.substr(0, eq), &used);
      if (used != eq) throw std::invalid_argument(fix);
      const std::string val = fix.substr(eq + 1);
      const double value = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(fix);
      out[dim] = value;
    } catch (const std::exception&) {
      throw hjtlt::ValidationError("--fix expects dim=value, got '" + fix + "'");
    }
  }
  return out;
}

int require_gate(const hjtlt::Tlt& tree) {
  if (hjtlt::ctrl_exists(tree)) return kExitOk;
  std::cerr << "existence gate refused: verdict "
            << hjtlt::to_string(hjtlt::ctrl_exists_verdict(*tree.root))
            << (hjtlt::root_non_empty(tree) ? "" : ", root set empty") << "\n";
  return kExitGateRefusal;
}

int run(int argc, char** argv) {
  CLI::App app{"Task-tree verification and least-restrictive control synthesis"};
  app.require_subcommand(1);

  std::string scenario_path, artifact_dir, out_dir, state_text;
  double time = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> fixes;

  CLI::App* build = app.add_subcommand("build", "Build a task tree from a scenario file");
  build->add_option("--scenario", scenario_path, "Scenario JSON path")->required();
  build->add_option("--out", out_dir, "Artifact directory to create")->required();

  CLI::App* check = app.add_subcommand("check", "Report the existence verdict of an artifact");
  check->add_option("artifact", artifact_dir, "Artifact directory")->required();

  CLI::App* ctrl = app.add_subcommand("ctrl", "Query the admissible control set");
  ctrl->add_option("artifact", artifact_dir, "Artifact directory")->required();
  ctrl->add_option("--state", state_text, "Comma-separated state, e.g. '0.1,0.2,0'")->required();
  ctrl->add_option("--time", time, "Query time in [0, horizon)")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Run the closed loop and monitor it");
  simulate->add_option("artifact", artifact_dir, "Artifact directory")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seed, "Policy seed (default: the scenario's)")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* export_cmd = app.add_subcommand("export", "Write node fields as CSV");
  export_cmd->add_option("artifact", artifact_dir, "Artifact directory")->required();
  export_cmd->add_option("--out", out_dir, "Output directory")->required();
  export_cmd->add_option("--time", time, "Query time (default 0)");
  export_cmd->add_option("--fix", fixes, "Pin a state dimension, dim=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (build->parsed()) {
    hjtlt::Scenario sc = hjtlt::load_scenario(scenario_path);
    const auto t0 = std::chrono::steady_clock::now();
    hjtlt::Tlt tree = hjtlt::build_tree(sc);
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    hjtlt::write_artifact(out_dir, sc, tree, seconds);
    std::cout << "{\"out\": \"" << out_dir << "\", \"totalSeconds\": " << seconds << "}\n";
    return kExitOk;
  }
  if (check->parsed()) {
    hjtlt::Artifact art = hjtlt::load_artifact(artifact_dir);
    std::cout << hjtlt::check_report(art.tree);
    return hjtlt::ctrl_exists(art.tree) ? kExitOk : kExitGateRefusal;
  }
  if (ctrl->parsed()) {
    hjtlt::Artifact art = hjtlt::load_artifact(artifact_dir);
    if (int rc = require_gate(art.tree)) return rc;
    const std::vector<double> z = parse_state(state_text);
    hjtlt::ControlSet cs = hjtlt::least_restrictive_ctrl(art.tree, z, time);
    std::cout << hjtlt::ctrl_report(cs);
    return kExitOk;
  }
  if (simulate->parsed()) {
    hjtlt::Artifact art = hjtlt::load_artifact(artifact_dir);
    if (int rc = require_gate(art.tree)) return rc;
    const std::uint64_t used_seed = seed_given ? seed : art.scenario.seed;
    hjtlt::MonitorVerdict v = hjtlt::cmd_simulate(art, out_dir, used_seed);
    std::cout << "{\"satisfied\": " << (v.satisfied ? "true" : "false") << "}\n";
    return v.satisfied ? kExitOk : kExitMonitorFailure;
  }
  if (export_cmd->parsed()) {
    hjtlt::Artifact art = hjtlt::load_artifact(artifact_dir);
    hjtlt::cmd_export(art, out_dir, time, parse_fixes(fixes));
    return kExitOk;
  }
  return kExitValidation;  // unreachable: a subcommand is required
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hjtlt::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const hjtlt::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
