#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjtlt/artifact.hpp"
#include "hjtlt/ctrl_exists.hpp"
#include "hjtlt/errors.hpp"
#include "hjtlt/scenario.hpp"

using namespace hjtlt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kScenarioDir = HJTLT_SCENARIO_DIR;
const std::string kCli = HJTLT_CLI_PATH;

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hjtlt_scen_" + std::to_string(getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json base_doc() {
  return json::parse(slurp(kScenarioDir + "/integrator_goal.json"));
}

// what() of the ValidationError a document provokes, or a marker when none
std::string error_text(const json& doc) {
  try {
    parse_scenario_text(doc.dump());
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "(accepted)";
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path out_file = work_dir() / "cli_output.txt";
  const std::string cmd = kCli + " " + args + " > " + out_file.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  if (output) *output = slurp(out_file);
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("scenario validation errors name the offending JSON path") {
  json d;

  CHECK(starts_with(error_text(json::parse("[]")), "scenario:"));
  bool bad_json = false;
  try {
    parse_scenario_text("this is not json");
  } catch (const ValidationError& e) {
    bad_json = starts_with(e.what(), "scenario: invalid JSON");
  }
  CHECK(bad_json);

  d = base_doc();
  d.erase("model");
  CHECK(starts_with(error_text(d), "scenario.model"));

  d = base_doc();
  d["model"]["name"] = "warpdrive";
  CHECK(starts_with(error_text(d), "scenario.model"));

  d = base_doc();
  d["model"]["u_min"] = {-1.0, -1.0};
  CHECK(starts_with(error_text(d), "scenario.model"));

  d = base_doc();
  d["model"]["u_min"] = {2.0};
  CHECK(starts_with(error_text(d), "scenario.model"));

  d = base_doc();
  d["grid"].erase("counts");
  CHECK(starts_with(error_text(d), "scenario.grid.counts"));

  d = base_doc();
  d["grid"]["counts"] = {41.5};
  CHECK(starts_with(error_text(d), "scenario.grid.counts[0]"));

  d = base_doc();
  d["grid"]["lo"] = {-2.0, -2.0};
  CHECK(starts_with(error_text(d), "scenario.grid"));

  d = base_doc();
  d["horizon"] = -1.0;
  CHECK(starts_with(error_text(d), "scenario.horizon"));

  d = base_doc();
  d["horizon"] = "soon";
  CHECK(starts_with(error_text(d), "scenario.horizon"));

  d = base_doc();
  d["labeling"]["goal"].erase("hi");
  CHECK(starts_with(error_text(d), "scenario.labeling.goal"));

  d = base_doc();
  d["labeling"]["true"] = d["labeling"]["goal"];  // reserved word as a label
  CHECK(starts_with(error_text(d), "scenario.labeling.true"));

  d = base_doc();
  d["formula"] = 42;
  CHECK(starts_with(error_text(d), "scenario.formula"));

  d = base_doc();
  d["formula"] = "goal U";
  CHECK(starts_with(error_text(d), "scenario.formula"));

  d = base_doc();
  d["formula"] = "F other";
  const std::string missing_atom = error_text(d);
  CHECK(starts_with(missing_atom, "scenario.formula"));
  CHECK(missing_atom.find("other") != std::string::npos);

  d = base_doc();
  d["solver"]["cfl"] = 1.5;
  CHECK(starts_with(error_text(d), "scenario.solver.cfl"));

  d = base_doc();
  d["solver"]["kappa"] = -0.1;
  CHECK(starts_with(error_text(d), "scenario.solver.kappa"));

  d = base_doc();
  d["solver"]["direction"] = "Q";
  CHECK(starts_with(error_text(d), "scenario.solver.direction"));

  d = base_doc();
  d["simulation"]["z0"] = {0.1, 0.2};
  CHECK(starts_with(error_text(d), "scenario.simulation.z0"));

  d = base_doc();
  d["simulation"]["dt"] = -0.5;
  CHECK(starts_with(error_text(d), "scenario.simulation.dt"));

  d = base_doc();
  d["simulation"]["policy"] = {{"kind", "pid"}};
  CHECK(starts_with(error_text(d), "scenario.simulation.policy.kind"));

  d = base_doc();
  d["simulation"]["policy"] = {{"kind", "constant"}, {"u", {0.0, 0.0}}};
  CHECK(starts_with(error_text(d), "scenario.simulation.policy.u"));

  d = base_doc();
  d["events"] = {{"time", 1.0}};  // an object, not an array
  CHECK(starts_with(error_text(d), "scenario.events"));

  json ev = json::object();
  ev["remove_atoms"] = json::array({"goal"});
  d = base_doc();
  d["events"] = json::array({ev});  // missing time
  CHECK(starts_with(error_text(d), "scenario.events[0].time"));

  ev["time"] = -1.0;
  d = base_doc();
  d["events"] = json::array({ev});
  CHECK(starts_with(error_text(d), "scenario.events[0].time"));

  ev["time"] = 0.5;
  ev["remove_atoms"] = json::array({"ghost"});
  d = base_doc();
  d["events"] = json::array({ev});
  CHECK(starts_with(error_text(d), "scenario.events[0].remove_atoms[0]"));
}

TEST_CASE("scenario fields parse into the expected values and defaults") {
  Scenario sc = load_scenario(kScenarioDir + "/integrator_goal.json");
  CHECK(sc.model->name == "integrator1d");
  CHECK(sc.grid->dim() == 1);
  CHECK(sc.grid->counts() == std::vector<int>{401});
  CHECK(sc.horizon == 1.0);
  CHECK(sc.cfl == 0.5);
  CHECK(sc.kappa == 1.0);
  CHECK_FALSE(sc.direction_override.has_value());
  CHECK(sc.formula == parse_formula("F goal"));
  CHECK(sc.labeling.regions.count("goal") == 1);
  CHECK(sc.has_simulation);
  CHECK(sc.z0 == std::vector<double>{0.9});
  CHECK(sc.sim_dt == 0.0);  // null dt: use the tube slice spacing
  CHECK(sc.policy.kind == PolicySpec::Kind::Constant);
  CHECK(sc.policy.u == std::vector<double>{0.0});
  CHECK(sc.monitor_margin == 0.01);
  CHECK(sc.seed == 1);
  CHECK(sc.events.empty());

  SUBCASE("the canonical text is a serialization fixed point") {
    Scenario again = parse_scenario_text(sc.canonical_text);
    CHECK(again.canonical_text == sc.canonical_text);
  }

  SUBCASE("optional blocks default quietly") {
    json d = base_doc();
    d.erase("solver");
    d.erase("simulation");
    Scenario minimal = parse_scenario_text(d.dump());
    CHECK(minimal.cfl == 0.5);
    CHECK(minimal.kappa == 1.0);
    CHECK_FALSE(minimal.has_simulation);
    CHECK(minimal.events.empty());
    CHECK(minimal.seed == 0);
  }

  SUBCASE("a simulation block without a policy defaults to a clamped zero") {
    json d = base_doc();
    d["simulation"] = {{"z0", {0.9}}};
    Scenario s = parse_scenario_text(d.dump());
    CHECK(s.policy.kind == PolicySpec::Kind::Constant);
    CHECK(s.policy.u == std::vector<double>{0.0});
  }
}

TEST_CASE("policies are deterministic in their seed") {
  Scenario sc = load_scenario(kScenarioDir + "/integrator_goal.json");
  std::vector<double> z{0.0};

  SUBCASE("constant policies ignore state, time and seed") {
    NominalPolicy p = make_policy(sc, 123);
    CHECK(p(z, 0.0) == std::vector<double>{0.0});
    CHECK(p(z, 0.9) == std::vector<double>{0.0});
  }

  SUBCASE("random policies replay exactly under the same seed") {
    sc.policy.kind = PolicySpec::Kind::Random;
    NominalPolicy a = make_policy(sc, 42);
    NominalPolicy b = make_policy(sc, 42);
    NominalPolicy c = make_policy(sc, 43);
    bool all_same_as_other_seed = true;
    for (int i = 0; i < 8; ++i) {
      const auto ua = a(z, 0.0);
      const auto ub = b(z, 0.0);
      const auto uc = c(z, 0.0);
      CHECK(ua == ub);
      REQUIRE(ua.size() == 1);
      CHECK(ua[0] >= sc.model->u_min[0]);
      CHECK(ua[0] <= sc.model->u_max[0]);
      if (ua != uc) all_same_as_other_seed = false;
    }
    CHECK_FALSE(all_same_as_other_seed);
  }
}

TEST_CASE("artifacts round-trip the tree and rewrite bit-identically") {
  Scenario sc = load_scenario(kScenarioDir + "/integrator_goal.json");
  Tlt tree = build_tree(sc);
  CHECK(tree.horizon == sc.horizon);
  CHECK(tree.cfl == sc.cfl);
  CHECK(tree.kappa == sc.kappa);

  const fs::path a = work_dir() / "art_a";
  const fs::path b = work_dir() / "art_b";
  write_artifact(a.string(), sc, tree, 0.5);
  write_artifact(b.string(), sc, tree, 0.5);

  SUBCASE("two writes of the same build produce identical bytes") {
    std::vector<fs::path> rel;
    for (const auto& entry : fs::recursive_directory_iterator(a))
      if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), a));
    REQUIRE_FALSE(rel.empty());
    for (const auto& r : rel) CHECK_MESSAGE(slurp(a / r) == slurp(b / r), r.string());
  }

  SUBCASE("loading restores the scenario and every field bit-for-bit") {
    Artifact art = load_artifact(a.string());
    CHECK(art.scenario.canonical_text == sc.canonical_text);
    CHECK(art.tree.formula == tree.formula);
    CHECK(art.tree.horizon == tree.horizon);
    CHECK(*art.tree.grid == *tree.grid);
    CHECK(art.tree.model->name == tree.model->name);

    REQUIRE(art.tree.root->is_timed());
    const TimedValueField& got = *art.tree.root->timed_field;
    const TimedValueField& want = *tree.root->timed_field;
    REQUIRE(got.times() == want.times());
    for (std::size_t k = 0; k < want.slices().size(); ++k)
      CHECK(got.slices()[k].data() == want.slices()[k].data());

    REQUIRE(art.tree.root->op != nullptr);
    CHECK(art.tree.root->op->kind == tree.root->op->kind);
    CHECK(art.tree.root->op->children.size() == tree.root->op->children.size());
    CHECK(art.tree.root->direction == tree.root->direction);
    CHECK(art.tree.root->solve_steps == tree.root->solve_steps);
    const auto& leaf_got = *art.tree.root->op->children[1];
    const auto& leaf_want = *tree.root->op->children[1];
    CHECK(leaf_got.static_field->data() == leaf_want.static_field->data());
  }

  SUBCASE("reports are well-formed JSON with the expected shape") {
    Artifact art = load_artifact(a.string());
    json check = json::parse(check_report(art.tree));
    CHECK(check["nonEmpty"] == true);
    CHECK(check["verdict"] == "U");
    CHECK(check["gate"] == true);
    CHECK(check["nodes"].is_array());
    CHECK(check["nodes"].size() == 3);  // until node, 'true' leaf, goal leaf

    std::vector<double> z{0.9};
    json ctrl = json::parse(ctrl_report(least_restrictive_ctrl(art.tree, z, 0.0)));
    REQUIRE(ctrl["cells"].is_array());
    REQUIRE(ctrl["cells"].size() >= 1);
    for (const auto& cell : ctrl["cells"]) {
      REQUIRE(cell["a"].is_array());
      REQUIRE(cell["b"].is_array());
      CHECK(cell["a"].size() == cell["b"].size());
      for (const auto& row : cell["b"]) CHECK(row.size() == 1);
    }
  }
}

TEST_CASE("command line drives the full build-check-ctrl-simulate-export flow") {
  const fs::path art = work_dir() / "cli_art";
  const fs::path sim = work_dir() / "cli_sim";
  const fs::path exp = work_dir() / "cli_exp";

  REQUIRE(run_cli("build --scenario " + kScenarioDir + "/integrator_goal.json --out " +
                  art.string()) == 0);
  CHECK(fs::exists(art / "scenario.json"));
  CHECK(fs::exists(art / "tree.json"));
  CHECK(fs::exists(art / "build_report.json"));
  CHECK(fs::is_directory(art / "fields"));
  // the stored scenario is the canonical serialization of the input
  Scenario sc = load_scenario(kScenarioDir + "/integrator_goal.json");
  CHECK(slurp(art / "scenario.json") == sc.canonical_text);

  std::string out;
  CHECK(run_cli("check " + art.string(), &out) == 0);
  CHECK(out.find("\"verdict\"") != std::string::npos);
  CHECK(out.find("\"U\"") != std::string::npos);

  CHECK(run_cli("ctrl " + art.string() + " --state 0.9 --time 0", &out) == 0);
  CHECK(out.find("\"cells\"") != std::string::npos);

  // outside the certified set: runtime infeasibility
  CHECK(run_cli("ctrl " + art.string() + " --state 1.9 --time 0") == 4);
  // malformed state: validation
  CHECK(run_cli("ctrl " + art.string() + " --state zebra --time 0") == 2);
  // missing required option: command line validation
  CHECK(run_cli("ctrl " + art.string() + " --state 0.9") == 2);

  CHECK(run_cli("simulate " + art.string() + " --out " + sim.string()) == 0);
  const std::string header = slurp(sim / "trajectory.csv").substr(0, 8);
  CHECK(header == "t,x0,u0\n");
  json verdict = json::parse(slurp(sim / "verdict.json"));
  CHECK(verdict["satisfied"] == true);
  CHECK(verdict["solveInvocationsDuringRun"] == 0);
  CHECK(verdict["stoppedOnSatisfaction"] == true);
  CHECK(verdict["seed"] == 1);  // the scenario's own seed
  json verdict7;
  CHECK(run_cli("simulate " + art.string() + " --out " + sim.string() + " --seed 7") == 0);
  verdict7 = json::parse(slurp(sim / "verdict.json"));
  CHECK(verdict7["seed"] == 7);

  CHECK(run_cli("export " + art.string() + " --out " + exp.string() + " --time 0") == 0);
  json manifest = json::parse(slurp(exp / "manifest.json"));
  REQUIRE(manifest["files"].is_array());
  CHECK(manifest["files"].size() == 3);
  const std::string csv = slurp(exp / "node000.csv");
  CHECK(starts_with(csv, "x0,value\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);  // header + one per grid point

  CHECK(run_cli("export " + art.string() + " --out " + exp.string() + " --time 9") == 2);
  CHECK(run_cli("export " + art.string() + " --out " + exp.string() + " --fix 0=zebra") == 2);
  CHECK(run_cli("export " + art.string() + " --out " + exp.string() + " --fix 5=0") == 2);
}

TEST_CASE("command line surfaces gate refusals and bad inputs") {
  CHECK(run_cli("") == 2);                 // a subcommand is required
  CHECK(run_cli("warp 9") == 2);           // unknown subcommand
  CHECK(run_cli("build --scenario x") == 2);  // missing --out
  CHECK(run_cli("check /nonexistent_artifact_dir") == 2);

  // force every solve over-approximated: the tree loses its guarantee and
  // the gate refuses ctrl and simulate
  json d = base_doc();
  d["solver"]["direction"] = "O";
  const fs::path scen = work_dir() / "over.json";
  std::ofstream(scen) << d.dump(2);
  const fs::path art = work_dir() / "over_art";
  REQUIRE(run_cli("build --scenario " + scen.string() + " --out " + art.string()) == 0);
  std::string out;
  CHECK(run_cli("check " + art.string(), &out) == 3);
  CHECK(out.find("\"gate\": false") != std::string::npos);
  CHECK(run_cli("ctrl " + art.string() + " --state 0.9 --time 0", &out) == 3);
  CHECK(out.find("existence gate refused") != std::string::npos);
  CHECK(run_cli("simulate " + art.string() + " --out " + (work_dir() / "over_sim").string()) ==
        3);
}
