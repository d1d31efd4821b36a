#include "hjtlt/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hjtlt/ctrl_exists.hpp"
#include "hjtlt/errors.hpp"
#include "hjtlt/hj_solver.hpp"

namespace hjtlt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void preorder(const SetNode& n, std::vector<const SetNode*>& out) {
  out.push_back(&n);
  if (n.op)
    for (const auto& c : n.op->children) preorder(*c, out);
}

std::string field_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "node%03zu.f64", id);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

OpKind op_from_string(const std::string& s) {
  if (s == "not") return OpKind::Not;
  if (s == "and") return OpKind::And;
  if (s == "or") return OpKind::Or;
  if (s == "until") return OpKind::Until;
  if (s == "always") return OpKind::Always;
  throw ValidationError("corrupt artifact: unknown operator '" + s + "'");
}

}  // namespace

void write_artifact(const std::string& dir, const Scenario& sc, const Tlt& t,
                    double total_seconds) {
  if (!t.root) throw ValidationError("write_artifact: tree is not constructed");
  fs::create_directories(fs::path(dir) / "fields");
  write_text(fs::path(dir) / "scenario.json", sc.canonical_text);

  std::vector<const SetNode*> nodes;
  preorder(*t.root, nodes);

  json tree;
  tree["formula"] = t.formula.to_string();
  tree["horizon"] = t.horizon;
  tree["cfl"] = t.cfl;
  tree["kappa"] = t.kappa;
  tree["nodes"] = json::array();

  json solves = json::array();
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const SetNode& n = *nodes[id];
    const std::string fname = field_name(id);
    const fs::path fpath = fs::path(dir) / "fields" / fname;
    if (n.static_field)
      write_field_binary(fpath.string(), *n.static_field);
    else
      write_field_binary(fpath.string(), *n.timed_field);

    json jn;
    jn["id"] = id;
    jn["formula"] = n.formula.to_string();
    jn["direction"] = to_string(n.direction);
    jn["field"] = "fields/" + fname;
    jn["timed"] = n.is_timed();
    if (n.op) {
      jn["op"] = to_string(n.op->kind);
      jn["opDirection"] = to_string(n.op->direction);
      // Children ids follow from preorder: each child subtree is contiguous.
      json kids = json::array();
      std::size_t next = id + 1;
      for (const auto& c : n.op->children) {
        kids.push_back(next);
        std::vector<const SetNode*> sub;
        preorder(*c, sub);
        next += sub.size();
      }
      jn["children"] = std::move(kids);
      if (n.op->kind == OpKind::Until || n.op->kind == OpKind::Always) {
        jn["solveSeconds"] = n.solve_seconds;
        jn["solveSteps"] = n.solve_steps;
        json js;
        js["node"] = id;
        js["seconds"] = n.solve_seconds;
        js["steps"] = n.solve_steps;
        solves.push_back(std::move(js));
      }
    } else {
      jn["op"] = nullptr;
      jn["children"] = json::array();
    }
    tree["nodes"].push_back(std::move(jn));
  }
  write_text(fs::path(dir) / "tree.json", tree.dump(2) + "\n");

  json report;
  report["totalSeconds"] = total_seconds;
  report["solves"] = std::move(solves);
  report["solveInvocations"] = std::count_if(nodes.begin(), nodes.end(), [](const SetNode* n) {
    return n->op && (n->op->kind == OpKind::Until || n->op->kind == OpKind::Always);
  });
  write_text(fs::path(dir) / "build_report.json", report.dump(2) + "\n");
}

namespace {

std::unique_ptr<SetNode> load_node(const json& nodes, std::size_t id, const fs::path& dir,
                                   const Scenario& sc) {
  if (id >= nodes.size()) throw ValidationError("corrupt artifact: node id out of range");
  const json& jn = nodes[id];
  auto n = std::make_unique<SetNode>();
  n->formula = parse_formula(jn.at("formula").get<std::string>());
  n->direction = direction_from_string(jn.at("direction").get<std::string>());

  const std::string rel = jn.at("field").get<std::string>();
  TimedValueField tv = read_field_binary((dir / rel).string());
  if (tv.grid() != *sc.grid)
    throw ValidationError("corrupt artifact: field grid differs from the scenario grid");
  // Re-anchor the slices on the scenario's shared grid object.
  std::vector<ValueField> slices;
  slices.reserve(tv.slices().size());
  for (const auto& s : tv.slices()) slices.emplace_back(sc.grid, s.data());
  if (slices.size() == 1) {
    n->static_field = std::make_shared<ValueField>(std::move(slices.front()));
  } else {
    n->timed_field = std::make_shared<TimedValueField>(tv.times(), std::move(slices));
  }

  if (!jn.at("op").is_null()) {
    auto op = std::make_unique<OpNode>();
    const OpKind kind = op_from_string(jn.at("op").get<std::string>());
    op->kind = kind;
    op->direction = direction_from_string(jn.at("opDirection").get<std::string>());
    for (const auto& kid : jn.at("children"))
      op->children.push_back(load_node(nodes, kid.get<std::size_t>(), dir, sc));
    n->op = std::move(op);
    if (kind == OpKind::Until || kind == OpKind::Always) {
      n->solve_seconds = jn.value("solveSeconds", 0.0);
      n->solve_steps = jn.value("solveSteps", 0);
    }
  }
  const bool timed_flag = jn.at("timed").get<bool>();
  if (timed_flag != n->is_timed())
    throw ValidationError("corrupt artifact: timed flag disagrees with the field file");
  return n;
}

}  // namespace

Artifact load_artifact(const std::string& dir) {
  const fs::path root(dir);
  Artifact art{parse_scenario_text(read_text(root / "scenario.json")), Tlt{}};
  json tree;
  try {
    tree = json::parse(read_text(root / "tree.json"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("corrupt artifact: tree.json: ") + e.what());
  }
  try {
    art.tree.formula = parse_formula(tree.at("formula").get<std::string>());
    art.tree.horizon = tree.at("horizon").get<double>();
    art.tree.cfl = tree.at("cfl").get<double>();
    art.tree.kappa = tree.at("kappa").get<double>();
    art.tree.root = load_node(tree.at("nodes"), 0, root, art.scenario);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("corrupt artifact: tree.json: ") + e.what());
  }
  art.tree.grid = art.scenario.grid;
  art.tree.model = art.scenario.model;
  if (art.tree.formula != art.tree.root->formula)
    throw ValidationError("corrupt artifact: root formula disagrees with tree formula");
  return art;
}

std::string check_report(const Tlt& t) {
  if (!t.root) throw ValidationError("check_report: tree is not constructed");
  const ApproxDirection v = ctrl_exists_verdict(*t.root);
  json j;
  j["nonEmpty"] = root_non_empty(t);
  j["verdict"] = to_string(v);
  j["gate"] = ctrl_exists(t);
  j["formula"] = t.formula.to_string();
  j["nodes"] = json::array();
  std::vector<const SetNode*> nodes;
  preorder(*t.root, nodes);
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    json jn;
    jn["id"] = id;
    jn["formula"] = nodes[id]->formula.to_string();
    jn["direction"] = to_string(nodes[id]->direction);
    jn["op"] = nodes[id]->op ? json(to_string(nodes[id]->op->kind)) : json(nullptr);
    j["nodes"].push_back(std::move(jn));
  }
  return j.dump(2) + "\n";
}

std::string ctrl_report(const ControlSet& cs) {
  json j;
  j["cells"] = json::array();
  for (const auto& cell : cs.cells) {
    json jc;
    jc["a"] = json::array();
    jc["b"] = json::array();
    for (const auto& h : cell.half_spaces) {
      jc["a"].push_back(h.a);
      jc["b"].push_back(h.b);
    }
    j["cells"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

namespace {

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, int nx, int nu) {
  std::ostringstream out;
  out.precision(17);
  out << "t";
  for (int d = 0; d < nx; ++d) out << ",x" << d;
  for (int j = 0; j < nu; ++j) out << ",u" << j;
  out << "\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << traj.times[i];
    for (int d = 0; d < nx; ++d) out << "," << traj.states[i][d];
    if (i < traj.controls.size())
      for (int j = 0; j < nu; ++j) out << "," << traj.controls[i][j];
    else
      for (int j = 0; j < nu; ++j) out << "," << "nan";
    out << "\n";
  }
  write_text(path, out.str());
}

}  // namespace

MonitorVerdict cmd_simulate(const Artifact& art, const std::string& out_dir,
                            std::uint64_t seed) {
  const Scenario& sc = art.scenario;
  if (!sc.has_simulation)
    throw ValidationError("scenario.simulation: block is required to simulate");

  SimOptions opts;
  opts.dt = sc.sim_dt;
  opts.events = sc.events;
  opts.stop_labeling = &sc.labeling;
  opts.stop_margin = sc.monitor_margin;
  const std::uint64_t before = solve_invocations();
  SimResult res = run_closed_loop(art.tree, sc.z0, make_policy(sc, seed), opts);
  const std::uint64_t solves_during_run = solve_invocations() - before;

  MonitorVerdict verdict =
      monitor(res.trajectory, res.monitored_formula, sc.labeling, sc.monitor_margin);

  fs::create_directories(out_dir);
  write_trajectory_csv(fs::path(out_dir) / "trajectory.csv", res.trajectory,
                       sc.model->state_dim, sc.model->control_dim);

  json j;
  j["satisfied"] = verdict.satisfied;
  j["monitoredFormula"] = res.monitored_formula.to_string();
  j["monitorMargin"] = sc.monitor_margin;
  j["seed"] = seed;
  j["eventsApplied"] = res.events_applied;
  j["stoppedOnSatisfaction"] = res.stopped_on_satisfaction;
  j["solveInvocationsDuringRun"] = solves_during_run;
  j["subformulas"] = json::array();
  for (const auto& e : verdict.subformulas) {
    json je;
    je["formula"] = e.formula;
    je["everSatisfied"] = e.ever_satisfied;
    if (e.ever_satisfied) je["firstSatisfiedTime"] = e.first_satisfied_time;
    j["subformulas"].push_back(std::move(je));
  }
  write_text(fs::path(out_dir) / "verdict.json", j.dump(2) + "\n");
  return verdict;
}

void cmd_export(const Artifact& art, const std::string& out_dir, double time,
                const std::map<int, double>& fixed) {
  const Tlt& t = art.tree;
  const Grid& g = *t.grid;
  if (!(time >= 0.0) || !(time <= t.horizon + 1e-9))
    throw ValidationError("export: time outside [0, horizon]");

  std::vector<int> free_dims;
  std::vector<int> pinned_index(g.dim(), -1);
  for (const auto& [dim, value] : fixed) {
    if (dim < 0 || dim >= g.dim())
      throw ValidationError("export: --fix dimension " + std::to_string(dim) +
                            " outside the state space");
    if (value < g.lo()[dim] - 1e-9 || value > g.hi()[dim] + 1e-9)
      throw ValidationError("export: --fix value for dimension " + std::to_string(dim) +
                            " outside the grid range");
    double best = 1e300;
    int best_i = 0;
    for (int i = 0; i < g.counts()[dim]; ++i) {
      const double d = std::abs(g.coordinate(dim, i) - value);
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    pinned_index[dim] = best_i;
  }
  for (int d = 0; d < g.dim(); ++d)
    if (pinned_index[d] < 0) free_dims.push_back(d);
  if (free_dims.size() > 2)
    throw ValidationError(
        "export: " + std::to_string(free_dims.size()) +
        " free dimensions; pin all but at most two with --fix dim=value");

  fs::create_directories(out_dir);
  std::vector<const SetNode*> nodes;
  preorder(*t.root, nodes);

  json manifest;
  manifest["time"] = time;
  manifest["fixed"] = json::object();
  for (const auto& [dim, value] : fixed)
    manifest["fixed"][std::to_string(dim)] = g.coordinate(dim, pinned_index[dim]);
  manifest["files"] = json::array();

  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const SetNode& n = *nodes[id];
    const ValueField* field = n.static_field.get();
    double slice_time = 0.0;
    if (n.is_timed()) {
      const double s = time - t.horizon;
      const std::size_t k = n.timed_field->slice_index(s);
      field = &n.timed_field->slices()[k];
      slice_time = n.timed_field->times()[k];
    }

    char csv_name[32];
    std::snprintf(csv_name, sizeof csv_name, "node%03zu.csv", id);
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < free_dims.size(); ++i) {
      if (i) out << ",";
      out << "x" << free_dims[i];
    }
    out << (free_dims.empty() ? "value" : ",value") << "\n";

    std::vector<int> idx(g.dim(), 0);
    for (int d = 0; d < g.dim(); ++d)
      if (pinned_index[d] >= 0) idx[d] = pinned_index[d];
    // Row-major over the free dims, last free dim fastest.
    std::size_t rows = 1;
    for (int d : free_dims) rows *= static_cast<std::size_t>(g.counts()[d]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t rem = r;
      for (std::size_t i = free_dims.size(); i-- > 0;) {
        const int d = free_dims[i];
        idx[d] = static_cast<int>(rem % g.counts()[d]);
        rem /= g.counts()[d];
      }
      for (std::size_t i = 0; i < free_dims.size(); ++i) {
        if (i) out << ",";
        out << g.coordinate(free_dims[i], idx[free_dims[i]]);
      }
      out << (free_dims.empty() ? "" : ",") << (*field)[g.flat_index(idx)] << "\n";
    }
    write_text(fs::path(out_dir) / csv_name, out.str());

    json jf;
    jf["node"] = id;
    jf["file"] = csv_name;
    jf["formula"] = n.formula.to_string();
    jf["direction"] = to_string(n.direction);
    jf["timed"] = n.is_timed();
    jf["sliceTime"] = slice_time;
    manifest["files"].push_back(std::move(jf));
  }
  write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace hjtlt
