#include "hjtlt/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "hjtlt/errors.hpp"

namespace hjtlt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::vector<int> int_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer())
      fail(path + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(j[i].get<int>());
  }
  return out;
}

std::shared_ptr<const ControlAffineModel> parse_model(const json& j, const std::string& path) {
  const json& name_j = member(j, path, "name");
  if (!name_j.is_string()) fail(path + ".name", "expected a string");
  const std::string name = name_j.get<std::string>();

  json params = json::object();
  if (j.contains("params")) {
    if (!j["params"].is_object()) fail(path + ".params", "expected an object");
    params = j["params"];
  }
  auto param = [params, path](const std::string& key) -> double {
    auto it = params.find(key);
    if (it == params.end()) fail(path + ".params." + key, "missing required model parameter");
    if (!it->is_number()) fail(path + ".params." + key, "expected a number");
    return it->get<double>();
  };

  std::vector<double> u_min, u_max;
  if (j.contains("u_min")) u_min = number_array(j["u_min"], path + ".u_min");
  if (j.contains("u_max")) u_max = number_array(j["u_max"], path + ".u_max");
  if (u_min.size() != u_max.size()) fail(path, "u_min and u_max must have the same length");
  for (std::size_t i = 0; i < u_min.size(); ++i)
    if (!(u_min[i] <= u_max[i])) fail(path, "u_min must not exceed u_max componentwise");

  try {
    return make_model(name, param, std::move(u_min), std::move(u_max));
  } catch (const ValidationError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;  // already path-prefixed
    fail(path, e.what());
  }
}

std::shared_ptr<const Grid> parse_grid(const json& j, const std::string& path) {
  std::vector<double> lo = number_array(member(j, path, "lo"), path + ".lo");
  std::vector<double> hi = number_array(member(j, path, "hi"), path + ".hi");
  std::vector<int> counts = int_array(member(j, path, "counts"), path + ".counts");
  std::vector<bool> periodic(lo.size(), false);
  if (j.contains("periodic")) {
    const json& p = j["periodic"];
    if (!p.is_array()) fail(path + ".periodic", "expected an array of booleans");
    periodic.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].is_boolean())
        fail(path + ".periodic[" + std::to_string(i) + "]", "expected a boolean");
      periodic.push_back(p[i].get<bool>());
    }
  }
  try {
    return std::make_shared<Grid>(std::move(lo), std::move(hi), std::move(counts),
                                  std::move(periodic));
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

}  // namespace

Scenario parse_scenario_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  const std::string root = "scenario";
  if (!doc.is_object()) fail(root, "expected a JSON object");

  Scenario sc;
  sc.model = parse_model(member(doc, root, "model"), root + ".model");
  sc.grid = parse_grid(member(doc, root, "grid"), root + ".grid");
  if (sc.grid->dim() != sc.model->state_dim)
    fail(root + ".grid", "grid dimension " + std::to_string(sc.grid->dim()) +
                             " does not match model state dimension " +
                             std::to_string(sc.model->state_dim));
  sc.horizon = number_at(member(doc, root, "horizon"), root + ".horizon");
  if (!(sc.horizon > 0.0)) fail(root + ".horizon", "must be positive");

  const json& lab = member(doc, root, "labeling");
  if (!lab.is_object()) fail(root + ".labeling", "expected an object");
  sc.labeling.state_dim = sc.model->state_dim;
  for (auto it = lab.begin(); it != lab.end(); ++it) {
    const std::string path = root + ".labeling." + it.key();
    try {
      Formula::atom(it.key());  // labels must be legal atom names
      sc.labeling.regions.emplace(it.key(), SetExpr::from_json_text(it.value().dump()));
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }

  const json& formula_j = member(doc, root, "formula");
  if (!formula_j.is_string()) fail(root + ".formula", "expected a string");
  try {
    sc.formula = parse_formula(formula_j.get<std::string>());
  } catch (const ValidationError& e) {
    fail(root + ".formula", e.what());
  }
  for (const std::string& a : atoms(sc.formula))
    if (!sc.labeling.regions.count(a))
      fail(root + ".formula",
           "references atom '" + a + "' not defined in " + root + ".labeling");

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) fail(root + ".solver", "expected an object");
    if (s.contains("cfl")) sc.cfl = number_at(s["cfl"], root + ".solver.cfl");
    if (s.contains("kappa")) sc.kappa = number_at(s["kappa"], root + ".solver.kappa");
    if (!(sc.cfl > 0.0 && sc.cfl <= 1.0)) fail(root + ".solver.cfl", "must be in (0, 1]");
    if (!(sc.kappa >= 0.0)) fail(root + ".solver.kappa", "must be nonnegative");
    if (s.contains("direction") && !s["direction"].is_null()) {
      if (!s["direction"].is_string()) fail(root + ".solver.direction", "expected a string");
      try {
        sc.direction_override = direction_from_string(s["direction"].get<std::string>());
      } catch (const ValidationError& e) {
        fail(root + ".solver.direction", e.what());
      }
    }
  }

  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    if (!s.is_object()) fail(root + ".simulation", "expected an object");
    sc.has_simulation = true;
    sc.z0 = number_array(member(s, root + ".simulation", "z0"), root + ".simulation.z0");
    if (static_cast<int>(sc.z0.size()) != sc.model->state_dim)
      fail(root + ".simulation.z0", "length must match the model state dimension");
    if (s.contains("dt") && !s["dt"].is_null()) {
      sc.sim_dt = number_at(s["dt"], root + ".simulation.dt");
      if (!(sc.sim_dt > 0.0)) fail(root + ".simulation.dt", "must be positive or null");
    }
    if (s.contains("policy")) {
      const json& p = s["policy"];
      const std::string ppath = root + ".simulation.policy";
      const json& kind_j = member(p, ppath, "kind");
      if (!kind_j.is_string()) fail(ppath + ".kind", "expected a string");
      const std::string kind = kind_j.get<std::string>();
      if (kind == "constant") {
        sc.policy.kind = PolicySpec::Kind::Constant;
        sc.policy.u = number_array(member(p, ppath, "u"), ppath + ".u");
        if (static_cast<int>(sc.policy.u.size()) != sc.model->control_dim)
          fail(ppath + ".u", "length must match the model control dimension");
      } else if (kind == "random") {
        sc.policy.kind = PolicySpec::Kind::Random;
      } else {
        fail(ppath + ".kind", "unknown policy kind '" + kind + "'");
      }
    } else {
      sc.policy.kind = PolicySpec::Kind::Constant;
      sc.policy.u.assign(static_cast<std::size_t>(sc.model->control_dim), 0.0);
      for (int j = 0; j < sc.model->control_dim; ++j)
        sc.policy.u[j] = std::min(std::max(0.0, sc.model->u_min[j]), sc.model->u_max[j]);
    }
    if (s.contains("monitor_margin"))
      sc.monitor_margin = number_at(s["monitor_margin"], root + ".simulation.monitor_margin");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer())
        fail(root + ".simulation.seed", "expected an integer");
      sc.seed = s["seed"].get<std::uint64_t>();
    }
  }

  if (doc.contains("events")) {
    const json& evs = doc["events"];
    if (!evs.is_array()) fail(root + ".events", "expected an array");
    for (std::size_t i = 0; i < evs.size(); ++i) {
      const std::string path = root + ".events[" + std::to_string(i) + "]";
      SimEvent ev;
      ev.time = number_at(member(evs[i], path, "time"), path + ".time");
      if (!(ev.time >= 0.0)) fail(path + ".time", "must be nonnegative");
      const json& atoms_j = member(evs[i], path, "remove_atoms");
      if (!atoms_j.is_array()) fail(path + ".remove_atoms", "expected an array of strings");
      for (std::size_t k = 0; k < atoms_j.size(); ++k) {
        if (!atoms_j[k].is_string())
          fail(path + ".remove_atoms[" + std::to_string(k) + "]", "expected a string");
        const std::string a = atoms_j[k].get<std::string>();
        if (!sc.labeling.regions.count(a))
          fail(path + ".remove_atoms[" + std::to_string(k) + "]",
               "atom '" + a + "' is not defined in " + root + ".labeling");
        ev.remove_atoms.insert(a);
      }
      sc.events.push_back(std::move(ev));
    }
  }

  sc.canonical_text = doc.dump(2) + "\n";
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

Tlt build_tree(const Scenario& sc) {
  ConstructOptions opts;
  opts.cfl = sc.cfl;
  opts.kappa = sc.kappa;
  opts.direction_override = sc.direction_override;
  return construct(sc.formula, sc.labeling, sc.model, sc.grid, sc.horizon, opts);
}

NominalPolicy make_policy(const Scenario& sc, std::uint64_t seed) {
  if (sc.policy.kind == PolicySpec::Kind::Constant) {
    std::vector<double> u = sc.policy.u;
    return [u](std::span<const double>, double) { return u; };
  }
  auto rng = std::make_shared<std::mt19937_64>(seed);
  auto model = sc.model;
  return [rng, model](std::span<const double>, double) {
    std::vector<double> u(model->u_min.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      std::uniform_real_distribution<double> dist(model->u_min[j], model->u_max[j]);
      u[j] = dist(*rng);
    }
    return u;
  };
}

}  // namespace hjtlt
