#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjtlt/direction.hpp"
#include "hjtlt/dynamics.hpp"
#include "hjtlt/formula.hpp"
#include "hjtlt/geometry.hpp"
#include "hjtlt/grid.hpp"
#include "hjtlt/sim.hpp"
#include "hjtlt/tlt.hpp"

namespace hjtlt {

// A scenario is one JSON document describing everything needed to build and
// exercise a task tree:
//
// {
//   "model":   {"name": "dubins3", "params": {"speed": 1.0, "omega_max": 1.0},
//               "u_min": [-1.0], "u_max": [1.0]},          // bounds optional
//   "grid":    {"lo": [-2,-2,-3.141592653589793], "hi": [2,2,3.141592653589793],
//               "counts": [41,41,41], "periodic": [false,false,true]},
//   "horizon": 10.0,
//   "labeling": {"road": <set JSON>, "goal": <set JSON>},
//   "formula": "road U goal",
//   "solver":  {"cfl": 0.5, "kappa": 1.0, "direction": "U"},  // all optional
//   "simulation": {"z0": [...], "dt": null,                    // null: tube spacing
//                  "policy": {"kind": "constant", "u": [...]}  // or {"kind":"random"}
//                  "monitor_margin": 0.0, "seed": 0},          // optional block
//   "events":  [{"time": 1.5, "remove_atoms": ["lotL"]}]       // optional
// }
//
// Set JSON: {"type":"box","lo":[...],"hi":[...],"dims":[...]},
// {"type":"halfspace","dim":0,"threshold":1.0,"op":"le"|"ge"},
// {"type":"union"|"intersection","children":[...]},
// {"type":"complement","child":...}, {"type":"all"}, {"type":"empty"}.
//
// Validation failures throw ValidationError whose message starts with the
// JSON path of the offending field (e.g. "scenario.grid.counts: ...").
struct PolicySpec {
  enum class Kind { Constant, Random };
  Kind kind = Kind::Constant;
  std::vector<double> u;  // Constant only
};

struct Scenario {
  std::shared_ptr<const ControlAffineModel> model;
  std::shared_ptr<const Grid> grid;
  double horizon = 0.0;
  Labeling labeling;
  Formula formula;

  double cfl = 0.5;
  double kappa = 1.0;
  std::optional<ApproxDirection> direction_override;

  bool has_simulation = false;
  std::vector<double> z0;
  double sim_dt = 0.0;  // 0: use the stored tube slice spacing
  PolicySpec policy;
  double monitor_margin = 0.0;
  std::uint64_t seed = 0;

  std::vector<SimEvent> events;

  std::string canonical_text;  // the parsed document, re-serialized
};

Scenario parse_scenario_text(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Convenience: construct() with the scenario's solver options.
Tlt build_tree(const Scenario& sc);

// The scenario's nominal policy; Random draws each component uniformly from
// the control box with a deterministic generator seeded from `seed`.
NominalPolicy make_policy(const Scenario& sc, std::uint64_t seed);

}  // namespace hjtlt
