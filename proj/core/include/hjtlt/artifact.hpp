#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hjtlt/ctrl_synth.hpp"
#include "hjtlt/scenario.hpp"
#include "hjtlt/sim.hpp"
#include "hjtlt/tlt.hpp"

namespace hjtlt {

// On-disk layout of a built artifact directory:
//   scenario.json       canonical copy of the input scenario
//   tree.json           node structure, directions, formulas, field refs
//   fields/node###.f64  row-major float64 field data (+ .json sidecars)
//   build_report.json   per-solve wall-clock seconds and step counts
//
// Field binaries are little-endian and written deterministically, so
// rebuilding from an identical scenario yields bit-identical files.
void write_artifact(const std::string& dir, const Scenario& sc, const Tlt& t,
                    double total_seconds);

struct Artifact {
  Scenario scenario;
  Tlt tree;
};

Artifact load_artifact(const std::string& dir);

// check: {"nonEmpty": ..., "verdict": "U", "gate": ..., "nodes": [...]}.
std::string check_report(const Tlt& t);

// ctrl: {"cells": [{"a": [...], "b": [[...], ...]}, ...]} — one entry per
// cell, one a/b row per half-space of that cell.
std::string ctrl_report(const ControlSet& cs);

// simulate: writes trajectory.csv (t, state..., control...; the final row
// carries nan controls) and verdict.json into out_dir; returns the monitor
// verdict.  Counts PDE solves during the run (pruning must not re-solve) and
// records applied event times.
MonitorVerdict cmd_simulate(const Artifact& art, const std::string& out_dir,
                            std::uint64_t seed);

// export: one CSV per tree node with the free grid coordinates and the field
// value at query time `time`; state dimensions beyond two must be pinned via
// `fixed` (dimension index -> value, snapped to the nearest grid line).
// Writes manifest.json describing every emitted file.
void cmd_export(const Artifact& art, const std::string& out_dir, double time,
                const std::map<int, double>& fixed);

}  // namespace hjtlt
