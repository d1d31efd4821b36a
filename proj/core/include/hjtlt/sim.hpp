#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hjtlt/ctrl_synth.hpp"
#include "hjtlt/formula.hpp"
#include "hjtlt/geometry.hpp"
#include "hjtlt/tlt.hpp"

namespace hjtlt {

// Closed-loop run: N+1 states sampled at times[i], N controls where
// controls[i] was applied over [times[i], times[i+1]].
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> controls;
};

// Nominal control suggestion, filtered through the admissible set each step.
using NominalPolicy = std::function<std::vector<double>(std::span<const double> z, double t)>;

// Mid-run environment change: at `time`, the listed atoms become unavailable
// and the tree is pruned to the surviving disjuncts (no re-solve).
struct SimEvent {
  double time = 0.0;
  std::set<std::string> remove_atoms;
};

struct SimOptions {
  // Step size. 0 selects the slice spacing of the tree's stored tubes.  When
  // the tree stores tubes an explicit value must match that spacing: the
  // admissible half-spaces constrain the value one stored slice ahead.
  double dt = 0.0;
  int points_per_dim = 21;  // lattice used to repair inadmissible nominals
  std::vector<SimEvent> events;
  // When set and the active formula contains no 'always', the run ends at the
  // first sample whose emitted prefix already satisfies the formula (atoms
  // tested at stop_margin).  Satisfaction of always-free formulas is
  // irrevocable -- every extension of a satisfying trace also satisfies -- so
  // stopping is sound, and continuing past a reach-style goal can drive the
  // state beyond the region from which any guarantee holds.
  const Labeling* stop_labeling = nullptr;
  double stop_margin = 0.0;
};

struct SimResult {
  Trajectory trajectory;
  Formula monitored_formula;           // the formula after all applied events
  std::vector<double> events_applied;  // step times at which pruning happened
  bool stopped_on_satisfaction = false;
};

// Simulates from z0 over the tree's full horizon, each step intersecting the
// nominal policy with the least restrictive admissible set.  Throws
// InfeasibleError when the initial state is outside the certified set, when
// an event prunes away every disjunct, or when no admissible control exists
// on the sampling lattice.
SimResult run_closed_loop(const Tlt& t, std::span<const double> z0,
                          const NominalPolicy& nominal, const SimOptions& opts = {});

// Finite-trace satisfaction over the sampled states.  An atom holds at
// sample i when its region surface value is <= margin.  Temporal operators
// are evaluated over the remaining suffix of samples; 'p U q' needs q at
// some sample with p at every sample before it, 'G p' needs p at every
// remaining sample, and the trace ends at the last sample (no infinite
// continuation).
struct MonitorVerdict {
  bool satisfied = false;
  struct Entry {
    std::string formula;
    bool ever_satisfied = false;
    double first_satisfied_time = 0.0;  // meaningful only when ever_satisfied
  };
  std::vector<Entry> subformulas;  // unique subformulas in evaluation order
};

MonitorVerdict monitor(const Trajectory& traj, const Formula& f, const Labeling& labeling,
                       double margin = 0.0);

}  // namespace hjtlt
