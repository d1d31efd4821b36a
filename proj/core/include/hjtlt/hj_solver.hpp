#pragma once

#include <cstdint>
#include <memory>

#include "hjtlt/direction.hpp"
#include "hjtlt/dynamics.hpp"
#include "hjtlt/grid.hpp"

namespace hjtlt {

struct SolveOptions {
  double horizon = 1.0;  // T > 0
  double cfl = 0.5;      // time step safety factor, in (0, 1]
  double kappa = 1.0;    // membership boundary shift, in grid cells
  ApproxDirection direction = ApproxDirection::Under;
};

// Membership threshold implementing the direction convention: the set is
// { z : V(z, -T) <= threshold } with threshold -kappa*max_dx (Under),
// +kappa*max_dx (Over), or 0 (Exact).
double membership_threshold(const Grid& grid, const SolveOptions& opts);

// Backward reach tube of `target` (optionally while staying inside
// `constraint`): first-order Lax-Friedrichs with upwind differences,
// explicit Euler in time under the CFL bound
//   dt <= cfl * (sum_i alpha_i / dx_i)^-1,
// tube freezing V <- min(V_step, V_prev) after every step, and constraint
// masking V <- max(V, V_C) on every slice including the terminal one.
// All slices are stored, times 0 > -dt > ... > -T.
TimedValueField solve_reach(const ValueField& target, const ValueField* constraint,
                            const ControlAffineModel& model, const SolveOptions& opts);

// Backward avoid tube: states from which every control enters `avoid`
// within the horizon (worst case over the input box, tube-frozen).
TimedValueField solve_avoid(const ValueField& avoid, const ControlAffineModel& model,
                            const SolveOptions& opts);

// Robust controlled-invariant subset of `candidate` over the horizon:
// complement of the avoid tube of the complement. Membership is the zero
// sub-level of the returned (negated) field.
TimedValueField solve_rci(const ValueField& candidate, const ControlAffineModel& model,
                          const SolveOptions& opts);

// Process-wide count of PDE solves; online queries must leave it unchanged.
std::uint64_t solve_invocations();

}  // namespace hjtlt
