#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjtlt/dynamics.hpp"
#include "hjtlt/grid.hpp"
#include "hjtlt/tlt.hpp"

namespace hjtlt {

// One linear control constraint: a + b.u <= 0 (closed).
struct HalfSpace {
  double a = 0.0;
  std::vector<double> b;  // one coefficient per control dimension
};

// Conjunction of half-space constraints.  No half-spaces means the cell is
// the whole control box.
struct ControlCell {
  std::vector<HalfSpace> half_spaces;
};

// Union of cells intersected with the control box.  An empty cell list is
// the empty set (no admissible control), which is different from a single
// unconstrained cell (every control in the box is admissible).
struct ControlSet {
  std::vector<double> u_min;
  std::vector<double> u_max;
  std::vector<ControlCell> cells;
};

// Linearised constraint that keeps the next state inside the stored tube:
// with s = t - horizon and slice spacing dt,
//
//   V(z, s + dt) + grad V(z, s) . f(z) dt  +  (grad V(z, s) . g(z) dt) u  <= 0
//
// predicts the value one slice ahead under control u and requires it to stay
// nonpositive.  Throws ValidationError when s rounds to the final stored
// slice (there is no next slice to constrain against).
HalfSpace half_space_at(const TimedValueField& v, const ControlAffineModel& model,
                        std::span<const double> z, double t);

// The least restrictive set of controls at state z and time t that keeps the
// closed-loop system able to complete the task certified by the tree.
//
// The set is assembled in three passes over the tree:
//   1. walk the tree, testing membership at every node and emitting one
//      half-space per reachability node the state belongs to (descendants of
//      a reachability node are already accounted for inside its value
//      function, so recursion stops there);
//   2. compress the collected cells (drop unsatisfiable or duplicate cells,
//      collapse to a single cell when one is unconstrained);
//   3. back-substitute through the boolean structure: conjunctions take the
//      pairwise intersection of their operands' cells, disjunctions the
//      union of their member operands'.
//
// Preconditions (ValidationError): negations in the formula apply to atoms
// only, and the tree's verdict grants a completion guarantee (Under or
// Exact).  Throws InfeasibleError when z is not a member of the root set at
// time t; in that case no admissible control exists because the task can no
// longer be guaranteed.
ControlSet least_restrictive_ctrl(const Tlt& t, std::span<const double> z, double time);

// Membership half of the same walk, without assembling constraints: true iff
// z belongs to the tree's satisfaction set at time t.  An until node counts
// as satisfied when the state is inside its target operand's set, even after
// the node's own tube has been left behind.  A positive margin erodes every
// set by that much (in value units): useful for validating a predicted state
// so that numerical slack cannot be ridden down to nothing.
bool in_satisfaction_set(const Tlt& t, std::span<const double> z, double time,
                         double margin = 0.0);

// Closed membership test: u inside the control box and satisfying every
// half-space of at least one cell.
bool contains_control(const ControlSet& cs, std::span<const double> u);

// If u_nominal is admissible it is returned unchanged.  Otherwise the
// admissible point of a uniform lattice over the control box
// (points_per_dim samples per dimension, endpoints included) closest to
// u_nominal in Euclidean norm is returned; exact distance ties resolve to
// the earlier lattice point in row-major enumeration order.  Throws
// InfeasibleError when no lattice point is admissible.
std::vector<double> sample_control(const ControlSet& cs, std::span<const double> u_nominal,
                                   int points_per_dim = 21);

// All admissible points of the same uniform lattice, in enumeration order.
std::vector<std::vector<double>> feasible_lattice(const ControlSet& cs, int points_per_dim = 21);

}  // namespace hjtlt
