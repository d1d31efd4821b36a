#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hjtlt/direction.hpp"
#include "hjtlt/dynamics.hpp"
#include "hjtlt/formula.hpp"
#include "hjtlt/geometry.hpp"
#include "hjtlt/grid.hpp"
#include "hjtlt/hj_solver.hpp"

namespace hjtlt {

enum class OpKind { Not, And, Or, Until, Always };

const char* to_string(OpKind k);

struct OpNode;

// Alternating tree of state sets and operators: the root and every leaf is
// a SetNode; a non-leaf SetNode has exactly one OpNode child whose children
// are SetNodes again.
//
// Stored fields are membership-normalized: z belongs to the node's set at
// time t iff value(z, t) <= 0. Reachability solves are shifted by their
// direction threshold at construction, so downstream combination and
// querying never reconciles thresholds.
struct SetNode {
  // Exactly one of these is set: static sets (atoms, boolean combinations)
  // versus time-indexed tubes (until / always).
  std::shared_ptr<const ValueField> static_field;
  std::shared_ptr<const TimedValueField> timed_field;

  ApproxDirection direction = ApproxDirection::Exact;
  Formula formula;
  std::unique_ptr<OpNode> op;  // null for leaves

  // Filled for reachability nodes; build reports surface them.
  double solve_seconds = 0.0;
  int solve_steps = 0;

  bool is_leaf() const { return op == nullptr; }
  bool is_timed() const { return timed_field != nullptr; }
};

struct OpNode {
  OpKind kind;
  // Solve direction for Until/Always operators; Exact on boolean operators.
  ApproxDirection direction = ApproxDirection::Exact;
  // Until children are ordered [constraint, target].
  std::vector<std::unique_ptr<SetNode>> children;
};

struct Tlt {
  std::unique_ptr<SetNode> root;
  Formula formula;
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const ControlAffineModel> model;
  double horizon = 0.0;
  double cfl = 0.5;
  double kappa = 1.0;
};

struct ConstructOptions {
  double cfl = 0.5;
  double kappa = 1.0;
  // Force every solve to one direction (testing hook); the default assigns
  // directions top-down: the root wants Under, negation flips the want,
  // disjunction and the temporal operators pass it through, and conjunction
  // forces Over on its children (an intersection can only over-approximate).
  std::optional<ApproxDirection> direction_override;
};

// Builds the tree bottom-up. Atoms discretize their labeled region; boolean
// nodes combine children pointwise (negation / max / min); until maps to a
// constrained reach solve of the target child final slice, eventually to an
// unconstrained one, and always to a robust controlled-invariance solve.
// Throws ValidationError on atoms missing from the labeling.
Tlt construct(const Formula& f, const Labeling& labeling,
              std::shared_ptr<const ControlAffineModel> model,
              std::shared_ptr<const Grid> grid, double horizon,
              const ConstructOptions& opts = {});

// Membership-normalized value of the node's set at (z, t).
double node_value(const SetNode& node, std::span<const double> z, double t);

// Final (deployment-time-0) slice of the node's membership field.
const ValueField& membership_final(const SetNode& node);

// True iff some grid point of the root's final slice is a member.
bool root_non_empty(const Tlt& t);

// Removes every disjunction child whose subformula references one of the
// removed atoms and recombines ancestor fields without re-solving any PDE.
// Throws InfeasibleError if a disjunction loses all children, and
// ValidationError if a removed atom sits below a reachability operator
// (that would require a re-solve) or outside any disjunction.
Tlt prune(const Tlt& t, const std::set<std::string>& removed_atoms);

// Slice spacing shared by the tree's time-dependent sets, or 0 when the tree
// stores none (purely boolean formulas).
double slice_spacing(const Tlt& t);

}  // namespace hjtlt
