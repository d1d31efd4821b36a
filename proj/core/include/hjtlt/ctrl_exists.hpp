#pragma once

#include "hjtlt/direction.hpp"
#include "hjtlt/tlt.hpp"

namespace hjtlt {

// Folds the approximation directions recorded in a tree into a single verdict
// for the whole task:
//
//   Under  -- membership in the root set is sufficient for task completion
//   Exact  -- membership is both sufficient and necessary
//   Over   -- membership is only necessary (no guarantee)
//   Invalid-- the recorded directions do not compose into any of the above
//
// The fold is purely structural: it never touches field data, only node kinds
// and recorded directions, so it also works on synthetic trees in tests.
ApproxDirection ctrl_exists_verdict(const SetNode& root);

// A controller with a completion guarantee exists from state z at time 0 iff
// the verdict is Under or Exact and z belongs to the root set.  This helper
// bundles the verdict test with root non-emptiness.
bool ctrl_exists(const Tlt& t);

}  // namespace hjtlt
