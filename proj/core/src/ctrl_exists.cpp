#include "hjtlt/ctrl_exists.hpp"

#include "hjtlt/errors.hpp"

namespace hjtlt {

namespace {

using D = ApproxDirection;

D combine_or_verdict(D a, D b) {
  if (a == D::Invalid || b == D::Invalid) return D::Invalid;
  if (a == b) return a;
  if (a == D::Exact) return b;
  if (b == D::Exact) return a;
  return D::Invalid;  // {Over, Under} in either order
}

}  // namespace

ApproxDirection ctrl_exists_verdict(const SetNode& root) {
  if (root.is_leaf()) return root.direction;
  const OpNode& op = *root.op;
  switch (op.kind) {
    case OpKind::Not: {
      return negate(ctrl_exists_verdict(*op.children[0]));
    }
    case OpKind::And: {
      // An intersection of under-approximations of the individual operand
      // sets is not an under-approximation of the set of states from which
      // *all* operands can be completed: the witness controllers may
      // disagree.  Only over-approximations survive intersection.
      for (const auto& c : op.children) {
        D d = ctrl_exists_verdict(*c);
        if (d == D::Under || d == D::Invalid) return D::Invalid;
      }
      return D::Over;
    }
    case OpKind::Or: {
      D acc = ctrl_exists_verdict(*op.children[0]);
      for (std::size_t i = 1; i < op.children.size(); ++i)
        acc = combine_or_verdict(acc, ctrl_exists_verdict(*op.children[i]));
      return acc;
    }
    case OpKind::Until: {
      // children[0] is the constraint operand, children[1] the target.  The
      // constraint enters the solve as a state restriction; its own verdict
      // only needs to be well defined.  The target's verdict must agree with
      // the direction of the reach solve (an exact target agrees with both).
      D c = ctrl_exists_verdict(*op.children[0]);
      if (c == D::Invalid) return D::Invalid;
      D t = ctrl_exists_verdict(*op.children[1]);
      if (t == D::Invalid) return D::Invalid;
      if (t == D::Exact) return op.direction;
      if (t != op.direction) return D::Invalid;
      return t;
    }
    case OpKind::Always: {
      D t = ctrl_exists_verdict(*op.children[0]);
      if (t == D::Invalid) return D::Invalid;
      if (t == D::Exact) return op.direction;
      if (t != op.direction) return D::Invalid;
      return t;
    }
  }
  throw Error("ctrl_exists_verdict: unreachable operator kind");
}

bool ctrl_exists(const Tlt& t) {
  D v = ctrl_exists_verdict(*t.root);
  if (v != D::Under && v != D::Exact) return false;
  return root_non_empty(t);
}

}  // namespace hjtlt
