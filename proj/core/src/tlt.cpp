#include "hjtlt/tlt.hpp"

#include <algorithm>
#include <chrono>

#include "hjtlt/errors.hpp"

namespace hjtlt {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Not: return "not";
    case OpKind::And: return "and";
    case OpKind::Or: return "or";
    case OpKind::Until: return "until";
    case OpKind::Always: return "always";
  }
  return "?";
}

const ValueField& membership_final(const SetNode& node) {
  if (node.static_field) return *node.static_field;
  return node.timed_field->slices().back();
}

double node_value(const SetNode& node, std::span<const double> z, double t) {
  if (node.static_field) return interpolate(*node.static_field, z);
  return interpolate_timed(*node.timed_field, z, t);
}

namespace {

// Directions recorded on boolean combination nodes. Exact inputs combine
// exactly; otherwise intersection can only widen (Over) and mixing an
// under- with an over-approximation loses containment both ways.
ApproxDirection combine_and(ApproxDirection a, ApproxDirection b) {
  if (a == ApproxDirection::Exact && b == ApproxDirection::Exact) return ApproxDirection::Exact;
  if (a == ApproxDirection::Invalid || b == ApproxDirection::Invalid ||
      a == ApproxDirection::Under || b == ApproxDirection::Under)
    return ApproxDirection::Invalid;
  return ApproxDirection::Over;
}

ApproxDirection combine_or(ApproxDirection a, ApproxDirection b) {
  if (a == ApproxDirection::Invalid || b == ApproxDirection::Invalid)
    return ApproxDirection::Invalid;
  if (a == b) return a;
  if (a == ApproxDirection::Exact) return b;
  if (b == ApproxDirection::Exact) return a;
  return ApproxDirection::Invalid;
}

struct Builder {
  const Labeling& labeling;
  std::shared_ptr<const ControlAffineModel> model;
  std::shared_ptr<const Grid> grid;
  double horizon;
  ConstructOptions opts;

  SolveOptions solve_options(ApproxDirection dir) const {
    SolveOptions s;
    s.horizon = horizon;
    s.cfl = opts.cfl;
    s.kappa = opts.kappa;
    s.direction = dir;
    return s;
  }

  std::unique_ptr<SetNode> leaf(const Formula& f, ValueField field) const {
    auto n = std::make_unique<SetNode>();
    n->static_field = std::make_shared<const ValueField>(std::move(field));
    n->direction = ApproxDirection::Exact;
    n->formula = f;
    return n;
  }

  ApproxDirection solve_direction(ApproxDirection want) const {
    return opts.direction_override.value_or(want);
  }

  // Shift a solve output so membership becomes value <= 0.
  std::shared_ptr<const TimedValueField> normalize(TimedValueField tube,
                                                   ApproxDirection dir) const {
    const double thr = membership_threshold(*grid, solve_options(dir));
    if (thr != 0.0)
      for (auto& slice : tube.slices())
        for (double& v : slice.data()) v -= thr;
    return std::make_shared<const TimedValueField>(std::move(tube));
  }

  std::unique_ptr<SetNode> build(const Formula& f, ApproxDirection want) const {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::True:
        return leaf(f, ValueField(grid, -kUnboundedSurface));
      case K::False:
        return leaf(f, ValueField(grid, kUnboundedSurface));
      case K::Atom: {
        auto it = labeling.regions.find(f.atom_name());
        if (it == labeling.regions.end())
          throw ValidationError("formula references atom '" + f.atom_name() +
                                "' missing from the labeling");
        return leaf(f, discretize(it->second, grid));
      }
      case K::Not: {
        auto child = build(f.lhs(), negate(want));
        auto n = std::make_unique<SetNode>();
        ValueField neg(grid);
        const ValueField& cf = membership_final(*child);
        for (std::size_t i = 0; i < neg.data().size(); ++i) neg[i] = -cf[i];
        n->static_field = std::make_shared<const ValueField>(std::move(neg));
        n->direction = negate(child->direction);
        n->formula = f;
        n->op = std::make_unique<OpNode>();
        n->op->kind = OpKind::Not;
        n->op->children.push_back(std::move(child));
        return n;
      }
      case K::And:
      case K::Or: {
        const bool is_and = f.kind() == K::And;
        auto c1 = build(f.lhs(), is_and ? ApproxDirection::Over : want);
        auto c2 = build(f.rhs(), is_and ? ApproxDirection::Over : want);
        auto n = std::make_unique<SetNode>();
        ValueField combo(grid);
        const ValueField& a = membership_final(*c1);
        const ValueField& b = membership_final(*c2);
        if (is_and)
          for (std::size_t i = 0; i < combo.data().size(); ++i) combo[i] = std::max(a[i], b[i]);
        else
          for (std::size_t i = 0; i < combo.data().size(); ++i) combo[i] = std::min(a[i], b[i]);
        n->static_field = std::make_shared<const ValueField>(std::move(combo));
        n->direction = is_and ? combine_and(c1->direction, c2->direction)
                              : combine_or(c1->direction, c2->direction);
        n->formula = f;
        n->op = std::make_unique<OpNode>();
        n->op->kind = is_and ? OpKind::And : OpKind::Or;
        n->op->children.push_back(std::move(c1));
        n->op->children.push_back(std::move(c2));
        return n;
      }
      case K::Until:
      case K::Eventually: {
        const bool sugar = f.kind() == K::Eventually;
        const Formula constraint_f = sugar ? Formula::make_true() : f.lhs();
        const Formula target_f = sugar ? f.lhs() : f.rhs();
        auto c1 = build(constraint_f, want);
        auto c2 = build(target_f, want);
        const ApproxDirection dir = solve_direction(want);

        const ValueField& target = membership_final(*c2);
        const ValueField* constraint = nullptr;
        if (constraint_f.kind() != K::True) constraint = &membership_final(*c1);

        auto n = std::make_unique<SetNode>();
        const auto start = std::chrono::steady_clock::now();
        TimedValueField tube = solve_reach(target, constraint, *model, solve_options(dir));
        n->solve_seconds = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start).count();
        n->solve_steps = static_cast<int>(tube.times().size()) - 1;
        n->timed_field = normalize(std::move(tube), dir);
        n->direction = dir;
        n->formula = f;
        n->op = std::make_unique<OpNode>();
        n->op->kind = OpKind::Until;
        n->op->direction = dir;
        n->op->children.push_back(std::move(c1));
        n->op->children.push_back(std::move(c2));
        return n;
      }
      case K::Always: {
        auto child = build(f.lhs(), want);
        const ApproxDirection dir = solve_direction(want);
        auto n = std::make_unique<SetNode>();
        const auto start = std::chrono::steady_clock::now();
        TimedValueField tube = solve_rci(membership_final(*child), *model, solve_options(dir));
        n->solve_seconds = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start).count();
        n->solve_steps = static_cast<int>(tube.times().size()) - 1;
        n->timed_field = normalize(std::move(tube), dir);
        n->direction = dir;
        n->formula = f;
        n->op = std::make_unique<OpNode>();
        n->op->kind = OpKind::Always;
        n->op->direction = dir;
        n->op->children.push_back(std::move(child));
        return n;
      }
    }
    throw Error("unreachable formula kind");
  }
};

}  // namespace

Tlt construct(const Formula& f, const Labeling& labeling,
              std::shared_ptr<const ControlAffineModel> model,
              std::shared_ptr<const Grid> grid, double horizon,
              const ConstructOptions& opts) {
  if (!model || !grid) throw ValidationError("construct needs a model and a grid");
  if (!(horizon > 0)) throw ValidationError("construct horizon must be positive");
  if (labeling.state_dim != 0 && labeling.state_dim != grid->dim())
    throw ValidationError("labeling state dimension does not match the grid");
  Builder b{labeling, model, grid, horizon, opts};
  Tlt t;
  t.root = b.build(f, ApproxDirection::Under);
  t.formula = f;
  t.grid = std::move(grid);
  t.model = std::move(model);
  t.horizon = horizon;
  t.cfl = opts.cfl;
  t.kappa = opts.kappa;
  return t;
}

bool root_non_empty(const Tlt& t) {
  const ValueField& final = membership_final(*t.root);
  return std::any_of(final.data().begin(), final.data().end(),
                     [](double v) { return v <= 0.0; });
}

namespace {

bool references_any(const Formula& f, const std::set<std::string>& removed) {
  const auto used = atoms(f);
  return std::any_of(used.begin(), used.end(),
                     [&](const std::string& a) { return removed.count(a) > 0; });
}

std::unique_ptr<SetNode> share_copy(const SetNode& n) {
  auto out = std::make_unique<SetNode>();
  out->static_field = n.static_field;
  out->timed_field = n.timed_field;
  out->direction = n.direction;
  out->formula = n.formula;
  out->solve_seconds = n.solve_seconds;
  out->solve_steps = n.solve_steps;
  if (n.op) {
    out->op = std::make_unique<OpNode>();
    out->op->kind = n.op->kind;
    out->op->direction = n.op->direction;
    for (const auto& c : n.op->children) out->op->children.push_back(share_copy(*c));
  }
  return out;
}

std::unique_ptr<SetNode> prune_node(const SetNode& n, const std::set<std::string>& removed) {
  if (!references_any(n.formula, removed)) return share_copy(n);
  if (n.is_leaf())
    throw ValidationError("cannot prune atom(s) outside any disjunction (subformula '" +
                          n.formula.to_string() + "')");
  switch (n.op->kind) {
    case OpKind::Until:
    case OpKind::Always:
      throw ValidationError(
          "pruning below a reachability operator requires a re-solve (subformula '" +
          n.formula.to_string() + "')");
    case OpKind::Not: {
      auto child = prune_node(*n.op->children[0], removed);
      auto out = std::make_unique<SetNode>();
      ValueField neg(membership_final(*child).grid_ptr());
      const ValueField& cf = membership_final(*child);
      for (std::size_t i = 0; i < neg.data().size(); ++i) neg[i] = -cf[i];
      out->static_field = std::make_shared<const ValueField>(std::move(neg));
      out->direction = negate(child->direction);
      out->formula = Formula::negation(child->formula);
      out->op = std::make_unique<OpNode>();
      out->op->kind = OpKind::Not;
      out->op->children.push_back(std::move(child));
      return out;
    }
    case OpKind::And: {
      auto c1 = prune_node(*n.op->children[0], removed);
      auto c2 = prune_node(*n.op->children[1], removed);
      auto out = std::make_unique<SetNode>();
      ValueField combo(membership_final(*c1).grid_ptr());
      const ValueField& a = membership_final(*c1);
      const ValueField& b = membership_final(*c2);
      for (std::size_t i = 0; i < combo.data().size(); ++i) combo[i] = std::max(a[i], b[i]);
      out->static_field = std::make_shared<const ValueField>(std::move(combo));
      out->direction = combine_and(c1->direction, c2->direction);
      out->formula = Formula::conjunction(c1->formula, c2->formula);
      out->op = std::make_unique<OpNode>();
      out->op->kind = OpKind::And;
      out->op->children.push_back(std::move(c1));
      out->op->children.push_back(std::move(c2));
      return out;
    }
    case OpKind::Or: {
      std::vector<std::unique_ptr<SetNode>> kept;
      for (const auto& c : n.op->children) {
        if (references_any(c->formula, removed)) continue;  // drop the branch
        kept.push_back(prune_node(*c, removed));
      }
      if (kept.empty())
        throw InfeasibleError("pruning removes every disjunct of '" + n.formula.to_string() +
                              "'; the task is no longer satisfiable");
      if (kept.size() == 1) return std::move(kept.front());
      auto out = std::make_unique<SetNode>();
      ValueField combo(membership_final(*kept[0]).grid_ptr(), kUnboundedSurface);
      for (const auto& c : kept) {
        const ValueField& cf = membership_final(*c);
        for (std::size_t i = 0; i < combo.data().size(); ++i)
          combo[i] = std::min(combo[i], cf[i]);
      }
      out->static_field = std::make_shared<const ValueField>(std::move(combo));
      ApproxDirection dir = kept[0]->direction;
      for (std::size_t i = 1; i < kept.size(); ++i) dir = combine_or(dir, kept[i]->direction);
      out->direction = dir;
      Formula f = kept[0]->formula;
      for (std::size_t i = 1; i < kept.size(); ++i)
        f = Formula::disjunction(f, kept[i]->formula);
      out->formula = f;
      out->op = std::make_unique<OpNode>();
      out->op->kind = OpKind::Or;
      for (auto& c : kept) out->op->children.push_back(std::move(c));
      return out;
    }
  }
  throw Error("unreachable operator kind");
}

}  // namespace

Tlt prune(const Tlt& t, const std::set<std::string>& removed_atoms) {
  Tlt out;
  out.root = prune_node(*t.root, removed_atoms);
  out.formula = out.root->formula;
  out.grid = t.grid;
  out.model = t.model;
  out.horizon = t.horizon;
  out.cfl = t.cfl;
  out.kappa = t.kappa;
  return out;
}

namespace {

double slice_spacing_node(const SetNode& n) {
  if (n.timed_field && n.timed_field->times().size() > 1) return n.timed_field->dt();
  if (n.op)
    for (const auto& c : n.op->children) {
      const double dt = slice_spacing_node(*c);
      if (dt > 0.0) return dt;
    }
  return 0.0;
}

}  // namespace

double slice_spacing(const Tlt& t) {
  if (!t.root) return 0.0;
  return slice_spacing_node(*t.root);
}

}  // namespace hjtlt
