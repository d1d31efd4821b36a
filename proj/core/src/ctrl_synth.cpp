#include "hjtlt/ctrl_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "hjtlt/ctrl_exists.hpp"
#include "hjtlt/errors.hpp"
#include "hjtlt/formula.hpp"

namespace hjtlt {

HalfSpace half_space_at(const TimedValueField& v, const ControlAffineModel& model,
                        std::span<const double> z, double t) {
  const Grid& g = v.grid();
  const int nx = g.dim();
  const int nu = model.control_dim;
  if (static_cast<int>(z.size()) != nx)
    throw ValidationError("half_space_at: state dimension mismatch");
  const double s = t - v.horizon();
  const std::size_t k = v.slice_index(s);
  if (k == 0)
    throw ValidationError(
        "half_space_at: query time rounds to the end of the horizon; "
        "no later slice exists to constrain against");
  const double dt = v.dt();

  const std::vector<double> grad = interpolate_gradient(v.slices()[k], z);
  const double v_next = interpolate(v.slices()[k - 1], z);

  std::vector<double> f(nx, 0.0);
  std::vector<double> gmat(static_cast<std::size_t>(nx) * nu, 0.0);
  model.drift(z, f);
  model.input_matrix(z, gmat);

  HalfSpace h;
  h.b.assign(nu, 0.0);
  double drift_term = 0.0;
  for (int d = 0; d < nx; ++d) {
    drift_term += grad[d] * f[d];
    for (int j = 0; j < nu; ++j)
      h.b[j] += grad[d] * gmat[static_cast<std::size_t>(d) * nu + j] * dt;
  }
  h.a = v_next + drift_term * dt;
  return h;
}

namespace {

// Minimum of a + b.u over the control box; the cell is satisfiable iff the
// minimum over all its half-spaces' common feasible region is nonpositive,
// which for a single half-space reduces to this corner evaluation.
double half_space_min(const HalfSpace& h, const std::vector<double>& u_min,
                      const std::vector<double>& u_max) {
  double m = h.a;
  for (std::size_t j = 0; j < h.b.size(); ++j)
    m += std::min(h.b[j] * u_min[j], h.b[j] * u_max[j]);
  return m;
}

bool half_space_equal(const HalfSpace& x, const HalfSpace& y) {
  return x.a == y.a && x.b == y.b;
}

bool cell_equal(const ControlCell& x, const ControlCell& y) {
  if (x.half_spaces.size() != y.half_spaces.size()) return false;
  for (std::size_t i = 0; i < x.half_spaces.size(); ++i)
    if (!half_space_equal(x.half_spaces[i], y.half_spaces[i])) return false;
  return true;
}

// Necessary satisfiability check: every half-space individually reaches a
// nonpositive value somewhere in the box.  (Joint satisfiability of several
// half-spaces is settled later by sampling; an individually unsatisfiable
// half-space makes the whole cell provably empty and safe to drop.)
bool cell_possibly_satisfiable(const ControlCell& c, const std::vector<double>& u_min,
                               const std::vector<double>& u_max) {
  for (const auto& h : c.half_spaces)
    if (half_space_min(h, u_min, u_max) > 0.0) return false;
  return true;
}

// Membership-only walk, mirroring control_tree's member/non-member decisions
// without touching half-space construction (usable at any time, including
// the end of the horizon where no next slice exists).  A positive margin
// erodes every set by that much in value units.
bool member_walk(const SetNode& n, std::span<const double> z, double time, double margin) {
  if (n.is_leaf() || (n.op && n.op->kind == OpKind::Not))
    return node_value(n, z, time) <= -margin;
  const OpNode& op = *n.op;
  switch (op.kind) {
    case OpKind::And:
      for (const auto& c : op.children)
        if (!member_walk(*c, z, time, margin)) return false;
      return true;
    case OpKind::Or:
      for (const auto& c : op.children)
        if (member_walk(*c, z, time, margin)) return true;
      return false;
    case OpKind::Until:
      return member_walk(*op.children[1], z, time, margin) ||
             node_value(n, z, time) <= -margin;
    case OpKind::Always:
      return node_value(n, z, time) <= -margin;
    case OpKind::Not:
      break;  // handled above
  }
  throw Error("member_walk: unreachable operator kind");
}

// Pass 1: membership walk.  Returns the cells contributed by this subtree,
// or nullopt when the state is not a member of the subtree's set (an
// infeasible operand).  Conjunction = pairwise product of operand cells,
// disjunction = union over member operands, reachability node = single
// half-space, other nodes = membership test only.
std::optional<std::vector<ControlCell>> control_tree(const SetNode& n, const Tlt& t,
                                                     std::span<const double> z, double time) {
  if (n.is_leaf() || (n.op && n.op->kind == OpKind::Not)) {
    if (node_value(n, z, time) <= 0.0) return std::vector<ControlCell>{ControlCell{}};
    return std::nullopt;
  }
  const OpNode& op = *n.op;
  switch (op.kind) {
    case OpKind::And: {
      std::vector<ControlCell> acc{ControlCell{}};
      for (const auto& c : op.children) {
        auto part = control_tree(*c, t, z, time);
        if (!part) return std::nullopt;
        std::vector<ControlCell> next;
        next.reserve(acc.size() * part->size());
        for (const auto& a : acc)
          for (const auto& b : *part) {
            ControlCell merged = a;
            merged.half_spaces.insert(merged.half_spaces.end(), b.half_spaces.begin(),
                                      b.half_spaces.end());
            next.push_back(std::move(merged));
          }
        acc = std::move(next);
      }
      return acc;
    }
    case OpKind::Or: {
      std::vector<ControlCell> acc;
      for (const auto& c : op.children) {
        auto part = control_tree(*c, t, z, time);
        if (part)
          acc.insert(acc.end(), std::make_move_iterator(part->begin()),
                     std::make_move_iterator(part->end()));
      }
      if (acc.empty()) return std::nullopt;
      return acc;
    }
    case OpKind::Until: {
      // Once the state sits inside the target operand's set the until
      // obligation is already met at this sample; the node then defers to
      // whatever the target subtree itself requires (nothing, for a plain
      // region) instead of constraining further descent.
      if (auto done = control_tree(*op.children[1], t, z, time)) return done;
      if (node_value(n, z, time) > 0.0) return std::nullopt;
      HalfSpace h = half_space_at(*n.timed_field, *t.model, z, time);
      ControlCell cell;
      cell.half_spaces.push_back(std::move(h));
      return std::vector<ControlCell>{std::move(cell)};
    }
    case OpKind::Always: {
      if (node_value(n, z, time) > 0.0) return std::nullopt;
      HalfSpace h = half_space_at(*n.timed_field, *t.model, z, time);
      ControlCell cell;
      cell.half_spaces.push_back(std::move(h));
      return std::vector<ControlCell>{std::move(cell)};
    }
    case OpKind::Not:
      break;  // handled above
  }
  throw Error("control_tree: unreachable operator kind");
}

// Pass 2: compression.  Dedupe half-spaces within cells, drop provably empty
// cells and duplicate cells, and collapse the union to one unconstrained
// cell when any cell imposes no constraint.
std::vector<ControlCell> compress_cells(std::vector<ControlCell> cells,
                                        const std::vector<double>& u_min,
                                        const std::vector<double>& u_max) {
  for (auto& c : cells) {
    std::vector<HalfSpace> kept;
    for (auto& h : c.half_spaces) {
      bool dup = false;
      for (const auto& k : kept)
        if (half_space_equal(k, h)) {
          dup = true;
          break;
        }
      if (!dup) kept.push_back(std::move(h));
    }
    c.half_spaces = std::move(kept);
  }
  std::vector<ControlCell> out;
  for (auto& c : cells) {
    if (!cell_possibly_satisfiable(c, u_min, u_max)) continue;
    if (c.half_spaces.empty()) return {ControlCell{}};  // whole box
    bool dup = false;
    for (const auto& k : out)
      if (cell_equal(k, c)) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(std::move(c));
  }
  return out;
}

bool cell_contains(const ControlCell& c, std::span<const double> u) {
  for (const auto& h : c.half_spaces) {
    double v = h.a;
    for (std::size_t j = 0; j < h.b.size(); ++j) v += h.b[j] * u[j];
    if (v > 0.0) return false;
  }
  return true;
}

std::vector<double> lattice_point(const ControlSet& cs, int points_per_dim,
                                  const std::vector<int>& idx) {
  std::vector<double> u(cs.u_min.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (points_per_dim == 1 || cs.u_min[j] == cs.u_max[j]) {
      u[j] = cs.u_min[j];
    } else {
      const double w = static_cast<double>(idx[j]) / (points_per_dim - 1);
      u[j] = cs.u_min[j] + w * (cs.u_max[j] - cs.u_min[j]);
    }
  }
  return u;
}

template <typename Fn>
void for_each_lattice(std::size_t nu, int points_per_dim, Fn&& fn) {
  std::vector<int> idx(nu, 0);
  while (true) {
    fn(idx);
    std::size_t d = nu;
    while (d > 0) {
      --d;
      if (++idx[d] < points_per_dim) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (nu == 0) return;
  }
}

}  // namespace

ControlSet least_restrictive_ctrl(const Tlt& t, std::span<const double> z, double time) {
  if (!t.root || !t.model || !t.grid)
    throw ValidationError("least_restrictive_ctrl: tree is not fully constructed");
  if (static_cast<int>(z.size()) != t.model->state_dim)
    throw ValidationError("least_restrictive_ctrl: state dimension mismatch");
  if (!(time >= 0.0) || !(time <= t.horizon + 1e-9))
    throw ValidationError("least_restrictive_ctrl: time outside [0, horizon]");
  if (!negations_atomic_only(t.formula))
    throw ValidationError(
        "least_restrictive_ctrl: control synthesis requires negations to apply "
        "to atoms only");
  const ApproxDirection v = ctrl_exists_verdict(*t.root);
  if (v != ApproxDirection::Under && v != ApproxDirection::Exact)
    throw ValidationError(
        "least_restrictive_ctrl: tree verdict '" + std::string(to_string(v)) +
        "' grants no completion guarantee");

  auto cells = control_tree(*t.root, t, z, time);
  if (!cells)
    throw InfeasibleError(
        "least_restrictive_ctrl: state is outside the certified satisfaction set "
        "at the query time");

  ControlSet cs;
  cs.u_min = t.model->u_min;
  cs.u_max = t.model->u_max;
  cs.cells = compress_cells(std::move(*cells), cs.u_min, cs.u_max);
  return cs;
}

bool in_satisfaction_set(const Tlt& t, std::span<const double> z, double time,
                         double margin) {
  if (!t.root || !t.model || !t.grid)
    throw ValidationError("in_satisfaction_set: tree is not fully constructed");
  if (static_cast<int>(z.size()) != t.model->state_dim)
    throw ValidationError("in_satisfaction_set: state dimension mismatch");
  if (margin < 0.0) throw ValidationError("in_satisfaction_set: margin must be >= 0");
  return member_walk(*t.root, z, time, margin);
}

bool contains_control(const ControlSet& cs, std::span<const double> u) {
  if (u.size() != cs.u_min.size()) return false;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (u[j] < cs.u_min[j] || u[j] > cs.u_max[j]) return false;
  for (const auto& c : cs.cells)
    if (cell_contains(c, u)) return true;
  return false;
}

std::vector<double> sample_control(const ControlSet& cs, std::span<const double> u_nominal,
                                   int points_per_dim) {
  if (u_nominal.size() != cs.u_min.size())
    throw ValidationError("sample_control: control dimension mismatch");
  if (points_per_dim < 1) throw ValidationError("sample_control: points_per_dim must be >= 1");
  if (contains_control(cs, u_nominal))
    return std::vector<double>(u_nominal.begin(), u_nominal.end());

  std::vector<double> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for_each_lattice(cs.u_min.size(), points_per_dim, [&](const std::vector<int>& idx) {
    std::vector<double> u = lattice_point(cs, points_per_dim, idx);
    if (!contains_control(cs, u)) return;
    double d2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double d = u[j] - u_nominal[j];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = std::move(u);
    }
  });
  if (!std::isfinite(best_d2))
    throw InfeasibleError("sample_control: no admissible control on the sampling lattice");
  return best;
}

std::vector<std::vector<double>> feasible_lattice(const ControlSet& cs, int points_per_dim) {
  if (points_per_dim < 1) throw ValidationError("feasible_lattice: points_per_dim must be >= 1");
  std::vector<std::vector<double>> out;
  for_each_lattice(cs.u_min.size(), points_per_dim, [&](const std::vector<int>& idx) {
    std::vector<double> u = lattice_point(cs, points_per_dim, idx);
    if (contains_control(cs, u)) out.push_back(std::move(u));
  });
  return out;
}

}  // namespace hjtlt
