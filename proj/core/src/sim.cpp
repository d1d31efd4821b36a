#include "hjtlt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

#include "hjtlt/errors.hpp"

namespace hjtlt {

SimResult run_closed_loop(const Tlt& t, std::span<const double> z0,
                          const NominalPolicy& nominal, const SimOptions& opts) {
  if (!t.root || !t.model || !t.grid)
    throw ValidationError("run_closed_loop: tree is not fully constructed");
  if (static_cast<int>(z0.size()) != t.model->state_dim)
    throw ValidationError("run_closed_loop: initial state dimension mismatch");
  if (!nominal) throw ValidationError("run_closed_loop: nominal policy is empty");

  const double tube_dt = slice_spacing(t);
  double dt = opts.dt;
  if (dt == 0.0) {
    if (tube_dt == 0.0)
      throw ValidationError(
          "run_closed_loop: an explicit dt is required when the tree stores no "
          "time-dependent sets");
    dt = tube_dt;
  } else {
    if (!(dt > 0.0)) throw ValidationError("run_closed_loop: dt must be positive");
    if (tube_dt > 0.0 && std::abs(dt - tube_dt) > 1e-9 * std::max(1.0, tube_dt))
      throw ValidationError(
          "run_closed_loop: dt must equal the stored slice spacing of the tree's "
          "tubes");
  }
  const double steps_real = t.horizon / dt;
  const long long steps = std::llround(steps_real);
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-6)
    throw ValidationError("run_closed_loop: dt must divide the horizon");

  std::vector<SimEvent> events = opts.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });
  std::size_t next_event = 0;

  std::vector<std::unique_ptr<Tlt>> pruned;  // keeps replaced trees alive
  const Tlt* active = &t;

  SimResult result;
  std::vector<double> z(z0.begin(), z0.end());
  result.trajectory.times.push_back(0.0);
  result.trajectory.states.push_back(z);

  // The emitted prefix is judged against the formula active when the newest
  // sample was recorded; an event at the same timestamp has not yet applied.
  auto prefix_satisfied = [&]() {
    if (!opts.stop_labeling || contains_always(active->formula)) return false;
    return monitor(result.trajectory, active->formula, *opts.stop_labeling, opts.stop_margin)
        .satisfied;
  };

  for (long long i = 0; i < steps; ++i) {
    const double time = static_cast<double>(i) * dt;
    if (prefix_satisfied()) {
      result.stopped_on_satisfaction = true;
      break;
    }
    while (next_event < events.size() && events[next_event].time <= time + 1e-9) {
      pruned.push_back(std::make_unique<Tlt>(prune(*active, events[next_event].remove_atoms)));
      active = pruned.back().get();
      result.events_applied.push_back(time);
      ++next_event;
    }

    ControlSet cs = least_restrictive_ctrl(*active, z, time);
    std::vector<double> u_nom = nominal(z, time);
    std::vector<double> u = sample_control(cs, u_nom, opts.points_per_dim);

    // The half-spaces predict one slice ahead through a linearisation, so a
    // control on their boundary can land the real step a hair outside the
    // set -- and repeated zero-margin landings can ride the boundary until
    // nothing recovers.  Validate the landing with a little slack; when it
    // fails, fall back to the admissible lattice control nearest the nominal
    // whose realised next state keeps the slack, then to one that is at
    // least still inside, and keep the original pick when none is.
    const double eta = 0.02 * t.grid->max_spacing();
    std::vector<double> z_next = step(*t.model, z, u, dt);
    const double t_next = static_cast<double>(i + 1) * dt;
    if (!in_satisfaction_set(*active, z_next, t_next, eta)) {
      auto lattice = feasible_lattice(cs, opts.points_per_dim);
      for (double margin : {eta, 0.0}) {
        double best_d2 = std::numeric_limits<double>::infinity();
        bool found = false;
        for (const auto& cand : lattice) {
          std::vector<double> landing = step(*t.model, z, cand, dt);
          if (!in_satisfaction_set(*active, landing, t_next, margin)) continue;
          double d2 = 0.0;
          for (std::size_t j = 0; j < cand.size(); ++j) {
            const double d = cand[j] - u_nom[j];
            d2 += d * d;
          }
          if (d2 < best_d2) {
            best_d2 = d2;
            u = cand;
            z_next = std::move(landing);
            found = true;
          }
        }
        if (found) break;
      }
    }

    result.trajectory.controls.push_back(u);
    z = std::move(z_next);
    result.trajectory.times.push_back(static_cast<double>(i + 1) * dt);
    result.trajectory.states.push_back(z);
  }

  result.monitored_formula = active->formula;
  return result;
}

namespace {

class MonitorEval {
 public:
  MonitorEval(const Trajectory& traj, const Labeling& labeling, double margin)
      : traj_(traj), labeling_(labeling), margin_(margin), n_(traj.states.size()) {}

  const std::vector<char>& eval(const Formula& f) {
    auto it = memo_.find(f.identity());
    if (it != memo_.end()) return it->second;
    std::vector<char> sat(n_, 0);
    switch (f.kind()) {
      case Formula::Kind::True:
        std::fill(sat.begin(), sat.end(), 1);
        break;
      case Formula::Kind::False:
        break;
      case Formula::Kind::Atom: {
        auto reg = labeling_.regions.find(f.atom_name());
        if (reg == labeling_.regions.end())
          throw ValidationError("monitor: formula references atom '" + f.atom_name() +
                                "' missing from the labeling");
        for (std::size_t i = 0; i < n_; ++i)
          sat[i] = reg->second.eval_surface(traj_.states[i]) <= margin_ ? 1 : 0;
        break;
      }
      case Formula::Kind::Not: {
        const auto& a = eval(f.lhs());
        for (std::size_t i = 0; i < n_; ++i) sat[i] = a[i] ? 0 : 1;
        break;
      }
      case Formula::Kind::And: {
        const auto& a = eval(f.lhs());
        const auto& b = eval(f.rhs());
        for (std::size_t i = 0; i < n_; ++i) sat[i] = (a[i] && b[i]) ? 1 : 0;
        break;
      }
      case Formula::Kind::Or: {
        const auto& a = eval(f.lhs());
        const auto& b = eval(f.rhs());
        for (std::size_t i = 0; i < n_; ++i) sat[i] = (a[i] || b[i]) ? 1 : 0;
        break;
      }
      case Formula::Kind::Until: {
        const auto& a = eval(f.lhs());
        const auto& b = eval(f.rhs());
        sat[n_ - 1] = b[n_ - 1];
        for (std::size_t i = n_ - 1; i-- > 0;)
          sat[i] = (b[i] || (a[i] && sat[i + 1])) ? 1 : 0;
        break;
      }
      case Formula::Kind::Eventually: {
        const auto& a = eval(f.lhs());
        sat[n_ - 1] = a[n_ - 1];
        for (std::size_t i = n_ - 1; i-- > 0;) sat[i] = (a[i] || sat[i + 1]) ? 1 : 0;
        break;
      }
      case Formula::Kind::Always: {
        const auto& a = eval(f.lhs());
        sat[n_ - 1] = a[n_ - 1];
        for (std::size_t i = n_ - 1; i-- > 0;) sat[i] = (a[i] && sat[i + 1]) ? 1 : 0;
        break;
      }
    }
    auto [pos, inserted] = memo_.emplace(f.identity(), std::move(sat));
    (void)inserted;
    return pos->second;
  }

  void collect(const Formula& f, MonitorVerdict& out) {
    if (!seen_.insert(f.identity()).second) return;
    MonitorVerdict::Entry e;
    e.formula = f.to_string();
    const auto& sat = memo_.at(f.identity());
    for (std::size_t i = 0; i < n_; ++i)
      if (sat[i]) {
        e.ever_satisfied = true;
        e.first_satisfied_time = traj_.times[i];
        break;
      }
    out.subformulas.push_back(std::move(e));
    switch (f.kind()) {
      case Formula::Kind::True:
      case Formula::Kind::False:
      case Formula::Kind::Atom:
        break;
      case Formula::Kind::Not:
      case Formula::Kind::Eventually:
      case Formula::Kind::Always:
        collect(f.lhs(), out);
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Until:
        collect(f.lhs(), out);
        collect(f.rhs(), out);
        break;
    }
  }

 private:
  const Trajectory& traj_;
  const Labeling& labeling_;
  double margin_;
  std::size_t n_;
  std::unordered_map<const void*, std::vector<char>> memo_;
  std::set<const void*> seen_;
};

}  // namespace

MonitorVerdict monitor(const Trajectory& traj, const Formula& f, const Labeling& labeling,
                       double margin) {
  if (traj.states.empty()) throw ValidationError("monitor: trajectory has no samples");
  if (traj.times.size() != traj.states.size())
    throw ValidationError("monitor: times/states length mismatch");
  for (const auto& s : traj.states)
    if (static_cast<int>(s.size()) != labeling.state_dim && labeling.state_dim != 0)
      throw ValidationError("monitor: state dimension does not match the labeling");

  MonitorEval ev(traj, labeling, margin);
  const std::vector<char>& root = ev.eval(f);
  MonitorVerdict out;
  out.satisfied = root[0] != 0;
  ev.collect(f, out);
  return out;
}

}  // namespace hjtlt
