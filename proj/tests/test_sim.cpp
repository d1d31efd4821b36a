#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hjtlt/errors.hpp"
#include "hjtlt/sim.hpp"

using namespace hjtlt;

namespace {

std::shared_ptr<const Grid> line(double lo, double hi, int n) {
  return std::make_shared<Grid>(std::vector<double>{lo}, std::vector<double>{hi},
                                std::vector<int>{n}, std::vector<bool>{false});
}

Labeling segments() {
  Labeling lab;
  lab.state_dim = 1;
  lab.regions.emplace("goal", SetExpr::box({-0.25}, {0.25}));
  lab.regions.emplace("left", SetExpr::box({-2.0}, {0.0}));
  lab.regions.emplace("right", SetExpr::box({0.0}, {2.0}));
  lab.regions.emplace("lane", SetExpr::box({-1.5}, {1.5}));
  return lab;
}

Tlt build(const std::string& text) {
  return construct(parse_formula(text), segments(), make_integrator1d(),
                   line(-2.0, 2.0, 81), 1.0);
}

NominalPolicy constant(double u) {
  return [u](std::span<const double>, double) { return std::vector<double>{u}; };
}

// 1-d trace over the two monitor test regions p = [0,10], q = [5,10]
Trajectory trace(const std::vector<double>& xs) {
  Trajectory tr;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    tr.times.push_back(0.5 * static_cast<double>(i));
    tr.states.push_back({xs[i]});
  }
  return tr;
}

Labeling pq() {
  Labeling lab;
  lab.state_dim = 1;
  lab.regions.emplace("p", SetExpr::box({0.0}, {10.0}));
  lab.regions.emplace("q", SetExpr::box({5.0}, {10.0}));
  lab.regions.emplace("r", SetExpr::box({-10.0}, {-5.0}));  // disjoint from p
  return lab;
}

const MonitorVerdict::Entry& entry(const MonitorVerdict& v, const std::string& text) {
  for (const auto& e : v.subformulas)
    if (e.formula == text) return e;
  REQUIRE_MESSAGE(false, "no monitor entry for '" << text << "'");
  static MonitorVerdict::Entry dummy;
  return dummy;
}

}  // namespace

TEST_CASE("monitor evaluates finite-trace semantics") {
  Labeling lab = pq();

  SUBCASE("always needs every sample, eventually any sample") {
    CHECK(monitor(trace({1, 2, 3}), parse_formula("G p"), lab).satisfied);
    CHECK_FALSE(monitor(trace({1, -1, 3}), parse_formula("G p"), lab).satisfied);
    CHECK(monitor(trace({1, 2, 6}), parse_formula("F q"), lab).satisfied);
    CHECK_FALSE(monitor(trace({1, 2, 3}), parse_formula("F q"), lab).satisfied);
  }

  SUBCASE("until needs the left operand at every sample before the right") {
    CHECK(monitor(trace({1, 2, 6}), parse_formula("p U q"), lab).satisfied);
    // p broken one sample before q arrives
    CHECK_FALSE(monitor(trace({1, -1, 6}), parse_formula("p U q"), lab).satisfied);
    // the left operand is not required at the sample where the right holds
    CHECK(monitor(trace({1, 2, -6}), parse_formula("p U r"), lab).satisfied);
    // wait for ever for q in vain
    CHECK_FALSE(monitor(trace({1, 2, 3}), parse_formula("p U q"), lab).satisfied);
    // q at the very first sample discharges immediately
    CHECK(monitor(trace({6, -1, -1}), parse_formula("p U q"), lab).satisfied);
  }

  SUBCASE("the margin relaxes atom membership") {
    CHECK_FALSE(monitor(trace({10.5}), parse_formula("p"), lab).satisfied);
    CHECK(monitor(trace({10.5}), parse_formula("p"), lab, 0.6).satisfied);
    CHECK_FALSE(monitor(trace({10.5}), parse_formula("p"), lab, 0.4).satisfied);
  }

  SUBCASE("literals") {
    CHECK(monitor(trace({-100}), parse_formula("true"), lab).satisfied);
    CHECK_FALSE(monitor(trace({1}), parse_formula("false"), lab).satisfied);
  }

  SUBCASE("subformula report carries first satisfaction times") {
    Formula f = parse_formula("p U q");
    MonitorVerdict v = monitor(trace({1, 2, 6, -3}), f, lab);
    CHECK(v.satisfied);
    CHECK(v.subformulas.size() == 3);  // root, p, q -- unique, in order
    CHECK(v.subformulas[0].formula == f.to_string());
    const auto& ep = entry(v, parse_formula("p").to_string());
    CHECK(ep.ever_satisfied);
    CHECK(ep.first_satisfied_time == 0.0);
    const auto& eq = entry(v, parse_formula("q").to_string());
    CHECK(eq.ever_satisfied);
    CHECK(eq.first_satisfied_time == 1.0);  // sample 2 at 0.5 spacing
    // the until itself first holds at sample 0 (q arrives later in the suffix)
    CHECK(v.subformulas[0].first_satisfied_time == 0.0);
    // a never-satisfied subformula reports so
    MonitorVerdict w = monitor(trace({1, 2, 3}), parse_formula("F q"), lab);
    CHECK_FALSE(entry(w, parse_formula("q").to_string()).ever_satisfied);
  }

  SUBCASE("validation") {
    Trajectory empty;
    CHECK_THROWS_AS(monitor(empty, parse_formula("p"), lab), ValidationError);
    Trajectory bad = trace({1, 2});
    bad.times.pop_back();
    CHECK_THROWS_AS(monitor(bad, parse_formula("p"), lab), ValidationError);
    Trajectory wide = trace({1});
    wide.states[0] = {1.0, 2.0};
    CHECK_THROWS_AS(monitor(wide, parse_formula("p"), lab), ValidationError);
    bool named = false;
    try {
      monitor(trace({1}), parse_formula("mystery"), lab);
    } catch (const ValidationError& e) {
      named = std::string(e.what()).find("mystery") != std::string::npos;
    }
    CHECK(named);
  }
}

TEST_CASE("monitor dualities hold on random traces") {
  Labeling lab = pq();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> x(-2.0, 12.0);
  std::uniform_int_distribution<int> len(1, 8);
  Formula gp = parse_formula("G p");
  Formula nfnp = parse_formula("!(F !p)");
  Formula fp = parse_formula("F p");
  Formula tup = parse_formula("true U p");
  Formula fe = Formula::eventually(Formula::atom("p"));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(len(rng));
    for (auto& v : xs) v = x(rng);
    Trajectory tr = trace(xs);
    CHECK(monitor(tr, gp, lab).satisfied == monitor(tr, nfnp, lab).satisfied);
    CHECK(monitor(tr, fp, lab).satisfied == monitor(tr, tup, lab).satisfied);
    CHECK(monitor(tr, fp, lab).satisfied == monitor(tr, fe, lab).satisfied);
  }
}

TEST_CASE("closed loop follows an admissible nominal unchanged") {
  Tlt t = build("lane U goal");
  const double dt = slice_spacing(t);
  std::vector<double> z0{-1.0};
  SimResult r = run_closed_loop(t, z0, constant(1.0));
  const std::size_t steps = static_cast<std::size_t>(std::llround(t.horizon / dt));
  REQUIRE(r.trajectory.states.size() == steps + 1);
  REQUIRE(r.trajectory.controls.size() == steps);
  CHECK(r.trajectory.times.front() == 0.0);
  CHECK(r.trajectory.times.back() == doctest::Approx(t.horizon));
  for (const auto& u : r.trajectory.controls) CHECK(u == std::vector<double>{1.0});
  for (std::size_t i = 0; i < r.trajectory.states.size(); ++i)
    CHECK(r.trajectory.states[i][0] ==
          doctest::Approx(-1.0 + static_cast<double>(i) * dt).epsilon(1e-9));
  CHECK(r.monitored_formula == t.formula);
  CHECK(r.events_applied.empty());
  CHECK_FALSE(r.stopped_on_satisfaction);
  CHECK(monitor(r.trajectory, t.formula, segments()).satisfied);
}

TEST_CASE("closed loop filters an adversarial nominal into completion") {
  Tlt t = build("lane U goal");
  std::vector<double> z0{-1.15};
  SimResult r = run_closed_loop(t, z0, constant(-1.0));  // push away from the goal
  // the admissible set must have overridden the nominal somewhere
  bool overridden = false;
  for (const auto& u : r.trajectory.controls)
    if (u != std::vector<double>{-1.0}) overridden = true;
  CHECK(overridden);
  // and the filtered run still completes the task
  Labeling lab = segments();
  CHECK(monitor(r.trajectory, t.formula, lab, t.grid->max_spacing()).satisfied);
}

TEST_CASE("closed loop rejects an uncertified start") {
  Tlt t = build("lane U goal");
  std::vector<double> z0{-1.9};
  CHECK_THROWS_AS(run_closed_loop(t, z0, constant(1.0)), InfeasibleError);
}

TEST_CASE("step size rules") {
  Tlt t = build("lane U goal");
  std::vector<double> z0{-1.0};
  SimOptions opts;

  SUBCASE("an explicit dt must match the stored slice spacing") {
    opts.dt = 0.05;
    CHECK_THROWS_AS(run_closed_loop(t, z0, constant(1.0), opts), ValidationError);
    opts.dt = slice_spacing(t);
    CHECK_NOTHROW(run_closed_loop(t, z0, constant(1.0), opts));
  }

  SUBCASE("dt must be positive") {
    opts.dt = -0.1;
    CHECK_THROWS_AS(run_closed_loop(t, z0, constant(1.0), opts), ValidationError);
  }

  SUBCASE("a static tree needs an explicit dt that divides the horizon") {
    Tlt s = construct(parse_formula("goal"), segments(), make_integrator1d(),
                      line(-2.0, 2.0, 81), 1.0);
    std::vector<double> inside{0.0};
    CHECK_THROWS_AS(run_closed_loop(s, inside, constant(0.0)), ValidationError);
    SimOptions so;
    so.dt = 0.3;  // does not divide the horizon
    CHECK_THROWS_AS(run_closed_loop(s, inside, constant(0.0), so), ValidationError);
    so.dt = 0.25;
    SimResult r = run_closed_loop(s, inside, constant(0.0), so);
    CHECK(r.trajectory.states.size() == 5);
  }
}

TEST_CASE("input validation") {
  Tlt t = build("lane U goal");
  std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(run_closed_loop(t, bad, constant(1.0)), ValidationError);
  std::vector<double> z0{-1.0};
  CHECK_THROWS_AS(run_closed_loop(t, z0, NominalPolicy{}), ValidationError);
}

TEST_CASE("a satisfied prefix ends the run early for always-free formulas") {
  Tlt t = build("lane U goal");
  Labeling lab = segments();
  std::vector<double> z0{-1.0};
  SimOptions opts;
  opts.stop_labeling = &lab;

  SimResult r = run_closed_loop(t, z0, constant(1.0), opts);
  CHECK(r.stopped_on_satisfaction);
  // goal boundary sits at -0.25, reached at t = 0.75 driving at full speed
  CHECK(r.trajectory.times.back() == doctest::Approx(0.75).epsilon(0.05));
  CHECK(r.trajectory.states.size() < 41);
  CHECK(monitor(r.trajectory, t.formula, lab).satisfied);

  SUBCASE("a stop margin relaxes the goal test and stops sooner") {
    SimOptions wide = opts;
    wide.stop_margin = 0.06;
    SimResult w = run_closed_loop(t, z0, constant(1.0), wide);
    CHECK(w.stopped_on_satisfaction);
    CHECK(w.trajectory.times.back() < r.trajectory.times.back());
  }

  SUBCASE("an always formula never stops early") {
    Tlt g = build("G lane");
    std::vector<double> mid{0.0};
    SimResult w = run_closed_loop(g, mid, constant(0.0), opts);
    CHECK_FALSE(w.stopped_on_satisfaction);
    CHECK(w.trajectory.states.size() == 41);
  }

  SUBCASE("no stop labeling means no early stop") {
    SimResult w = run_closed_loop(t, z0, constant(1.0));
    CHECK_FALSE(w.stopped_on_satisfaction);
    CHECK(w.trajectory.states.size() == 41);
  }
}

TEST_CASE("events prune the active tree mid-run") {
  Tlt t = build("(left U goal) | (right U goal)");
  std::vector<double> z0{-1.0};
  SimOptions opts;
  SimEvent ev;
  ev.time = 0.5;
  ev.remove_atoms = {"right"};
  opts.events = {ev};

  SimResult r = run_closed_loop(t, z0, constant(1.0), opts);
  REQUIRE(r.events_applied.size() == 1);
  CHECK(r.events_applied[0] == doctest::Approx(0.5));
  CHECK(r.monitored_formula == parse_formula("left U goal"));
  // the run still completes under the surviving branch
  CHECK(monitor(r.trajectory, r.monitored_formula, segments(),
                t.grid->max_spacing()).satisfied);

  SUBCASE("an event that removes every branch aborts the run") {
    SimOptions fatal;
    SimEvent kill;
    kill.time = 0.25;
    kill.remove_atoms = {"goal"};
    fatal.events = {kill};
    CHECK_THROWS_AS(run_closed_loop(t, z0, constant(1.0), fatal), InfeasibleError);
  }

  SUBCASE("events before the start apply at the first step") {
    SimOptions early;
    SimEvent pre;
    pre.time = -1.0;
    pre.remove_atoms = {"right"};
    early.events = {pre};
    SimResult w = run_closed_loop(t, z0, constant(1.0), early);
    REQUIRE(w.events_applied.size() == 1);
    CHECK(w.events_applied[0] == 0.0);
    CHECK(w.monitored_formula == parse_formula("left U goal"));
  }
}
