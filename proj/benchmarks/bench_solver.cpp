#include <benchmark/benchmark.h>

#include <vector>

#include "hjtlt/dynamics.hpp"
#include "hjtlt/geometry.hpp"
#include "hjtlt/grid.hpp"
#include "hjtlt/hj_solver.hpp"

namespace {

using namespace hjtlt;

// One Lax-Friedrichs sweep over a 41^3 grid: the horizon is chosen below the
// CFL bound so the solve performs exactly one step.
void BM_ReachStep41Cubed(benchmark::State& state) {
  auto g = std::make_shared<Grid>(std::vector<double>{-2.0, -2.0, -3.141592653589793},
                                  std::vector<double>{2.0, 2.0, 3.141592653589793},
                                  std::vector<int>{41, 41, 41},
                                  std::vector<bool>{false, false, true});
  auto model = make_dubins3(1.0, 1.0);
  ValueField target = discretize(
      SetExpr::box(std::vector<int>{0, 1}, {1.2, -0.4}, {1.8, 0.4}), g);
  SolveOptions opts;
  opts.horizon = 0.015;  // below the CFL step bound for this grid and model
  for (auto _ : state) {
    TimedValueField v = solve_reach(target, nullptr, *model, opts);
    benchmark::DoNotOptimize(v.slices().back().data().data());
    if (v.slices().back().data().empty()) state.SkipWithError("empty solve");
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g->size()));
}
BENCHMARK(BM_ReachStep41Cubed)->Unit(benchmark::kMillisecond);

}  // namespace
