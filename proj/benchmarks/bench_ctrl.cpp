#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hjtlt/ctrl_synth.hpp"
#include "hjtlt/geometry.hpp"
#include "hjtlt/tlt.hpp"

namespace {

using namespace hjtlt;

const Tlt& query_tree() {
  static Tlt tree = [] {
    auto g = std::make_shared<Grid>(std::vector<double>{-2.0}, std::vector<double>{2.0},
                                    std::vector<int>{401}, std::vector<bool>{false});
    Labeling lab;
    lab.state_dim = 1;
    lab.regions.emplace("goal", SetExpr::box({-0.25}, {0.25}));
    return construct(parse_formula("F goal"), lab, make_integrator1d(), g, 1.0);
  }();
  return tree;
}

void BM_CtrlQuery(benchmark::State& state) {
  const Tlt& tree = query_tree();
  std::mt19937_64 rng(11);
  // Kept well inside the tube at every sampled time so each query succeeds.
  std::uniform_real_distribution<double> dz(-0.2, 0.2);
  std::uniform_real_distribution<double> dt01(0.0, 0.7);
  for (auto _ : state) {
    const std::vector<double> z{dz(rng)};
    ControlSet cs = least_restrictive_ctrl(tree, z, dt01(rng));
    benchmark::DoNotOptimize(cs.cells.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CtrlQuery)->Unit(benchmark::kMicrosecond);

void BM_SampleControl(benchmark::State& state) {
  const Tlt& tree = query_tree();
  ControlSet cs = least_restrictive_ctrl(tree, std::vector<double>{0.6}, 0.1);
  const std::vector<double> nominal{1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_control(cs, nominal));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleControl);

}  // namespace
