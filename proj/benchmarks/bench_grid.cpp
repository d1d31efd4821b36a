#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hjtlt/grid.hpp"

namespace {

using namespace hjtlt;

std::shared_ptr<const Grid> bench_grid() {
  return std::make_shared<Grid>(std::vector<double>{-2.0, -2.0, -3.141592653589793},
                                std::vector<double>{2.0, 2.0, 3.141592653589793},
                                std::vector<int>{41, 41, 41},
                                std::vector<bool>{false, false, true});
}

ValueField bench_field(std::shared_ptr<const Grid> g) {
  ValueField v(g);
  std::vector<double> z(3);
  for (std::size_t i = 0; i < g->size(); ++i) {
    g->point(i, z);
    v.data()[i] = z[0] * z[0] + z[1] * z[1] - 1.0;
  }
  return v;
}

void BM_Interpolate(benchmark::State& state) {
  auto g = bench_grid();
  ValueField v = bench_field(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dx(-2.0, 2.0);
  std::uniform_real_distribution<double> dth(-3.0, 3.0);
  std::vector<std::vector<double>> pts(1024);
  for (auto& p : pts) p = {dx(rng), dx(rng), dth(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate(v, pts[i]));
    i = (i + 1) & 1023;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Interpolate);

void BM_InterpolateGradient(benchmark::State& state) {
  auto g = bench_grid();
  ValueField v = bench_field(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dx(-2.0, 2.0);
  std::vector<std::vector<double>> pts(1024);
  for (auto& p : pts) p = {dx(rng), dx(rng), dx(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate_gradient(v, pts[i]));
    i = (i + 1) & 1023;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_InterpolateGradient);

}  // namespace

BENCHMARK_MAIN();
