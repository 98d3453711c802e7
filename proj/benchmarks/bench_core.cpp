#include <benchmark/benchmark.h>

#include <vector>

#include "qerisk/bsde.hpp"
#include "qerisk/market_model.hpp"
#include "qerisk/measure.hpp"
#include "qerisk/payoff.hpp"
#include "qerisk/random.hpp"
#include "qerisk/regression.hpp"

using namespace qerisk;

namespace {

const LevyModel kDesk{0.0, 0.1, 0.3, {{-0.2, 1.5}}};

void BM_SimulatePaths(benchmark::State& state) {
  const auto grid = build_grid(1.0, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_paths(grid, kDesk, state.range(0), 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}
BENCHMARK(BM_SimulatePaths)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Projector(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  CounterStream rng(1, 0);
  std::vector<double> x(n), y(n), fitted(n);
  for (std::size_t m = 0; m < n; ++m) {
    x[m] = rng.normal();
    y[m] = x[m] * x[m] + rng.normal();
  }
  const std::vector<std::span<const double>> cols{x};
  for (auto _ : state) {
    const ConditionalProjector p(cols, RegressionConfig{});
    p.project(y, fitted);
    benchmark::DoNotOptimize(fitted.data());
  }
}
BENCHMARK(BM_Projector)->Arg(10000)->Arg(200000)->Unit(benchmark::kMicrosecond);

void BM_SolveEntropic(benchmark::State& state) {
  const auto b = simulate_paths(build_grid(1.0, 50), kDesk, state.range(0), 42);
  const auto driver = make_entropic_driver(2.0, kDesk.intensities());
  const auto terminal = terminal_values(b, Payoff::affine(0.0, -1.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_bsde(b, driver, terminal));
}
BENCHMARK(BM_SolveEntropic)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_DoleansDade(benchmark::State& state) {
  const auto paths = state.range(0);
  const auto b = simulate_paths(build_grid(1.0, 50), kDesk, paths, 42);
  const auto m = static_cast<std::size_t>(paths);
  for (auto _ : state) {
    std::vector<PathField> phi;
    phi.emplace_back(50, m, 0.3);
    benchmark::DoNotOptimize(doleans_dade(b, PathField(50, m, 0.4), std::move(phi)));
  }
}
BENCHMARK(BM_DoleansDade)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
