#include <benchmark/benchmark.h>

#include "loglap/eigen.hpp"
#include "loglap/forms.hpp"
#include "loglap/operator.hpp"

using namespace loglap;

namespace {

DomainPtr interval_cells(int cells) {
  return build_grid(Shape::interval, {0.0, 0.3}, 0.3 / cells);
}

}  // namespace

static void BM_AssembleWeights(benchmark::State& state) {
  const DomainPtr d = interval_cells(static_cast<int>(state.range(0)));
  const Params par(1, 0.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_weights(d, par, KernelPart::full));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleWeights)->RangeMultiplier(2)->Range(50, 400)->Unit(benchmark::kMillisecond);

static void BM_AssembleBox(benchmark::State& state) {
  const DomainPtr d = build_grid(Shape::box, {0.0, 0.2, 0.0, 0.2}, 0.2 / state.range(0));
  const Params par(2, 0.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_weights(d, par, KernelPart::full));
}
BENCHMARK(BM_AssembleBox)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_Energy(benchmark::State& state) {
  const DomainPtr d = interval_cells(static_cast<int>(state.range(0)));
  const FormTables t = build_form_tables(d, Params(1, 0.5, 2.5));
  const GridFunction u = sample_function(d, SampleSource::random(1));
  for (auto _ : state) benchmark::DoNotOptimize(energy(u, t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Energy)->RangeMultiplier(2)->Range(100, 1600)->Complexity(benchmark::oNSquared);

static void BM_Gradient(benchmark::State& state) {
  const DomainPtr d = interval_cells(static_cast<int>(state.range(0)));
  const FormTables t = build_form_tables(d, Params(1, 0.5, 2.5));
  const GridFunction u = sample_function(d, SampleSource::random(1));
  for (auto _ : state) benchmark::DoNotOptimize(energy_gradient(u, t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gradient)->RangeMultiplier(2)->Range(100, 1600)->Complexity(benchmark::oNSquared);

static void BM_EvalLogPlap(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const TestFunction u = functions::gaussian(N);
  const Point x{0.3, 0.1, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(eval_log_plap(u, x, N, 0.5, 2.5));
}
BENCHMARK(BM_EvalLogPlap)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_EigenBaseline(benchmark::State& state) {
  const FormTables t = build_form_tables(interval_cells(100), Params(1, 0.5, 2.0));
  EigenConfig c;
  c.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(minimize_first(t, c));
}
BENCHMARK(BM_EigenBaseline)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
