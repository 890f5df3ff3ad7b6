#include "obsopt/example3.hpp"
#include "obsopt/kernels.hpp"
#include "obsopt/optimality_test.hpp"
#include "obsopt/prescriptive_nonparam.hpp"

#include <benchmark/benchmark.h>

#include <array>

using namespace obsopt;

static void BM_KernelEval(benchmark::State& state)
{
  const auto family = static_cast<KernelFamily>(state.range(0));
  const auto spec = KernelSpec::make(family, 2);
  std::array<double, 2> u{ 0.3, -0.7 };
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_eval(spec, u));
    u[0] += 1e-9;
  }
  state.SetLabel(to_string(family));
}
BENCHMARK(BM_KernelEval)
  ->Arg(static_cast<int>(KernelFamily::gaussian2))
  ->Arg(static_cast<int>(KernelFamily::gaussian4))
  ->Arg(static_cast<int>(KernelFamily::epanechnikov));

static void BM_PartialMeanCurve(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = gen_example3({}, n, 1);
  const auto kernel = KernelSpec::make(KernelFamily::gaussian2, 2, BandwidthRule::rate(0.1));
  const double h = bandwidth(kernel, n);
  const auto space = DecisionSpace::interval(0.0, 5.0, 51);
  for (auto _ : state) {
    PartialMeanCurve curve(data, kernel, h, RewardSpec::margin(0.0), space);
    benchmark::DoNotOptimize(curve.grid_values().data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_PartialMeanCurve)->RangeMultiplier(2)->Range(200, 1600)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_Bootstrap(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = gen_example3({}, n, 2);
  TestConfig config;
  config.B = 10;
  config.seed = 3;
  const auto reward = RewardSpec::margin(0.0);
  const auto stat = test_statistic(data, 2.5, config, reward);
  for (auto _ : state)
    benchmark::DoNotOptimize(bootstrap_gamma(*stat.curve, stat.z_bar, config).gamma_hat);
}
BENCHMARK(BM_Bootstrap)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
