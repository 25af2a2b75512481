#include <benchmark/benchmark.h>

#include "ppd/coins.hpp"
#include "ppd/gp.hpp"
#include "ppd/posterior.hpp"

namespace {

void BM_MisspecifiedSweep(benchmark::State& state) {
  const ppd::coins::CoinPrior prior({0.3, 0.6});
  const std::vector<std::uint64_t> ns{static_cast<std::uint64_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ppd::coins::misspecified_sweep(prior, 0.5, ns));
}
BENCHMARK(BM_MisspecifiedSweep)->Arg(1024)->Arg(1 << 20);

void BM_CountingCurve(benchmark::State& state) {
  const auto prior = ppd::coins::CoinPrior::percent_grid();
  const std::vector<std::uint64_t> ks{1, 2, 4, 8, 16, 32, 64};
  for (auto _ : state) benchmark::DoNotOptimize(ppd::coins::counting_curve(prior, ks));
}
BENCHMARK(BM_CountingCurve);

void BM_GPFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ppd::Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    d.push_back({x, x < 0.5 ? 0.0 : 1.0});
  }
  for (auto _ : state) benchmark::DoNotOptimize(ppd::gp::GPPosterior::fit({}, d));
}
BENCHMARK(BM_GPFit)->Arg(10)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_GPPredict(benchmark::State& state) {
  ppd::Dataset d;
  for (int i = 0; i < 400; ++i) d.push_back({i / 399.0, i < 200 ? 0.0 : 1.0});
  const auto gp = ppd::gp::GPPosterior::fit({}, d);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.latent_variance(x));
    x = x > 1.0 ? 0.0 : x + 1e-3;
  }
}
BENCHMARK(BM_GPPredict);

}  // namespace
