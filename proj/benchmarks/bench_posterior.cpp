#include <benchmark/benchmark.h>

#include "ppd/logmath.hpp"
#include "ppd/posterior.hpp"

namespace {

const ppd::FinitePrior& step() {
  static const ppd::FinitePrior p = ppd::step_prior();
  return p;
}

void BM_LogSumExpBlocked(benchmark::State& state) {
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -static_cast<double>(i % 977) * 0.37;
  for (auto _ : state) benchmark::DoNotOptimize(ppd::log_sum_exp_blocked(v, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogSumExpBlocked)->Arg(1 << 12)->Arg(1 << 20);

// Full step prior, n context points.
void BM_PosteriorStepPrior(benchmark::State& state) {
  const auto s = ppd::sample_dataset(step(), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(ppd::posterior(step(), s.data, {1}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(step().size()));
}
BENCHMARK(BM_PosteriorStepPrior)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_PosteriorUpdateOnePoint(benchmark::State& state) {
  const auto s = ppd::sample_dataset(step(), 51, 2);
  const std::span<const ppd::Example> all(s.data);
  const auto w = ppd::posterior(step(), all.first(50), {1});
  for (auto _ : state) benchmark::DoNotOptimize(ppd::posterior_update(step(), w, all.subspan(50), {1}));
}
BENCHMARK(BM_PosteriorUpdateOnePoint)->Unit(benchmark::kMillisecond);

// Mean/variance/quantiles on the step prior after 50 points.
void BM_PPDStepPrior(benchmark::State& state) {
  const auto s = ppd::sample_dataset(step(), 50, 3);
  const auto w = ppd::posterior(step(), s.data, {1});
  const auto xs = ppd::linspace(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  ppd::PPDOptions o;
  o.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ppd::ppd(step(), w, xs, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PPDStepPrior)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_PPDMixtureWithDensity(benchmark::State& state) {
  const auto prior = ppd::sine_line_prior();
  const auto s = ppd::sample_dataset(prior, 30, 4);
  const auto w = ppd::posterior(prior, s.data, {1});
  const auto xs = ppd::linspace(0.0, 1.0, 201);
  ppd::PPDOptions o;
  o.jobs = 1;
  o.density = true;
  for (auto _ : state) benchmark::DoNotOptimize(ppd::ppd(prior, w, xs, o));
}
BENCHMARK(BM_PPDMixtureWithDensity)->Unit(benchmark::kMillisecond);

}  // namespace
