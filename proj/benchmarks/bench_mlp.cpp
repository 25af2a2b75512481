#include <benchmark/benchmark.h>

#include <random>

#include "ppd/mlp.hpp"

namespace {

// One forward+backward pass over a batch.
void BM_MLPLossAndGradient(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto net = ppd::mlp::MLP::initialized({}, rng);
  const auto batch = static_cast<std::size_t>(state.range(0));
  std::vector<double> xs(batch), ys(batch), ws(batch, 1.0 / static_cast<double>(batch));
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t i = 0; i < batch; ++i) {
    ys[i] = static_cast<double>(i % 2);
    xs[i] = ys[i] + noise(rng);
  }
  std::vector<double> grad(net.parameter_count());
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(xs, ys, ws, grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MLPLossAndGradient)->Arg(2)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_TrainMLP(benchmark::State& state) {
  ppd::mlp::TrainConfig c;
  c.steps = 100;
  c.input_noise_sigma = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(ppd::mlp::train_mlp(c));
}
BENCHMARK(BM_TrainMLP)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
