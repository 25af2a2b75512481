#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ppd::mlp {

struct Architecture {
  std::size_t hidden_layers = 3;
  std::size_t width = 64;
};

/// Scalar-in, scalar-out ReLU network whose output logit is squashed by a
/// logistic function into P(class 1 | x). All weights and biases live in a
/// single flat vector, layer by layer, each weight matrix column-major
/// (out x in) followed by its bias.
class MLP {
 public:
  MLP() = default;
  explicit MLP(Architecture arch);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static MLP initialized(Architecture arch, std::mt19937_64& rng);

  const Architecture& architecture() const { return arch_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double logit(double x) const;
  std::vector<double> logits(std::span<const double> xs) const;
  double predict(double x) const;
  std::vector<double> predict(std::span<const double> xs) const;

  /// Weighted binary cross-entropy over a batch, sum_i w_i * bce_i with
  /// weights summing to 1. When `gradient` is non-empty it receives
  /// d loss / d parameters (reverse mode), same layout as parameters().
  double loss_and_gradient(std::span<const double> xs, std::span<const double> labels,
                           std::span<const double> weights, std::span<double> gradient) const;

  /// Reusable activation buffers for repeated loss_and_gradient calls.
  class Workspace {
   public:
    Workspace();
    Workspace(Workspace&&) noexcept;
    Workspace& operator=(Workspace&&) noexcept;
    ~Workspace();

   private:
    friend class MLP;
    struct Buffers;
    std::unique_ptr<Buffers> buffers_;
  };
  double loss_and_gradient(std::span<const double> xs, std::span<const double> labels,
                           std::span<const double> weights, std::span<double> gradient,
                           Workspace& ws) const;

 private:
  Architecture arch_{};
  std::vector<double> params_;
};

struct TrainConfig {
  Architecture arch{};
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  double input_noise_sigma = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(std::size_t step, std::uint64_t seed);
  std::size_t step() const { return step_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t step_;
  std::uint64_t seed_;
};

struct TrainResult {
  MLP model;
  std::vector<double> loss_history;  // one entry per step
  double final_loss = 0.0;
};

/// Trains on the two-point task: half of every batch is (x=0, y=0), half
/// (x=1, y=1), with Normal(0, input_noise_sigma^2) added to x only. Without
/// input noise identical rows are folded into two weighted rows, which gives
/// the same mean loss and gradient as the full batch.
TrainResult train_mlp(const TrainConfig& config);

struct SweepResult {
  std::vector<double> grid;
  /// Seeds reordered by their prediction at x = 0.5 (ascending).
  std::vector<std::uint64_t> seeds;
  /// [model][grid], rows follow `seeds`.
  std::vector<std::vector<double>> predictions;
  /// Across-model standard deviation per grid point (population form).
  std::vector<double> std_per_x;
  std::vector<double> final_losses;  // follows `seeds`
};

/// Trains one model per seed in `first_seed, first_seed + 1, ...`, models
/// spread over `jobs` workers; each run is single-threaded and the result
/// is independent of the worker count.
SweepResult seed_sweep(std::size_t n_seeds, const TrainConfig& config, unsigned jobs = 0,
                       std::size_t grid_points = 1001);

/// Mean of `std_per_x` over grid points with lo <= x <= hi.
double mean_std_between(const SweepResult& sweep, double lo, double hi);

}  // namespace ppd::mlp
