#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "ppd/prior.hpp"

namespace ppd::gp {

struct GPConfig {
  double lengthscale = 0.4;
  double outputscale = 1.0;
  double noise_sigma = 0.1;
  double constant_mean = 0.0;

  /// Throws std::invalid_argument unless all scales are positive.
  void validate() const;
  double kernel(double a, double b) const;
};

/// Raised when K + sigma^2 I cannot be factorized even with jitter.
class CholeskyError : public std::runtime_error {
 public:
  CholeskyError(const std::string& what, std::vector<double> attempted_jitter);
  const std::vector<double>& attempted_jitter() const { return attempted_jitter_; }

 private:
  std::vector<double> attempted_jitter_;
};

/// Exact GP regression posterior with an RBF kernel and constant mean.
class GPPosterior {
 public:
  /// Needs at least one example. On a failed factorization it retries with
  /// diagonal jitter 1e-10, 1e-9, ..., 1e-6 and records the level used.
  static GPPosterior fit(const GPConfig& config, std::span<const Example> data);

  GPPosterior(GPPosterior&&) noexcept;
  GPPosterior& operator=(GPPosterior&&) noexcept;
  ~GPPosterior();

  double mean(double x) const;
  /// Variance of the latent function value f(x).
  double latent_variance(double x) const;
  /// Variance of a new observation y at x (latent variance + sigma^2).
  double predictive_variance(double x) const;

  const GPConfig& config() const { return config_; }
  std::size_t size() const;
  double jitter() const { return jitter_; }

 private:
  struct Factor;
  GPPosterior(GPConfig config, std::unique_ptr<Factor> factor, double jitter);

  GPConfig config_;
  std::unique_ptr<Factor> factor_;
  double jitter_ = 0.0;
};

/// Target for the coverage experiment: `low` below `location`, `high` at and
/// above it. `low == high` gives the constant control.
struct StepTarget {
  double location = 0.5;
  double low = 0.0;
  double high = 1.0;

  double operator()(double x) const { return x < location ? low : high; }
};

struct CoverageRow {
  std::size_t n_context = 0;
  double coverage_95 = 0.0;
  double mean_abs_error = 0.0;
  double jitter = 0.0;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> latent_variance;
};

/// For each n: fit on n evenly spaced noiseless samples of the target over
/// [0, 1] and report, on `grid_points` evenly spaced points, the fraction
/// where the target lies within mean +- 1.96 sd of the latent function.
std::vector<CoverageRow> gp_step_experiment(const GPConfig& config,
                                            std::span<const std::size_t> n_context_values,
                                            const StepTarget& target,
                                            std::size_t grid_points = 1001);

}  // namespace ppd::gp
