#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ppd::coins {

/// Finite prior over coin biases.
struct CoinPrior {
  std::vector<double> head_probs;
  std::vector<double> log_prior;  // normalized

  /// Throws std::invalid_argument on empty input, probabilities outside
  /// (0, 1) or misaligned weights. Empty `log_prior` means uniform.
  CoinPrior(std::vector<double> head_probs, std::vector<double> log_prior = {});

  /// {0.01, 0.02, ..., 0.99}, uniform.
  static CoinPrior percent_grid();

  std::size_t size() const { return head_probs.size(); }
};

/// Posterior weights after `heads` heads and `tails` tails, in log space.
std::vector<double> coin_log_posterior(const CoinPrior& prior, std::uint64_t heads,
                                       std::uint64_t tails);

/// P(next flip is heads | heads, tails).
double coin_posterior_predictive(const CoinPrior& prior, std::uint64_t heads, std::uint64_t tails);

/// Predictive head probability after observing k heads and no tails, per k.
std::vector<double> counting_curve(const CoinPrior& prior, std::span<const std::uint64_t> ks);

/// Exact averages over every outcome sequence of n flips of a coin with
/// bias `true_p`, grouped by head count (k ~ Binomial(n, true_p)).
struct CoinExperimentResult {
  double true_p = 0.5;
  std::vector<double> head_probs;
  std::vector<std::uint64_t> n_values;
  std::vector<double> avg_predictive;
  /// [n][latent] expected log-likelihood of the n flips under each latent.
  std::vector<std::vector<double>> expected_log_likelihood;
  /// [n][latent] expected posterior mass.
  std::vector<std::vector<double>> avg_posterior_mass;
};

/// Binomial(n, p) log pmf with log-gamma coefficients.
double log_binomial_pmf(std::uint64_t n, std::uint64_t k, double p);

CoinExperimentResult misspecified_sweep(const CoinPrior& prior, double true_p,
                                        std::span<const std::uint64_t> n_values);

}  // namespace ppd::coins
