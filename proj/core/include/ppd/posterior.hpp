#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ppd/prior.hpp"

namespace ppd {

struct EngineOptions {
  unsigned jobs = 0;  // 0: all hardware threads
};

/// Normalized log posterior mass per latent, aligned with the prior's
/// enumeration order.
struct PosteriorWeights {
  std::vector<double> log_weights;
  /// log p(D), including the input density term (0 for U(0,1)).
  double log_evidence = 0.0;
  std::size_t n_observed = 0;

  std::size_t size() const { return log_weights.size(); }
  double probability(std::size_t i) const;
};

/// Exact posterior over every latent. Log-likelihoods are reduced over the
/// canonical (sorted) order of `data`, and the normalizer is a blocked
/// log-sum-exp merged in block order, so the result is bit-identical for
/// any permutation of `data` and any worker count.
PosteriorWeights posterior(const FinitePrior& prior, std::span<const Example> data,
                           const EngineOptions& options = {});

/// Conditions an existing posterior on additional examples.
PosteriorWeights posterior_update(const FinitePrior& prior, const PosteriorWeights& weights,
                                  std::span<const Example> new_examples,
                                  const EngineOptions& options = {});

/// log p(D) = log sum_l p(l) p(D | l), input density included.
double marginal_evidence(const FinitePrior& prior, std::span<const Example> data,
                         const EngineOptions& options = {});

/// Posterior mass of the latents of one family.
double family_mass(const FinitePrior& prior, const PosteriorWeights& weights, Family family);

/// Index of the most probable latent of `family`, or of any family when
/// unset. Ties resolve to the lowest index.
std::size_t argmax_latent(const FinitePrior& prior, const PosteriorWeights& weights,
                          std::optional<Family> family = std::nullopt);

// ---------------------------------------------------------------------------
// Posterior predictive
// ---------------------------------------------------------------------------

struct PPDOptions {
  /// Evaluate p(y | x, D) on a y-grid. Without an explicit grid the engine
  /// uses 201 points over [min mean - 4 s, max mean + 4 s] where s is the
  /// largest predictive standard deviation over the query points.
  bool density = false;
  std::vector<double> y_grid;
  std::size_t default_grid_points = 201;
  /// Quantile levels in (0, 1), solved on the mixture CDF by bisection.
  std::vector<double> quantile_levels{0.05, 0.95};
  double quantile_tolerance = 1e-8;
  unsigned jobs = 0;
};

struct PPDResult {
  std::vector<double> query_xs;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> y_grid;
  /// Row-major [query][y]; empty unless densities were requested.
  std::vector<double> density;
  std::vector<double> quantile_levels;
  /// Row-major [query][level].
  std::vector<double> quantiles;

  std::size_t size() const { return query_xs.size(); }
  double density_at(std::size_t query, std::size_t y) const { return density[query * y_grid.size() + y]; }
  double quantile_at(std::size_t query, std::size_t level) const {
    return quantiles[query * quantile_levels.size() + level];
  }
};

/// Discrete posterior predictive: a mixture over latents of
/// Normal(f_l(x), sigma^2) weighted by posterior mass. Latents with zero
/// weight (underflowed) are skipped; latents sharing the same value of
/// f_l(x) are merged before densities and quantiles are evaluated.
PPDResult ppd(const FinitePrior& prior, const PosteriorWeights& weights,
              std::span<const double> query_xs, const PPDOptions& options = {});

/// log p(y | x, D) at a single point.
double ppd_log_density(const FinitePrior& prior, const PosteriorWeights& weights, double x,
                       double y);

std::vector<double> linspace(double lo, double hi, std::size_t count);

// ---------------------------------------------------------------------------
// Bayes-optimal loss
// ---------------------------------------------------------------------------

struct NllEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of E[-log p(y_q | x_q, D)] with (D, x_q, y_q) drawn
/// jointly from the prior and |D| = n_context. This is the expected
/// cross-entropy of the exact posterior predictive, the floor for any model
/// trained on data from the same prior.
NllEstimate bayes_optimal_nll(const FinitePrior& prior, std::size_t n_context, std::size_t n_eval,
                              std::uint64_t seed, const EngineOptions& options = {});

}  // namespace ppd
