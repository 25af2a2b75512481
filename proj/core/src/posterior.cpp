#include "ppd/posterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "ppd/logmath.hpp"
#include "ppd/parallel.hpp"

namespace ppd {

namespace {

constexpr std::size_t kLatentBlock = kLogSumBlockSize;
constexpr std::size_t kQueryBlock = 4;

void check_aligned(const FinitePrior& prior, const PosteriorWeights& w) {
  if (w.size() != prior.size()) {
    throw std::invalid_argument("posterior has " + std::to_string(w.size()) +
                                " weights for a prior with " + std::to_string(prior.size()) +
                                " latents");
  }
}

/// log_joint[l] = base[l] + log p(data | l), data already canonical.
std::vector<double> add_log_likelihoods(const FinitePrior& prior, std::span<const double> base,
                                        std::span<const Example> sorted, unsigned jobs) {
  std::vector<double> out(prior.size());
  const auto latents = prior.latents();
  const double sigma = prior.noise_sigma();
  parallel_blocks(prior.size(), kLatentBlock, jobs,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t l = begin; l < end; ++l) {
                      out[l] = base[l] == -std::numeric_limits<double>::infinity()
                                   ? base[l]
                                   : base[l] + log_likelihood_ordered(latents[l], sorted, sigma);
                    }
                  });
  return out;
}

PosteriorWeights normalize(std::vector<double> log_joint, unsigned jobs) {
  PosteriorWeights w;
  const double log_z = log_sum_exp_blocked(log_joint, jobs);
  if (!std::isfinite(log_z)) {
    throw std::domain_error("posterior normalizer is not finite (log Z = " +
                            std::to_string(log_z) + ")");
  }
  for (double& v : log_joint) v -= log_z;
  w.log_weights = std::move(log_joint);
  w.log_evidence = log_z;
  return w;
}

/// Merges mixture components with bit-identical means. Weights for each
/// mean are summed in insertion order, so the result is deterministic.
class ComponentMerger {
 public:
  void reset(std::size_t expected) {
    std::size_t cap = 64;
    while (cap < 2 * std::min<std::size_t>(expected, 1 << 16)) cap <<= 1;
    keys_.assign(cap, 0);
    sums_.assign(cap, 0.0);
    used_.assign(cap, 0);
    size_ = 0;
  }

  void add(double value, double weight) {
    const double v = value + 0.0;  // folds -0 onto +0
    const std::uint64_t key = std::bit_cast<std::uint64_t>(v);
    std::size_t mask = keys_.size() - 1;
    std::size_t slot = mix(key) & mask;
    while (used_[slot] && keys_[slot] != key) slot = (slot + 1) & mask;
    if (!used_[slot]) {
      used_[slot] = 1;
      keys_[slot] = key;
      sums_[slot] = weight;
      if (++size_ * 2 > keys_.size()) grow();
      return;
    }
    sums_[slot] += weight;
  }

  /// Components sorted by mean.
  void extract(std::vector<double>& means, std::vector<double>& weights) const {
    std::vector<std::pair<double, double>> items;
    items.reserve(size_);
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (used_[i]) items.emplace_back(std::bit_cast<double>(keys_[i]), sums_[i]);
    }
    std::sort(items.begin(), items.end());
    means.resize(items.size());
    weights.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      means[i] = items[i].first;
      weights[i] = items[i].second;
    }
  }

 private:
  static std::size_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }

  void grow() {
    std::vector<std::uint64_t> keys = std::move(keys_);
    std::vector<double> sums = std::move(sums_);
    std::vector<char> used = std::move(used_);
    const std::size_t cap = keys.size() * 2;
    keys_.assign(cap, 0);
    sums_.assign(cap, 0.0);
    used_.assign(cap, 0);
    const std::size_t mask = cap - 1;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!used[i]) continue;
      std::size_t slot = mix(keys[i]) & mask;
      while (used_[slot]) slot = (slot + 1) & mask;
      used_[slot] = 1;
      keys_[slot] = keys[i];
      sums_[slot] = sums[i];
    }
  }

  std::vector<std::uint64_t> keys_;
  std::vector<double> sums_;
  std::vector<char> used_;
  std::size_t size_ = 0;
};

double mixture_cdf(std::span<const double> means, std::span<const double> weights, double total,
                   double sigma, double y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) acc += weights[k] * normal_cdf((y - means[k]) / sigma);
  return acc / total;
}

}  // namespace

double PosteriorWeights::probability(std::size_t i) const { return std::exp(log_weights.at(i)); }

PosteriorWeights posterior(const FinitePrior& prior, std::span<const Example> data,
                           const EngineOptions& options) {
  validate_dataset(data);
  const Dataset sorted = canonical_order(data);
  PosteriorWeights w =
      normalize(add_log_likelihoods(prior, prior.log_prior(), sorted, options.jobs), options.jobs);
  w.n_observed = data.size();
  w.log_evidence += static_cast<double>(data.size()) * prior.input().log_density();
  return w;
}

PosteriorWeights posterior_update(const FinitePrior& prior, const PosteriorWeights& weights,
                                  std::span<const Example> new_examples,
                                  const EngineOptions& options) {
  check_aligned(prior, weights);
  validate_dataset(new_examples);
  if (new_examples.empty()) return weights;
  const Dataset sorted = canonical_order(new_examples);
  PosteriorWeights w = normalize(
      add_log_likelihoods(prior, weights.log_weights, sorted, options.jobs), options.jobs);
  w.n_observed = weights.n_observed + new_examples.size();
  w.log_evidence += weights.log_evidence +
                    static_cast<double>(new_examples.size()) * prior.input().log_density();
  return w;
}

double marginal_evidence(const FinitePrior& prior, std::span<const Example> data,
                         const EngineOptions& options) {
  return posterior(prior, data, options).log_evidence;
}

double family_mass(const FinitePrior& prior, const PosteriorWeights& weights, Family family) {
  check_aligned(prior, weights);
  double mass = 0.0;
  const auto latents = prior.latents();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].family == family) mass += std::exp(weights.log_weights[i]);
  }
  return mass;
}

std::size_t argmax_latent(const FinitePrior& prior, const PosteriorWeights& weights,
                          std::optional<Family> family) {
  check_aligned(prior, weights);
  std::size_t best = prior.size();
  double best_w = -std::numeric_limits<double>::infinity();
  const auto latents = prior.latents();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (family && latents[i].family != *family) continue;
    if (best == prior.size() || weights.log_weights[i] > best_w) {
      best = i;
      best_w = weights.log_weights[i];
    }
  }
  if (best == prior.size()) throw std::invalid_argument("prior has no latent of that family");
  return best;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  return Grid{lo, hi, count}.values();
}

PPDResult ppd(const FinitePrior& prior, const PosteriorWeights& weights,
              std::span<const double> query_xs, const PPDOptions& options) {
  check_aligned(prior, weights);
  for (double q : options.quantile_levels) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile levels must lie in (0, 1)");
  }

  PPDResult result;
  result.query_xs.assign(query_xs.begin(), query_xs.end());
  result.quantile_levels = options.quantile_levels;
  const std::size_t nq = query_xs.size();
  result.mean.assign(nq, 0.0);
  result.variance.assign(nq, 0.0);
  if (nq == 0) return result;

  // Latents that carry any mass, in enumeration order.
  std::vector<const FunctionLatent*> active;
  std::vector<double> active_w;
  const auto latents = prior.latents();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const double w = std::exp(weights.log_weights[i]);
    if (w > 0.0) {
      active.push_back(&latents[i]);
      active_w.push_back(w);
    }
  }
  if (active.empty()) throw std::domain_error("posterior has no latent with positive weight");
  double total_w = 0.0;
  for (double w : active_w) total_w += w;

  const double sigma = prior.noise_sigma();
  const double sigma2 = sigma * sigma;
  const std::size_t na = active.size();

  parallel_blocks(nq, kQueryBlock, options.jobs,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    std::vector<double> f(na);
                    for (std::size_t q = begin; q < end; ++q) {
                      const double x = query_xs[q];
                      double m = 0.0;
                      for (std::size_t a = 0; a < na; ++a) {
                        f[a] = (*active[a])(x);
                        m += active_w[a] * f[a];
                      }
                      m /= total_w;
                      double spread = 0.0;
                      for (std::size_t a = 0; a < na; ++a) {
                        const double d = f[a] - m;
                        spread += active_w[a] * d * d;
                      }
                      result.mean[q] = m;
                      result.variance[q] = sigma2 + spread / total_w;
                    }
                  });

  const bool want_quantiles = !options.quantile_levels.empty();
  if (options.density) {
    if (!options.y_grid.empty()) {
      result.y_grid = options.y_grid;
    } else {
      const auto [lo_it, hi_it] = std::minmax_element(result.mean.begin(), result.mean.end());
      const double s = std::sqrt(*std::max_element(result.variance.begin(), result.variance.end()));
      result.y_grid = linspace(*lo_it - 4.0 * s, *hi_it + 4.0 * s, options.default_grid_points);
    }
  }
  if (!options.density && !want_quantiles) return result;

  const std::size_t ny = result.y_grid.size();
  const std::size_t nl = options.quantile_levels.size();
  result.density.assign(options.density ? nq * ny : 0, 0.0);
  result.quantiles.assign(nq * nl, 0.0);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));

  parallel_blocks(
      nq, kQueryBlock, options.jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
        ComponentMerger merger;
        std::vector<double> means, ws;
        for (std::size_t q = begin; q < end; ++q) {
          const double x = query_xs[q];
          merger.reset(na);
          for (std::size_t a = 0; a < na; ++a) merger.add((*active[a])(x), active_w[a]);
          merger.extract(means, ws);
          double comp_total = 0.0;
          for (double w : ws) comp_total += w;

          if (options.density) {
            for (std::size_t j = 0; j < ny; ++j) {
              const double y = result.y_grid[j];
              double acc = 0.0;
              for (std::size_t k = 0; k < means.size(); ++k) {
                const double z = (y - means[k]) / sigma;
                acc += ws[k] * std::exp(-0.5 * z * z);
              }
              result.density[q * ny + j] = norm * acc / comp_total;
            }
          }
          for (std::size_t li = 0; li < nl; ++li) {
            const double level = options.quantile_levels[li];
            double lo = means.front() - 10.0 * sigma;
            double hi = means.back() + 10.0 * sigma;
            while (hi - lo > options.quantile_tolerance) {
              const double mid = 0.5 * (lo + hi);
              if (mixture_cdf(means, ws, comp_total, sigma, mid) < level) {
                lo = mid;
              } else {
                hi = mid;
              }
            }
            result.quantiles[q * nl + li] = 0.5 * (lo + hi);
          }
        }
      });
  return result;
}

double ppd_log_density(const FinitePrior& prior, const PosteriorWeights& weights, double x,
                       double y) {
  check_aligned(prior, weights);
  LogSumAccumulator acc;
  const auto latents = prior.latents();
  const double sigma = prior.noise_sigma();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const double lw = weights.log_weights[i];
    if (lw == -std::numeric_limits<double>::infinity()) continue;
    acc.add(lw + log_normal_pdf(y, latents[i](x), sigma));
  }
  return acc.value();
}

NllEstimate bayes_optimal_nll(const FinitePrior& prior, std::size_t n_context, std::size_t n_eval,
                              std::uint64_t seed, const EngineOptions& options) {
  if (n_eval == 0) throw std::invalid_argument("n_eval must be positive");
  const DatasetSampler sampler(prior);
  std::vector<double> losses(n_eval);
  for (std::size_t e = 0; e < n_eval; ++e) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(e >> 32)};
    std::mt19937_64 rng(seq);
    SampledDataset draw = sampler.sample(rng, n_context + 1);
    const Example query = draw.data.back();
    draw.data.pop_back();
    const PosteriorWeights w = posterior(prior, draw.data, options);
    losses[e] = -ppd_log_density(prior, w, query.x, query.y);
  }
  NllEstimate est;
  est.samples = n_eval;
  double sum = 0.0;
  for (double v : losses) sum += v;
  est.mean = sum / static_cast<double>(n_eval);
  if (n_eval > 1) {
    double ss = 0.0;
    for (double v : losses) ss += (v - est.mean) * (v - est.mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(n_eval - 1) / static_cast<double>(n_eval));
  }
  return est;
}

}  // namespace ppd
