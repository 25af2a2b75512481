#include "ppd/coins.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ppd/logmath.hpp"

namespace ppd::coins {

CoinPrior::CoinPrior(std::vector<double> probs, std::vector<double> log_weights)
    : head_probs(std::move(probs)), log_prior(std::move(log_weights)) {
  if (head_probs.empty()) throw std::invalid_argument("coin prior needs at least one latent");
  for (double p : head_probs) {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("head probability " + std::to_string(p) + " not in (0, 1)");
    }
  }
  if (log_prior.empty()) {
    log_prior.assign(head_probs.size(), -std::log(static_cast<double>(head_probs.size())));
  }
  if (log_prior.size() != head_probs.size()) {
    throw std::invalid_argument("coin prior weights are not aligned with head probabilities");
  }
  const double log_z = log_sum_exp(log_prior);
  if (!std::isfinite(log_z)) throw std::invalid_argument("coin prior has no mass");
  for (double& v : log_prior) v -= log_z;
}

CoinPrior CoinPrior::percent_grid() {
  std::vector<double> probs(99);
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = static_cast<double>(i + 1) / 100.0;
  return CoinPrior(std::move(probs));
}

std::vector<double> coin_log_posterior(const CoinPrior& prior, std::uint64_t heads,
                                       std::uint64_t tails) {
  const double h = static_cast<double>(heads);
  const double t = static_cast<double>(tails);
  std::vector<double> lw(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const double p = prior.head_probs[j];
    lw[j] = prior.log_prior[j] + h * std::log(p) + t * std::log1p(-p);
  }
  const double log_z = log_sum_exp(lw);
  for (double& v : lw) v -= log_z;
  return lw;
}

double coin_posterior_predictive(const CoinPrior& prior, std::uint64_t heads, std::uint64_t tails) {
  const auto lw = coin_log_posterior(prior, heads, tails);
  double pred = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) pred += std::exp(lw[j]) * prior.head_probs[j];
  return pred;
}

std::vector<double> counting_curve(const CoinPrior& prior, std::span<const std::uint64_t> ks) {
  if (ks.empty()) throw std::invalid_argument("counting curve needs at least one count");
  std::vector<double> out;
  out.reserve(ks.size());
  for (auto k : ks) out.push_back(coin_posterior_predictive(prior, k, 0));
  return out;
}

double log_binomial_pmf(std::uint64_t n, std::uint64_t k, double p) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log_coef = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
  const double heads = k == 0 ? 0.0 : kd * std::log(p);
  const double tails = k == n ? 0.0 : (nd - kd) * std::log1p(-p);
  return log_coef + heads + tails;
}

CoinExperimentResult misspecified_sweep(const CoinPrior& prior, double true_p,
                                        std::span<const std::uint64_t> n_values) {
  if (!(true_p > 0.0 && true_p < 1.0)) throw std::invalid_argument("true_p must lie in (0, 1)");
  const std::size_t J = prior.size();
  CoinExperimentResult r;
  r.true_p = true_p;
  r.head_probs = prior.head_probs;
  r.n_values.assign(n_values.begin(), n_values.end());

  for (std::uint64_t n : n_values) {
    // Expected log-likelihood is linear in the head count, so it only needs
    // E[k] = n * true_p.
    std::vector<double> ell(J);
    for (std::size_t j = 0; j < J; ++j) {
      const double p = prior.head_probs[j];
      ell[j] = static_cast<double>(n) * (true_p * std::log(p) + (1.0 - true_p) * std::log1p(-p));
    }

    double avg_pred = 0.0;
    std::vector<double> mass(J, 0.0);
    for (std::uint64_t k = 0; k <= n; ++k) {
      const double pk = std::exp(log_binomial_pmf(n, k, true_p));
      if (pk == 0.0) continue;  // underflowed outcome class, contributes nothing
      const auto lw = coin_log_posterior(prior, k, n - k);
      double pred = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double w = std::exp(lw[j]);
        pred += w * prior.head_probs[j];
        mass[j] += pk * w;
      }
      avg_pred += pk * pred;
    }
    r.avg_predictive.push_back(avg_pred);
    r.expected_log_likelihood.push_back(std::move(ell));
    r.avg_posterior_mass.push_back(std::move(mass));
  }
  return r;
}

}  // namespace ppd::coins
