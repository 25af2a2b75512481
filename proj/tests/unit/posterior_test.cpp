#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ppd/logmath.hpp"
#include "ppd/posterior.hpp"

namespace {

using ppd::FunctionLatent;

ppd::FinitePrior two_constants() {
  return ppd::FinitePrior({FunctionLatent::constant(0.0), FunctionLatent::constant(1.0)}, {}, 0.1);
}

TEST(Posterior, EmptyDataReturnsPrior) {
  const auto p = ppd::line_prior();
  const auto w = ppd::posterior(p, ppd::Dataset{});
  ASSERT_EQ(w.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(w.log_weights[i], p.log_prior()[i], 1e-12);
  EXPECT_NEAR(w.log_evidence, 0.0, 1e-12);
  EXPECT_EQ(ppd::marginal_evidence(p, ppd::Dataset{}), 0.0);
}

TEST(Posterior, TwoConstantLatents) {
  const auto w = ppd::posterior(two_constants(), ppd::Dataset{{0.5, 0.0}});
  const double expected = 1.0 / (1.0 + std::exp(-50.0));
  EXPECT_NEAR(w.probability(0), expected, 1e-15);
  EXPECT_LT(w.probability(1), 1e-20);
  EXPECT_NEAR(w.log_weights[1], -50.0 - std::log1p(std::exp(-50.0)), 1e-12);
}

TEST(Posterior, SingleLatentEvidenceIsItsLikelihood) {
  const ppd::FinitePrior p({FunctionLatent::line(0.1, 0.3)}, {}, 0.1);
  std::mt19937_64 rng(4);
  const auto d = oracle::random_dataset(rng, 12);
  EXPECT_NEAR(ppd::marginal_evidence(p, d), ppd::log_likelihood(p, 0, d), 1e-12);
}

TEST(Posterior, ConsistentOnDataFromKnownLatent) {
  for (const auto& prior : {ppd::sine_prior(), ppd::line_prior()}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = ppd::sample_dataset(prior, 100, seed);
      const auto w = ppd::posterior(prior, s.data);
      const auto best = ppd::argmax_latent(prior, w);
      EXPECT_LT(ppd::sup_distance(prior.latent(best), prior.latent(s.latent_index)), 0.1)
          << "seed " << seed;
    }
  }
}

TEST(Posterior, MatchesNaiveOracleOnRandomPriors) {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<std::size_t> n_ex(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const auto prior = oracle::random_small_prior(rng);
    const auto d = oracle::random_dataset(rng, n_ex(rng));
    const auto w = ppd::posterior(prior, d);
    const auto ref = oracle::log_posterior(prior, d);
    for (std::size_t l = 0; l < prior.size(); ++l) {
      ASSERT_NEAR(w.log_weights[l], static_cast<double>(ref[l]), 1e-10) << "trial " << trial;
    }
    EXPECT_NEAR(w.log_evidence, static_cast<double>(oracle::log_evidence(prior, d)), 1e-9);
  }
}

TEST(Posterior, NormalizedForEveryTestedInput) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prior = oracle::random_small_prior(rng);
    const auto d = oracle::random_dataset(rng, 40);
    EXPECT_NEAR(ppd::log_sum_exp(ppd::posterior(prior, d).log_weights), 0.0, 1e-10);
  }
  const auto s = ppd::sample_dataset(ppd::step_prior(), 100, 9);
  EXPECT_NEAR(ppd::log_sum_exp(ppd::posterior(ppd::step_prior(), s.data).log_weights), 0.0, 1e-10);
}

TEST(Posterior, SequentialUpdateMatchesBatch) {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    const auto prior = oracle::random_small_prior(rng);
    const auto d = oracle::random_dataset(rng, 20);
    const std::span<const ppd::Example> all(d);
    const auto half = ppd::posterior(prior, all.first(d.size() / 2));
    const auto seq = ppd::posterior_update(prior, half, all.subspan(d.size() / 2));
    const auto batch = ppd::posterior(prior, d);
    for (std::size_t l = 0; l < prior.size(); ++l) {
      ASSERT_NEAR(seq.log_weights[l], batch.log_weights[l], 1e-10);
    }
    EXPECT_NEAR(seq.log_evidence, batch.log_evidence, 1e-10);
    EXPECT_EQ(seq.n_observed, d.size());
  }
}

TEST(Posterior, EmptyUpdateLeavesWeightsUnchanged) {
  const auto p = ppd::sine_prior();
  const auto s = ppd::sample_dataset(p, 10, 1);
  const auto w = ppd::posterior(p, s.data);
  const auto u = ppd::posterior_update(p, w, ppd::Dataset{});
  EXPECT_EQ(u.log_weights, w.log_weights);
  EXPECT_EQ(u.log_evidence, w.log_evidence);
}

TEST(Posterior, UpdateRejectsMisalignedWeights) {
  ppd::PosteriorWeights w;
  w.log_weights = {0.0};
  EXPECT_THROW(ppd::posterior_update(two_constants(), w, ppd::Dataset{{0.1, 0.1}}), std::invalid_argument);
}

TEST(Posterior, BitIdenticalUnderPermutationAndWorkerCount) {
  const auto prior = ppd::step_prior();
  const auto s = ppd::sample_dataset(prior, 30, 21);
  auto shuffled = s.data;
  std::mt19937_64 rng(8);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = ppd::posterior(prior, s.data, {1});
  const auto b = ppd::posterior(prior, shuffled, {4});
  EXPECT_EQ(a.log_weights, b.log_weights);
  EXPECT_EQ(a.log_evidence, b.log_evidence);
}

TEST(Posterior, FamilyMassAndArgmaxByFamily) {
  const auto p = ppd::sine_line_prior();
  const auto w = ppd::posterior(p, ppd::Dataset{});
  EXPECT_NEAR(ppd::family_mass(p, w, ppd::Family::Sine), 0.5, 1e-12);
  EXPECT_EQ(p.latent(ppd::argmax_latent(p, w, ppd::Family::Line)).family, ppd::Family::Line);
  EXPECT_EQ(ppd::argmax_latent(p, w, ppd::Family::Sine), 0u);  // ties go to the lowest index
}

// Posterior mass near the data-generating sine grows with n and concentrates.
TEST(PosteriorProperty, ConcentratesOnNearbyLatents) {
  const auto prior = ppd::sine_prior();
  const std::vector<std::size_t> ns{5, 10, 25, 50, 100};
  std::vector<double> avg(ns.size(), 0.0);
  std::vector<double> last;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    ppd::DatasetSampler sampler(prior);
    const std::size_t truth = sampler.sample_latent(rng);
    const auto data = sampler.sample_from(truth, ns.back(), rng);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const auto w = ppd::posterior(prior, std::span<const ppd::Example>(data).first(ns[k]));
      double near = 0.0;
      for (std::size_t l = 0; l < prior.size(); ++l) {
        if (ppd::sup_distance(prior.latent(l), prior.latent(truth)) <= 0.05) near += w.probability(l);
      }
      avg[k] += near / seeds;
      if (k + 1 == ns.size()) last.push_back(near);
    }
  }
  for (std::size_t k = 1; k < ns.size(); ++k) EXPECT_GE(avg[k], avg[k - 1] - 1e-12);
  // A couple of unlucky noise draws keep the mean near 0.95; the typical run is well above 0.99.
  std::nth_element(last.begin(), last.begin() + seeds / 2, last.end());
  EXPECT_GT(last[seeds / 2], 0.99);
  EXPECT_GT(avg.back(), 0.9);
}

// Best-line minus best-sine log weight grows linearly on sloped-sine data.
TEST(PosteriorProperty, MisspecifiedGapGrowsWithN) {
  const auto prior = ppd::sine_line_prior();
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  ppd::Dataset data;
  for (int i = 0; i < 100; ++i) {
    const double x = ux(rng);
    data.push_back({x, 0.2 * std::sin(3.0 * std::numbers::pi * x) + 0.5 * x + noise(rng)});
  }
  std::vector<double> ns, gaps;
  for (std::size_t n = 10; n <= 100; n += 10) {
    const auto w = ppd::posterior(prior, std::span<const ppd::Example>(data).first(n));
    ns.push_back(static_cast<double>(n));
    gaps.push_back(w.log_weights[ppd::argmax_latent(prior, w, ppd::Family::Line)] -
                   w.log_weights[ppd::argmax_latent(prior, w, ppd::Family::Sine)]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += ns[i] / ns.size();
    my += gaps[i] / ns.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxy += (ns[i] - mx) * (gaps[i] - my);
    sxx += (ns[i] - mx) * (ns[i] - mx);
  }
  EXPECT_GT(sxy / sxx, 0.0);
}

TEST(BayesOptimalNll, SingleLatentMatchesGaussianEntropy) {
  const ppd::FinitePrior p({FunctionLatent::line(0.0, 0.5)}, {}, 0.1);
  const auto nll = ppd::bayes_optimal_nll(p, 5, 20'000, 3);
  const double entropy = 0.5 * std::log(2.0 * std::numbers::pi * 0.01) + 0.5;
  EXPECT_NEAR(entropy, -0.8836465597893728, 1e-12);
  EXPECT_NEAR(nll.mean, entropy, 4.0 * nll.standard_error + 1e-3);
  EXPECT_EQ(nll.samples, 20'000u);
}

TEST(BayesOptimalNll, MoreContextDoesNotHurtOnAverage) {
  const auto p = ppd::sine_prior();
  const double n0 = ppd::bayes_optimal_nll(p, 0, 3000, 1).mean;
  const double n5 = ppd::bayes_optimal_nll(p, 5, 3000, 1).mean;
  const double n20 = ppd::bayes_optimal_nll(p, 20, 3000, 1).mean;
  EXPECT_GT(n0, n5);
  EXPECT_GE(n5, n20 - 0.02);
  EXPECT_LT(n20, 0.0);
}

TEST(BayesOptimalNll, DeterministicForSeed) {
  const auto p = ppd::line_prior();
  EXPECT_EQ(ppd::bayes_optimal_nll(p, 10, 50, 4).mean, ppd::bayes_optimal_nll(p, 10, 50, 4).mean);
}

}  // namespace
