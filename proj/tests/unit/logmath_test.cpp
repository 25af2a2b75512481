#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ppd/logmath.hpp"
#include "ppd/parallel.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(LogSumExp, MatchesDirectSumInSafeRange) {
  const std::vector<double> v{-1.0, 0.5, 2.0, -3.25};
  double direct = 0.0;
  for (double x : v) direct += std::exp(x);
  EXPECT_NEAR(ppd::log_sum_exp(v), std::log(direct), 1e-15);
}

TEST(LogSumExp, SurvivesValuesThatUnderflowLinearSpace) {
  const std::vector<double> v{-1000.0, -1000.0};
  EXPECT_NEAR(ppd::log_sum_exp(v), -1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> big{800.0, 800.0, 800.0};
  EXPECT_NEAR(ppd::log_sum_exp(big), 800.0 + std::log(3.0), 1e-12);
}

TEST(LogSumExp, EmptyAndAllNegativeInfinity) {
  EXPECT_EQ(ppd::log_sum_exp(std::vector<double>{}), -kInf);
  EXPECT_EQ(ppd::log_sum_exp(std::vector<double>{-kInf, -kInf}), -kInf);
  EXPECT_EQ(ppd::log_sum_exp(std::vector<double>{-kInf, 0.0}), 0.0);
}

TEST(LogSumExp, BlockedResultIndependentOfWorkerCount) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(-50.0, 30.0);
  std::vector<double> v(100'003);
  for (double& x : v) x = n(rng);
  const double one = ppd::log_sum_exp_blocked(v, 1);
  for (unsigned jobs : {2u, 3u, 8u}) EXPECT_EQ(ppd::log_sum_exp_blocked(v, jobs), one);
  EXPECT_NEAR(one, ppd::log_sum_exp(v), 1e-12);
}

TEST(LogSumAccumulator, MergeEqualsSequentialAdd) {
  ppd::LogSumAccumulator all, a, b;
  for (double x : {1.0, -2.0, 3.0}) {
    all.add(x);
    a.add(x);
  }
  for (double x : {10.0, -7.0}) {
    all.add(x);
    b.add(x);
  }
  a.merge(b);
  EXPECT_NEAR(a.value(), all.value(), 1e-14);
}

TEST(LogNormalPdf, StandardValues) {
  EXPECT_NEAR(ppd::log_normal_pdf(0.0, 0.0, 0.1), -std::log(0.1 * std::sqrt(2.0 * M_PI)), 1e-14);
  EXPECT_NEAR(ppd::log_normal_pdf(1.0, 0.0, 0.1), 1.3836465597893728 - 50.0, 1e-12);
  EXPECT_NEAR(ppd::normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(ppd::normal_cdf(1.959963984540054), 0.975, 1e-12);
}

TEST(Parallel, BlocksCoverRangeOnceAndPropagateErrors) {
  std::vector<int> hits(10'001, 0);
  ppd::parallel_blocks(hits.size(), 97, 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  EXPECT_THROW(ppd::parallel_blocks(100, 10, 3,
                                    [](std::size_t blk, std::size_t, std::size_t) {
                                      if (blk == 4) throw std::runtime_error("boom");
                                    }),
               std::runtime_error);
}

}  // namespace
