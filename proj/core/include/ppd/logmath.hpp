#pragma once

#include <cstddef>
#include <span>

namespace ppd {

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

/// Partial log-sum-exp state: the represented value is max + log(scaled_sum).
/// Empty / all -inf inputs are represented by max == -inf.
struct LogSumAccumulator {
  double max;
  double scaled_sum;

  LogSumAccumulator();

  void add(double log_value);
  /// Merges another partial sum. Merging is order-sensitive in the last ulp,
  /// callers that need determinism must merge in a fixed order.
  void merge(const LogSumAccumulator& other);
  double value() const;
};

inline constexpr std::size_t kLogSumBlockSize = 4096;

/// Max-shifted log(sum(exp(v))) over a contiguous range, sequential.
double log_sum_exp(std::span<const double> values);

/// Same reduction split into fixed-size blocks that run on up to `jobs`
/// workers and are merged in block index order. The result only depends on
/// `block_size`, never on the worker count.
double log_sum_exp_blocked(std::span<const double> values, unsigned jobs,
                           std::size_t block_size = kLogSumBlockSize);

double log_normal_pdf(double y, double mean, double sigma);
double normal_cdf(double z);

}  // namespace ppd
