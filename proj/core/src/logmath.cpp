#include "ppd/logmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ppd/parallel.hpp"

namespace ppd {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LogSumAccumulator reduce_range(std::span<const double> values) {
  LogSumAccumulator acc;
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return acc;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  acc.max = m;
  acc.scaled_sum = s;
  return acc;
}
}  // namespace

LogSumAccumulator::LogSumAccumulator() : max(kNegInf), scaled_sum(0.0) {}

void LogSumAccumulator::add(double log_value) {
  if (log_value == kNegInf) return;
  if (log_value <= max) {
    scaled_sum += std::exp(log_value - max);
  } else {
    scaled_sum = scaled_sum * std::exp(max - log_value) + 1.0;
    max = log_value;
  }
}

void LogSumAccumulator::merge(const LogSumAccumulator& other) {
  if (other.max == kNegInf) return;
  if (max == kNegInf) {
    *this = other;
    return;
  }
  if (other.max <= max) {
    scaled_sum += other.scaled_sum * std::exp(other.max - max);
  } else {
    scaled_sum = scaled_sum * std::exp(max - other.max) + other.scaled_sum;
    max = other.max;
  }
}

double LogSumAccumulator::value() const {
  if (max == kNegInf) return kNegInf;
  return max + std::log(scaled_sum);
}

double log_sum_exp(std::span<const double> values) { return reduce_range(values).value(); }

double log_sum_exp_blocked(std::span<const double> values, unsigned jobs, std::size_t block_size) {
  const std::size_t blocks = block_count(values.size(), block_size);
  std::vector<LogSumAccumulator> partial(blocks);
  parallel_blocks(values.size(), block_size, jobs,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    partial[b] = reduce_range(values.subspan(begin, end - begin));
                  });
  LogSumAccumulator total;
  for (const auto& p : partial) total.merge(p);
  return total.value();
}

double log_normal_pdf(double y, double mean, double sigma) {
  const double z = (y - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrtTwoPi;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace ppd
