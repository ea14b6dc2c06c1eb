#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace rcslab {

/// Scalar estimate with its standard error and the sample count behind it.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

/// Sample mean with std_error = sample standard deviation / sqrt(k).
inline Estimate mean_estimate(std::span<const double> values) {
  const std::int64_t k = static_cast<std::int64_t>(values.size());
  if (k == 0) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(k);
  if (k == 1) return {mean, 0.0, 1};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stdev = std::sqrt(ss / static_cast<double>(k - 1));
  return {mean, stdev / std::sqrt(static_cast<double>(k)), k};
}

}  // namespace rcslab
