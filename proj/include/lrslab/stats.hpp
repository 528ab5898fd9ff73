// SPDX-License-Identifier: Apache-2.0
//
// Order statistics: medians, DKW confidence bands for the median, ECDFs.
// +inf is accepted as a divergence sentinel and sorts after finite values.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lrs {

/// Middle order statistic; for even n the lower of the two middle values.
double median(std::span<const double> sample);

struct DkwBand {
  double delta;
  double epsilon;
  double lower;
  double upper;
  int lower_rank;  // 1-based
  int upper_rank;  // 1-based
  /// epsilon >= 0.5: the band is the whole sample range.
  bool degenerate;
  /// The upper endpoint is the +inf sentinel.
  bool right_unbounded;
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

double dkw_epsilon(int n, double delta);

/// Requires n >= 2 and delta in (0,1).
DkwBand dkw_median_band(std::span<const double> sample, double delta);

/// (score, cumulative probability) pairs; ties collapse onto the highest
/// probability.
std::vector<std::pair<double, double>> ecdf(std::span<const double> sample);

/// Standard deviation of the median over seeded bootstrap resamples.
double bootstrap_median_sd(std::span<const double> sample, int resamples,
                           std::uint64_t seed);

}  // namespace lrs
