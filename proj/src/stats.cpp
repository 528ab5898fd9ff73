// SPDX-License-Identifier: Apache-2.0
#include "lrslab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"

namespace lrs {
namespace {

std::vector<double> sorted_copy(std::span<const double> sample) {
  std::vector<double> v(sample.begin(), sample.end());
  for (double x : v) {
    if (std::isnan(x)) throw ValidationError("sample", "sample contains NaN");
  }
  std::sort(v.begin(), v.end());
  return v;
}

double sorted_median(const std::vector<double>& v) {
  return v[(v.size() - 1) / 2];
}

}  // namespace

double median(std::span<const double> sample) {
  if (sample.empty()) throw ValidationError("sample", "median of an empty sample");
  return sorted_median(sorted_copy(sample));
}

double dkw_epsilon(int n, double delta) {
  if (n < 1) throw ValidationError("sample", "DKW needs n >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("delta", "delta must lie in (0,1)");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

DkwBand dkw_median_band(std::span<const double> sample, double delta) {
  if (sample.size() < 2) throw ValidationError("sample", "DKW band needs n >= 2");
  const auto v = sorted_copy(sample);
  const int n = static_cast<int>(v.size());
  const double eps = dkw_epsilon(n, delta);
  DkwBand band{};
  band.delta = delta;
  band.epsilon = eps;
  band.degenerate = eps >= 0.5;
  const double lo_q = std::max(0.0, 0.5 - eps);
  const double hi_q = std::min(1.0, 0.5 + eps);
  band.lower_rank = std::clamp(static_cast<int>(std::ceil(n * lo_q)), 1, n);
  band.upper_rank = std::clamp(static_cast<int>(std::ceil(n * hi_q)), 1, n);
  if (band.degenerate) {
    band.lower_rank = 1;
    band.upper_rank = n;
  }
  band.lower = v[static_cast<std::size_t>(band.lower_rank - 1)];
  band.upper = v[static_cast<std::size_t>(band.upper_rank - 1)];
  band.right_unbounded = std::isinf(band.upper);
  return band;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> sample) {
  if (sample.empty()) throw ValidationError("sample", "ECDF of an empty sample");
  const auto v = sorted_copy(sample);
  const double n = static_cast<double>(v.size());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.emplace_back(v[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double bootstrap_median_sd(std::span<const double> sample, int resamples,
                           std::uint64_t seed) {
  if (sample.empty()) throw ValidationError("sample", "bootstrap of an empty sample");
  if (resamples < 2) throw ValidationError("resamples", "need >= 2 resamples");
  Engine rng(derive_seed(seed, Stream::kBootstrap, 0));
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> meds(static_cast<std::size_t>(resamples));
  std::vector<double> draw(sample.size());
  for (auto& m : meds) {
    for (auto& d : draw) d = sample[pick(rng)];
    std::sort(draw.begin(), draw.end());
    m = sorted_median(draw);
  }
  double mean = 0.0;
  for (double m : meds) mean += m;
  mean /= resamples;
  double var = 0.0;
  for (double m : meds) var += (m - mean) * (m - mean);
  return std::sqrt(var / (resamples - 1));
}

}  // namespace lrs
