// SPDX-License-Identifier: Apache-2.0
#include "lrslab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"

namespace lrs {
namespace {

// Coordinates are optimized in a normalized [0,1] chart of each range
// (logarithmic for log-uniform parameters).
double to_unit(const ParamSpec& p, double v) {
  if (p.hi == p.lo) return 0.0;
  if (p.law == Sampling::kLogUniform) {
    return (std::log(v) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
  }
  return (v - p.lo) / (p.hi - p.lo);
}

double from_unit(const ParamSpec& p, double u) {
  if (u <= 0.0) return p.lo;
  if (u >= 1.0) return p.hi;
  double v;
  if (p.law == Sampling::kLogUniform) {
    v = std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
  } else {
    v = p.lo + u * (p.hi - p.lo);
  }
  return std::clamp(v, p.lo, p.hi);
}

struct Candidate {
  std::vector<double> unit;
  std::vector<double> values;
  double mse;
};

}  // namespace

double shape_mse(const ShapeParams& shape, std::span<const double> target) {
  const int horizon = static_cast<int>(target.size());
  double acc = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const double d = shape(static_cast<double>(t) / horizon) -
                     target[static_cast<std::size_t>(t)];
    acc += d * d;
  }
  return acc / horizon;
}

FitResult fit_family_to_target(Family family, std::span<const double> target,
                               const FitOptions& options) {
  if (target.empty()) throw ValidationError("target", "empty target schedule");
  for (double v : target) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("target", "target multipliers must lie in [0,1]");
    }
  }
  if (options.random_samples < 1 || options.restarts < 1) {
    throw ValidationError("random_samples", "fit needs at least one sample");
  }
  const auto& specs = SearchSpace::standard().params(family);
  const std::size_t dim = specs.size();

  auto values_of = [&](const std::vector<double>& unit) {
    std::vector<double> values(dim);
    for (std::size_t i = 0; i < dim; ++i) values[i] = from_unit(specs[i], unit[i]);
    return values;
  };

  std::vector<Candidate> pool;
  pool.reserve(static_cast<std::size_t>(options.random_samples));
  for (int i = 0; i < options.random_samples; ++i) {
    const auto s = sample_shape(SearchSpace::standard(), family,
                                derive_seed(options.seed, Stream::kFitRestart,
                                            static_cast<std::uint64_t>(i)));
    Candidate c{std::vector<double>(dim),
                std::vector<double>(s.values().begin(), s.values().end()),
                shape_mse(s, target)};
    for (std::size_t k = 0; k < dim; ++k) c.unit[k] = to_unit(specs[k], s.values()[k]);
    pool.push_back(std::move(c));
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Candidate& a, const Candidate& b) { return a.mse < b.mse; });
  const double random_mse = pool.front().mse;

  std::optional<Candidate> best;
  bool all_converged = true;
  int total_sweeps = 0;
  const auto starts = std::min<std::size_t>(pool.size(),
                                            static_cast<std::size_t>(options.restarts));
  for (std::size_t s = 0; s < starts; ++s) {
    Candidate cur = pool[s];
    std::vector<double> step(dim, options.initial_step);
    bool converged = false;
    int sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
      if (*std::max_element(step.begin(), step.end()) < options.min_step) {
        converged = true;
        break;
      }
      for (std::size_t k = 0; k < dim; ++k) {
        if (step[k] < options.min_step) continue;
        bool moved = false;
        for (double dir : {1.0, -1.0}) {
          auto trial = cur.unit;
          trial[k] = std::clamp(trial[k] + dir * step[k], 0.0, 1.0);
          if (trial[k] == cur.unit[k]) continue;
          auto values = values_of(trial);
          const double mse = shape_mse(ShapeParams(family, values), target);
          if (mse < cur.mse) {
            cur.unit = std::move(trial);
            cur.values = std::move(values);
            cur.mse = mse;
            moved = true;
            break;
          }
        }
        step[k] = moved ? std::min(step[k] * 2.0, 0.5) : step[k] * 0.5;
      }
    }
    total_sweeps += sweep;
    all_converged = all_converged && converged;
    if (!best || cur.mse < best->mse) best = std::move(cur);
  }

  return FitResult{ShapeParams(family, best->values), best->mse, random_mse,
                   all_converged, total_sweeps};
}

}  // namespace lrs
