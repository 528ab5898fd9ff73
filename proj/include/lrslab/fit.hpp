// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "lrslab/schedule.hpp"

namespace lrs {

struct FitOptions {
  int random_samples = 1000;
  /// Coordinate-descent restarts taken from the best random samples.
  int restarts = 8;
  int max_sweeps = 20000;
  /// Initial step as a fraction of each parameter's (possibly log) range.
  double initial_step = 0.1;
  double min_step = 1e-10;
  std::uint64_t seed = 0;
};

struct FitResult {
  ShapeParams shape;
  double mse;
  /// Mean squared error of the best of the random samples alone.
  double random_mse;
  bool converged;
  int sweeps;
};

/// Fits a family member to target multipliers sampled at f = t / T,
/// t = 0 .. T-1, by discrete coordinate descent on the mean squared error.
FitResult fit_family_to_target(Family family, std::span<const double> target,
                               const FitOptions& options = {});

double shape_mse(const ShapeParams& shape, std::span<const double> target);

}  // namespace lrs
