// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "lrslab/errors.hpp"
#include "lrslab/fit.hpp"

using namespace lrs;

TEST_CASE("snm self-fit reproduces its own curve") {
  const ShapeParams truth(Family::kSmoothNonMonotonic, {0.3, 0.05, 0.2, 0.7, 0.4, 0.5, 0.5});
  const auto target = truth.sample_steps(200);
  FitOptions o;
  o.seed = 4;
  const auto fit = fit_family_to_target(Family::kSmoothNonMonotonic, target, o);
  CHECK(fit.mse <= 1e-6);
  CHECK(fit.mse <= fit.random_mse);
}

TEST_CASE("constant target drives the warmup to zero") {
  const std::vector<double> target(100, 1.0);
  const auto fit = fit_family_to_target(Family::kConstant, target);
  CHECK(fit.shape.value("warmup") < 1e-6);
  CHECK(fit.mse < 1e-10);
  CHECK(fit.converged);
}

TEST_CASE("fit never loses to the random samples") {
  std::vector<double> target(150);
  for (int t = 0; t < 150; ++t) target[t] = t < 20 ? t / 20.0 : 1.0 - (t - 20) / 140.0;
  for (Family f : core_families()) {
    FitOptions o;
    o.random_samples = 200;
    o.restarts = 2;
    const auto fit = fit_family_to_target(f, target, o);
    CAPTURE(family_name(f));
    CHECK(fit.mse <= fit.random_mse);
    CHECK(shape_mse(fit.shape, target) == fit.mse);
  }
}

TEST_CASE("iteration cap reports non-convergence") {
  std::vector<double> target(50, 0.5);
  FitOptions o;
  o.max_sweeps = 1;
  o.random_samples = 10;
  const auto fit = fit_family_to_target(Family::kTwoPointSpline, target, o);
  CHECK_FALSE(fit.converged);
  CHECK(fit.mse <= fit.random_mse);
}

TEST_CASE("fit target validation") {
  const std::vector<double> bad{0.5, 1.5};
  CHECK_THROWS_AS(fit_family_to_target(Family::kConstant, bad), ValidationError);
  CHECK_THROWS_AS(fit_family_to_target(Family::kConstant, std::vector<double>{}), ValidationError);
}
