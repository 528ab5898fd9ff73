// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrslab/errors.hpp"
#include "lrslab/linreg.hpp"
#include "lrslab/rng.hpp"

using namespace lrs;

TEST_CASE("spectrum has unit mean") {
  for (int d : {1, 2, 7, 500}) {
    const auto p = LinRegProblem::make(d, 1, 10);
    const double mean = std::accumulate(p.spectrum.begin(), p.spectrum.end(), 0.0) / d;
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.spectrum.back() == doctest::Approx(2.0 * d / (d + 1)));
    for (std::size_t k = 1; k < p.spectrum.size(); ++k) CHECK(p.spectrum[k] > p.spectrum[k - 1]);
  }
  CHECK_THROWS_AS(LinRegProblem::make(10, 11, 5), ValidationError);
  CHECK_THROWS_AS(LinRegProblem::make(10, 0, 5), ValidationError);
}

TEST_CASE("initial loss is one half") {
  for (auto init : {InitialMoments::kIsotropicResidual, InitialMoments::kIsotropicParameter}) {
    for (int d : {3, 50, 500}) {
      const auto p = LinRegProblem::make(d, 1, 5, init);
      const std::vector<double> lrs(5, 0.1);
      CHECK(std::abs(solve_theory(p, lrs).losses[0] - 0.5) < 1e-12);
    }
  }
}

TEST_CASE("zero schedule keeps the loss") {
  const auto p = LinRegProblem::make(500, 32, 1000);
  const std::vector<double> zero(1000, 0.0);
  const auto r = solve_theory(p, zero);
  REQUIRE(r.losses.size() == 1001);
  for (double l : r.losses) CHECK(std::abs(l - 0.5) < 1e-12);
}

TEST_CASE("hand-rolled two-mode step") {
  for (auto init : {InitialMoments::kIsotropicResidual, InitialMoments::kIsotropicParameter}) {
    const auto p = LinRegProblem::make(2, 1, 1, init);
    const double l1 = 2.0 / 3.0, l2 = 4.0 / 3.0, a = 0.5;
    double p1 = init == InitialMoments::kIsotropicResidual ? 1.0 / l1 : 1.0;
    double p2 = init == InitialMoments::kIsotropicResidual ? 1.0 / l2 : 1.0;
    const double s = l1 * p1 + l2 * p2;
    const double c = a * a * (2.0 - 1.0) / 2.0;
    const double q1 = (1 - a * l1) * (1 - a * l1) * p1 + c * l1 * s;
    const double q2 = (1 - a * l2) * (1 - a * l2) * p2 + c * l2 * s;
    const double expected = (l1 * q1 + l2 * q2) / 4.0;
    const std::vector<double> lrs{a};
    const auto r = solve_theory(p, lrs);
    CHECK(std::abs(r.losses[1] - expected) < 1e-14);
  }
}

TEST_CASE("full batch has no noise term") {
  const auto p = LinRegProblem::make(6, 6, 3);
  CHECK(p.noise_coefficient() == 0.0);
  const std::vector<double> lrs{0.3, 0.2, 0.1};
  auto m = p.initial_moments();
  for (double a : lrs) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double r = 1 - a * p.spectrum[k];
      m[k] *= r * r;
    }
  }
  double loss = 0;
  for (std::size_t k = 0; k < m.size(); ++k) loss += p.spectrum[k] * m[k];
  loss /= 12.0;
  CHECK(solve_theory(p, lrs).final_loss() == doctest::Approx(loss).epsilon(1e-14));
}

TEST_CASE("full-batch stability edge") {
  const int d = 10;
  const auto p = LinRegProblem::make(d, d, 20000);
  const double edge = static_cast<double>(d + 1) / d;
  const std::vector<double> below(20000, edge * 0.99), above(20000, edge * 1.01);
  CHECK_FALSE(solve_theory(p, below).diverged);
  CHECK(solve_theory(p, above).diverged);
  CHECK(std::isinf(theory_min_loss(p, above)));
  CHECK(std::isfinite(theory_min_loss(p, below)));
}

TEST_CASE("theory_min_loss agrees with the trajectory") {
  const auto p = LinRegProblem::make(40, 8, 60);
  std::vector<double> lrs(60);
  for (int t = 0; t < 60; ++t) lrs[t] = 0.2 * (1.0 - t / 60.0);
  const auto r = solve_theory(p, lrs);
  CHECK(theory_min_loss(p, lrs) == *std::min_element(r.losses.begin(), r.losses.end()));
}

TEST_CASE("adjoint gradient matches central differences") {
  const auto p = LinRegProblem::make(50, 10, 100);
  Engine rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> lrs(100);
    for (auto& v : lrs) v = u(rng);
    const auto g = theory_gradient(p, lrs);
    const double h = 1e-6;
    double scale = 0;
    std::vector<double> fd(100);
    for (int t = 0; t < 100; ++t) {
      auto plus = lrs, minus = lrs;
      plus[t] += h;
      minus[t] -= h;
      fd[t] = (std::log(solve_theory(p, plus).final_loss()) -
               std::log(solve_theory(p, minus).final_loss())) / (2 * h);
      scale = std::max(scale, std::abs(fd[t]));
    }
    for (int t = 0; t < 100; ++t) {
      worst = std::max(worst, std::abs(g.gradient[t] - fd[t]) / std::max(std::abs(fd[t]), 1e-3 * scale));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("gradient sign from rest and divergence errors") {
  const auto p = LinRegProblem::make(20, 4, 30);
  const std::vector<double> zero(30, 0.0);
  for (double v : theory_gradient(p, zero).gradient) CHECK(v <= 0.0);
  const std::vector<double> huge(30, 50.0);
  CHECK_THROWS_AS(theory_gradient(p, huge), DivergenceError);
}

TEST_CASE("gradient of a solved state vanishes") {
  // Full batch, D = 1: lr = 1 solves the problem in one step; afterwards p = 0.
  const auto p = LinRegProblem::make(1, 1, 3);
  const std::vector<double> lrs{1.0, 0.3, 0.2};
  const auto g = theory_gradient(p, lrs, GradientObjective::kLoss);
  CHECK(g.final_loss == 0.0);
  CHECK(g.gradient[2] == 0.0);
  CHECK_THROWS_AS(theory_gradient(p, lrs, GradientObjective::kLogLoss), DivergenceError);
}

TEST_CASE("schedule descent improves on the best constant") {
  const auto p = LinRegProblem::make(100, 16, 200);
  DescentConfig c;
  c.meta_steps = 200;
  const auto r = schedule_descent(p, c);
  CHECK(r.final_loss < r.initial_loss);
  for (double v : r.lrs) CHECK(v >= 0.0);
  CHECK(r.trace.back().step == 200);
  CHECK(r.snapshots.front().step == 0);
  CHECK(r.snapshots.back().lrs == r.lrs);
  CHECK(r.snapshots.size() == 200 / 50 + 1);
}

TEST_CASE("schedule descent shrinks on blow-up") {
  const auto p = LinRegProblem::make(20, 4, 50);
  DescentConfig c;
  c.meta_steps = 5;
  c.blowup_threshold = 1e-9;  // every step counts as a blow-up
  const auto r = schedule_descent(p, c);
  for (int i = 0; i < 5; ++i) CHECK(r.trace[i].shrunk);
  CHECK(r.lrs[0] == doctest::Approx(r.initial_lr * std::pow(0.3, 5)));
}

TEST_CASE("all-diverged grid is an error") {
  const auto p = LinRegProblem::make(20, 2, 500);
  DescentConfig c;
  c.grid_lo = 10;
  c.grid_hi = 20;
  CHECK_THROWS_AS(schedule_descent(p, c), DivergenceError);
}

TEST_CASE("empirical kernel") {
  const auto p = LinRegProblem::make(30, 5, 10);
  const EmpiricalKernel k(p, 9);
  const auto& th = k.theta();
  CHECK((th - th.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(th);
  for (int i = 0; i < 30; ++i) {
    CHECK(es.eigenvalues()(i) == doctest::Approx(p.spectrum[i]).epsilon(1e-10));
  }
  const auto& u = k.basis();
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical simulator special cases") {
  const auto p = LinRegProblem::make(20, 4, 15);
  const std::vector<double> zero(15, 0.0);
  const auto r = simulate_empirical(p, zero, 3);
  REQUIRE(r.losses.size() == 16);
  for (double l : r.losses) CHECK(l == r.losses[0]);

  const auto one = LinRegProblem::make(1, 1, 1);
  const std::vector<double> unit{1.0};
  const auto s = simulate_empirical(one, unit, 5);
  CHECK(s.losses[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  const auto a = simulate_empirical(p, std::vector<double>(15, 0.1), 77);
  const auto b = simulate_empirical(p, std::vector<double>(15, 0.1), 77);
  CHECK(a.losses == b.losses);

  const auto div = simulate_empirical(p, std::vector<double>(15, 40.0), 1);
  CHECK(div.diverged);
  CHECK(div.losses.size() < 16);
}

TEST_CASE("empirical mean tracks the theory at small lr") {
  const auto p = LinRegProblem::make(100, 10, 100);
  const std::vector<double> lrs(100, 0.05);
  const int seeds = 200;
  double mean = 0;
  for (int s = 0; s < seeds; ++s) mean += simulate_empirical(p, lrs, derive_seed(1, 2, s)).losses.back();
  mean /= seeds;
  const double theory = solve_theory(p, lrs).final_loss();
  CHECK(std::abs(mean - theory) / theory < 0.1);
}
