// SPDX-License-Identifier: Apache-2.0
//
// Linear-regression workload: SGD on residuals z with kernel U diag(lambda) U^T,
// its high-dimensional mean-loss recurrence, and gradient descent on the
// schedule through that recurrence.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lrs {

/// Which initial distribution the residuals are drawn from.
enum class InitialMoments {
  /// z_0 ~ N(0, I); eigenmode moments start at p_0 = 1 / lambda.
  kIsotropicResidual,
  /// z_0 ~ N(0, Theta); eigenmode moments start at p_0 = 1.
  kIsotropicParameter,
};

struct LinRegProblem {
  int dim = 500;
  int batch = 32;
  int horizon = 1000;
  InitialMoments init = InitialMoments::kIsotropicResidual;
  /// lambda_k = 2k / (D + 1), k = 1 .. D.
  std::vector<double> spectrum;

  static LinRegProblem make(int dim, int batch, int horizon,
                            InitialMoments init = InitialMoments::kIsotropicResidual);

  double batch_fraction() const noexcept {
    return static_cast<double>(batch) / static_cast<double>(dim);
  }
  /// Coefficient (1/beta - 1) / D of the rank-one noise term.
  double noise_coefficient() const noexcept;
  std::vector<double> initial_moments() const;
  LinRegProblem with_horizon(int horizon) const;
};

/// Loss above this (or non-finite) counts as divergence.
inline constexpr double kDivergenceSentinel = 1e30;

struct TheoryResult {
  /// losses[t] for t = 0 .. horizon; truncated after divergence.
  std::vector<double> losses;
  bool diverged = false;
  double final_loss() const noexcept { return losses.back(); }
};

TheoryResult solve_theory(const LinRegProblem& problem,
                          std::span<const double> lrs);
TheoryResult solve_theory(const LinRegProblem& problem,
                          std::span<const double> lrs,
                          std::span<const double> initial_moments);

/// min_t loss_t of the recurrence without storing the trajectory; +inf when
/// the run diverges.
double theory_min_loss(const LinRegProblem& problem,
                       std::span<const double> lrs);

enum class GradientObjective { kLogLoss, kLoss };

struct GradientResult {
  double final_loss;
  /// d objective / d lr_t for t = 0 .. horizon-1.
  std::vector<double> gradient;
};

/// Reverse-mode gradient of the final (log-)loss through the recurrence.
/// Throws DivergenceError when the forward pass diverges.
GradientResult theory_gradient(const LinRegProblem& problem,
                               std::span<const double> lrs,
                               GradientObjective objective = GradientObjective::kLogLoss);
GradientResult theory_gradient(const LinRegProblem& problem,
                               std::span<const double> lrs,
                               std::span<const double> initial_moments,
                               GradientObjective objective);

struct DescentConfig {
  double meta_lr = 1e-2;
  int meta_steps = 1000;
  double blowup_threshold = 10.0;
  double shrink_factor = 0.3;
  double grid_lo = 0.01;
  double grid_hi = 1.0;
  int grid_n = 16;
  int snapshot_every = 50;
};

struct DescentStep {
  int step;
  double loss;
  bool shrunk;
};

struct DescentSnapshot {
  int step;
  std::vector<double> lrs;
};

struct DescentResult {
  std::vector<double> lrs;
  double final_loss;
  double initial_lr;
  double initial_loss;
  /// Loss before each meta-step, then the loss of the returned schedule.
  std::vector<DescentStep> trace;
  std::vector<DescentSnapshot> snapshots;
};

/// Throws DivergenceError if every constant schedule on the grid diverges.
DescentResult schedule_descent(const LinRegProblem& problem,
                               const DescentConfig& config = {});

/// Kernel Theta = U diag(lambda) U^T with Haar-random orthogonal U.
class EmpiricalKernel {
 public:
  EmpiricalKernel(const LinRegProblem& problem, std::uint64_t rotation_seed);

  const Eigen::MatrixXd& theta() const noexcept { return theta_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  std::uint64_t rotation_seed() const noexcept { return seed_; }

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd theta_;
  std::uint64_t seed_;
};

struct EmpiricalSeed {
  std::uint64_t rotation;
  std::uint64_t init;
  std::uint64_t sampling;
  /// Splits one seed into three independent streams.
  static EmpiricalSeed split(std::uint64_t seed);
};

struct EmpiricalResult {
  std::vector<double> losses;
  bool diverged = false;
};

/// Minibatch SGD on the residuals: z <- z - (lr D / B) Theta P_t z where P_t
/// keeps B of the D coordinates, sampled without replacement each step.
EmpiricalResult simulate_empirical(const LinRegProblem& problem,
                                   const EmpiricalKernel& kernel,
                                   std::span<const double> lrs,
                                   std::uint64_t init_seed,
                                   std::uint64_t sampling_seed);
EmpiricalResult simulate_empirical(const LinRegProblem& problem,
                                   std::span<const double> lrs,
                                   std::uint64_t seed);

}  // namespace lrs
