// SPDX-License-Identifier: Apache-2.0
#include "lrslab/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"
#include "lrslab/schedule.hpp"

namespace lrs {
namespace {

bool is_diverged(double loss) {
  return !std::isfinite(loss) || loss > kDivergenceSentinel;
}

void check_schedule(const LinRegProblem& problem, std::span<const double> lrs) {
  if (static_cast<int>(lrs.size()) != problem.horizon) {
    throw ValidationError("schedule", "schedule length " +
                                          std::to_string(lrs.size()) +
                                          " != horizon " +
                                          std::to_string(problem.horizon));
  }
}

void check_moments(const LinRegProblem& problem, std::span<const double> p0) {
  if (static_cast<int>(p0.size()) != problem.dim) {
    throw ValidationError("initial_moments", "initial moments need D entries");
  }
}

double weighted_sum(std::span<const double> lambda, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) s += lambda[k] * p[k];
  return s;
}

// One step of p <- diag((1 - a lambda)^2) p + c lambda (lambda^T p) in place.
// Returns lambda^T p of the updated moments.
double advance(std::span<const double> lambda, std::span<double> p, double lr,
               double noise, double s) {
  const double c = lr * lr * noise;
  double next = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double r = 1.0 - lr * lambda[k];
    const double v = r * r * p[k] + c * lambda[k] * s;
    p[k] = v;
    next += lambda[k] * v;
  }
  return next;
}

// Forward pass storing every p_t row-wise in `states` ((T+1) x D).
bool forward_store(const LinRegProblem& problem, std::span<const double> lrs,
                   std::span<const double> p0, std::vector<double>& states,
                   double& final_loss) {
  const auto d = static_cast<std::size_t>(problem.dim);
  const auto horizon = static_cast<std::size_t>(problem.horizon);
  const double norm = 1.0 / (2.0 * problem.dim);
  const double noise = problem.noise_coefficient();
  states.resize((horizon + 1) * d);
  std::copy(p0.begin(), p0.end(), states.begin());
  double s = weighted_sum(problem.spectrum, p0);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::span<double> next(states.data() + (t + 1) * d, d);
    std::copy_n(states.data() + t * d, d, next.data());
    s = advance(problem.spectrum, next, lrs[t], noise, s);
    if (is_diverged(s * norm)) {
      final_loss = std::numeric_limits<double>::infinity();
      return false;
    }
  }
  final_loss = s * norm;
  return true;
}

GradientResult backward(const LinRegProblem& problem, std::span<const double> lrs,
                        const std::vector<double>& states, double final_loss,
                        GradientObjective objective) {
  const auto d = static_cast<std::size_t>(problem.dim);
  const auto& lambda = problem.spectrum;
  const double noise = problem.noise_coefficient();

  // Adjoint of the final objective with respect to p_T.
  double scale = 1.0 / (2.0 * problem.dim);
  if (objective == GradientObjective::kLogLoss) {
    if (!(final_loss > 0.0)) {
      throw DivergenceError("final loss is zero; log-loss gradient undefined");
    }
    scale /= final_loss;
  }
  std::vector<double> adj(d);
  for (std::size_t k = 0; k < d; ++k) adj[k] = scale * lambda[k];

  GradientResult out{final_loss, std::vector<double>(lrs.size())};
  for (std::size_t t = lrs.size(); t-- > 0;) {
    const double* p = states.data() + t * d;
    const double lr = lrs[t];
    double s = 0.0;
    double adj_lambda = 0.0;
    double linear = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      s += lambda[k] * p[k];
      adj_lambda += adj[k] * lambda[k];
      linear += adj[k] * (-2.0 * lambda[k] * (1.0 - lr * lambda[k])) * p[k];
    }
    out.gradient[t] = linear + 2.0 * lr * noise * s * adj_lambda;
    const double c = lr * lr * noise;
    for (std::size_t k = 0; k < d; ++k) {
      const double r = 1.0 - lr * lambda[k];
      adj[k] = r * r * adj[k] + c * lambda[k] * adj_lambda;
    }
  }
  return out;
}

}  // namespace

LinRegProblem LinRegProblem::make(int dim, int batch, int horizon,
                                  InitialMoments init) {
  if (dim < 1) throw ValidationError("dim", "dimension must be >= 1");
  if (batch < 1 || batch > dim) {
    throw ValidationError("batch", "batch size must lie in [1, dim]");
  }
  if (horizon < 1) throw ValidationError("horizon", "horizon must be >= 1");
  LinRegProblem p;
  p.dim = dim;
  p.batch = batch;
  p.horizon = horizon;
  p.init = init;
  p.spectrum.resize(static_cast<std::size_t>(dim));
  for (int k = 1; k <= dim; ++k) {
    p.spectrum[static_cast<std::size_t>(k - 1)] =
        2.0 * k / static_cast<double>(dim + 1);
  }
  return p;
}

double LinRegProblem::noise_coefficient() const noexcept {
  return (1.0 / batch_fraction() - 1.0) / static_cast<double>(dim);
}

std::vector<double> LinRegProblem::initial_moments() const {
  std::vector<double> p0(spectrum.size(), 1.0);
  if (init == InitialMoments::kIsotropicResidual) {
    for (std::size_t k = 0; k < p0.size(); ++k) p0[k] = 1.0 / spectrum[k];
  }
  return p0;
}

LinRegProblem LinRegProblem::with_horizon(int h) const {
  if (h < 1) throw ValidationError("horizon", "horizon must be >= 1");
  LinRegProblem p = *this;
  p.horizon = h;
  return p;
}

TheoryResult solve_theory(const LinRegProblem& problem,
                          std::span<const double> lrs) {
  const auto p0 = problem.initial_moments();
  return solve_theory(problem, lrs, p0);
}

TheoryResult solve_theory(const LinRegProblem& problem,
                          std::span<const double> lrs,
                          std::span<const double> initial_moments) {
  check_schedule(problem, lrs);
  check_moments(problem, initial_moments);
  const double norm = 1.0 / (2.0 * problem.dim);
  const double noise = problem.noise_coefficient();
  std::vector<double> p(initial_moments.begin(), initial_moments.end());
  TheoryResult out;
  out.losses.reserve(lrs.size() + 1);
  double s = weighted_sum(problem.spectrum, p);
  out.losses.push_back(s * norm);
  for (double lr : lrs) {
    s = advance(problem.spectrum, p, lr, noise, s);
    const double loss = s * norm;
    if (is_diverged(loss)) {
      out.losses.push_back(std::numeric_limits<double>::infinity());
      out.diverged = true;
      break;
    }
    out.losses.push_back(loss);
  }
  return out;
}

double theory_min_loss(const LinRegProblem& problem,
                       std::span<const double> lrs) {
  check_schedule(problem, lrs);
  const double norm = 1.0 / (2.0 * problem.dim);
  const double noise = problem.noise_coefficient();
  auto p = problem.initial_moments();
  double s = weighted_sum(problem.spectrum, p);
  double best = s * norm;
  for (double lr : lrs) {
    s = advance(problem.spectrum, p, lr, noise, s);
    const double loss = s * norm;
    if (is_diverged(loss)) return std::numeric_limits<double>::infinity();
    best = std::min(best, loss);
  }
  return best;
}

GradientResult theory_gradient(const LinRegProblem& problem,
                               std::span<const double> lrs,
                               GradientObjective objective) {
  const auto p0 = problem.initial_moments();
  return theory_gradient(problem, lrs, p0, objective);
}

GradientResult theory_gradient(const LinRegProblem& problem,
                               std::span<const double> lrs,
                               std::span<const double> initial_moments,
                               GradientObjective objective) {
  check_schedule(problem, lrs);
  check_moments(problem, initial_moments);
  std::vector<double> states;
  double final_loss = 0.0;
  if (!forward_store(problem, lrs, initial_moments, states, final_loss)) {
    throw DivergenceError("theory forward pass diverged; no gradient");
  }
  return backward(problem, lrs, states, final_loss, objective);
}

DescentResult schedule_descent(const LinRegProblem& problem,
                               const DescentConfig& config) {
  if (!(config.meta_lr > 0.0) || config.meta_steps < 1 ||
      !(config.blowup_threshold > 0.0) || !(config.shrink_factor > 0.0) ||
      !(config.shrink_factor < 1.0) || config.snapshot_every < 1) {
    throw ValidationError("descent", "descent configuration must be positive");
  }
  const auto grid = base_lr_grid(config.grid_lo, config.grid_hi, config.grid_n);
  const auto h = static_cast<std::size_t>(problem.horizon);

  DescentResult out;
  out.initial_loss = std::numeric_limits<double>::infinity();
  out.initial_lr = 0.0;
  for (double lr : grid) {
    std::vector<double> constant(h, lr);
    const auto r = solve_theory(problem, constant);
    if (!r.diverged && r.final_loss() < out.initial_loss) {
      out.initial_loss = r.final_loss();
      out.initial_lr = lr;
    }
  }
  if (!std::isfinite(out.initial_loss)) {
    throw DivergenceError("every constant schedule on the initial grid diverged");
  }

  std::vector<double> lrs(h, out.initial_lr);
  const auto p0 = problem.initial_moments();
  std::vector<double> states;
  for (int step = 0; step < config.meta_steps; ++step) {
    if (step % config.snapshot_every == 0) out.snapshots.push_back({step, lrs});
    double loss = 0.0;
    const bool finite = forward_store(problem, lrs, p0, states, loss);
    if (!finite || loss > config.blowup_threshold) {
      for (auto& v : lrs) v *= config.shrink_factor;
      out.trace.push_back({step, loss, true});
      continue;
    }
    const auto g =
        backward(problem, lrs, states, loss, GradientObjective::kLogLoss);
    out.trace.push_back({step, g.final_loss, false});
    for (std::size_t t = 0; t < h; ++t) {
      lrs[t] = std::max(lrs[t] - config.meta_lr * g.gradient[t], 0.0);
    }
  }
  const auto final = solve_theory(problem, lrs);
  out.final_loss = final.diverged ? std::numeric_limits<double>::infinity()
                                  : final.final_loss();
  out.trace.push_back({config.meta_steps, out.final_loss, false});
  out.snapshots.push_back({config.meta_steps, lrs});
  out.lrs = std::move(lrs);
  return out;
}

EmpiricalKernel::EmpiricalKernel(const LinRegProblem& problem,
                                 std::uint64_t rotation_seed)
    : seed_(rotation_seed) {
  const int d = problem.dim;
  Engine rng(rotation_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) basis_.col(j) *= -1.0;
  }
  const Eigen::Map<const Eigen::VectorXd> lambda(problem.spectrum.data(), d);
  theta_ = basis_ * lambda.asDiagonal() * basis_.transpose();
  theta_ = 0.5 * (theta_ + theta_.transpose()).eval();
}

EmpiricalSeed EmpiricalSeed::split(std::uint64_t seed) {
  return {derive_seed(seed, Stream::kEmpiricalSplit, 0),
          derive_seed(seed, Stream::kEmpiricalSplit, 1),
          derive_seed(seed, Stream::kEmpiricalSplit, 2)};
}

EmpiricalResult simulate_empirical(const LinRegProblem& problem,
                                   const EmpiricalKernel& kernel,
                                   std::span<const double> lrs,
                                   std::uint64_t init_seed,
                                   std::uint64_t sampling_seed) {
  check_schedule(problem, lrs);
  const int d = problem.dim;
  const int b = problem.batch;
  if (kernel.theta().rows() != d) {
    throw ValidationError("kernel", "kernel dimension does not match problem");
  }
  Engine init_rng(init_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z(i) = normal(init_rng);
  if (problem.init == InitialMoments::kIsotropicParameter) {
    const Eigen::Map<const Eigen::VectorXd> lambda(problem.spectrum.data(), d);
    z = kernel.basis() * (lambda.array().sqrt() * z.array()).matrix();
  }

  Engine sample_rng(sampling_seed);
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  const double norm = 1.0 / (2.0 * d);
  const double scale = static_cast<double>(d) / static_cast<double>(b);

  EmpiricalResult out;
  out.losses.reserve(lrs.size() + 1);
  out.losses.push_back(z.squaredNorm() * norm);
  Eigen::VectorXd delta(d);
  for (double lr : lrs) {
    for (int i = 0; i < b; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(pick(sample_rng))]);
    }
    delta.setZero();
    for (int i = 0; i < b; ++i) {
      const int c = perm[static_cast<std::size_t>(i)];
      delta.noalias() += kernel.theta().col(c) * z(c);
    }
    z.noalias() -= (lr * scale) * delta;
    const double loss = z.squaredNorm() * norm;
    if (is_diverged(loss)) {
      out.losses.push_back(std::numeric_limits<double>::infinity());
      out.diverged = true;
      break;
    }
    out.losses.push_back(loss);
  }
  return out;
}

EmpiricalResult simulate_empirical(const LinRegProblem& problem,
                                   std::span<const double> lrs,
                                   std::uint64_t seed) {
  const auto s = EmpiricalSeed::split(seed);
  const EmpiricalKernel kernel(problem, s.rotation);
  return simulate_empirical(problem, kernel, lrs, s.init, s.sampling);
}

}  // namespace lrs
