// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale non-convex workload: a ReLU MLP trained with AdamW on a
// synthetic Gaussian-mixture classification task.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrslab/schedule.hpp"

namespace lrs {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  double epsilon = 1e-8;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One AdamW update with decoupled weight decay:
///   params -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * params).
/// Returns false (leaving params and state untouched) on a non-finite
/// gradient.
bool adamw_step(std::span<double> params, std::span<const double> grads,
                AdamState& state, const OptimizerConfig& config, double lr);

struct ToyWorkloadSpec {
  int input_dim = 32;
  int classes = 10;
  int samples = 8192;
  std::vector<int> hidden = {64, 64};
  int batch = 256;
  int horizon = 1000;
  /// Standard deviation of the class centers; points have unit noise.
  double center_scale = 0.35;
  std::uint64_t center_seed = 0x5eed'c3a7e5ULL;
  std::uint64_t data_seed = 1;
  /// The training loss is measured on the evaluation subset every
  /// eval_every steps and at the end of training.
  int eval_every = 50;
  /// Size of the fixed evaluation subset; 0 uses the whole training set.
  int eval_samples = 0;

  void validate() const;
};

struct Dataset {
  int dim = 0;
  int classes = 0;
  std::vector<double> features;  // row-major, samples x dim
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  static Dataset generate(const ToyWorkloadSpec& spec);
};

/// Fully connected ReLU network with a softmax cross-entropy head.
class Mlp {
 public:
  explicit Mlp(std::vector<int> widths);

  std::size_t parameter_count() const noexcept { return count_; }
  const std::vector<int>& widths() const noexcept { return widths_; }

  /// He-normal weights, zero biases.
  std::vector<double> initialize(std::uint64_t seed) const;

  struct Eval {
    double loss;
    double error;
  };

  /// Mean cross-entropy and classification error over rows of `data`;
  /// accumulates the gradient of the mean loss into `grads` when non-empty.
  Eval forward_backward(std::span<const double> params, const Dataset& data,
                        std::span<const std::size_t> rows,
                        std::span<double> grads) const;

 private:
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;
  std::size_t count_ = 0;
};

struct RunSeed {
  std::uint64_t init_seed = 0;
  std::uint64_t data_order_seed = 0;
  friend bool operator==(const RunSeed&, const RunSeed&) = default;
};

struct TrainingResult {
  /// Minibatch loss before the update at each step.
  std::vector<double> step_losses;
  /// (step, loss) on the evaluation subset; the first entry is step 0.
  std::vector<std::pair<int, double>> eval_losses;
  std::vector<double> running_min;
  double min_loss;
  double final_error;
  double min_error;
  bool diverged = false;
};

/// Loss above this (or non-finite) marks a run as diverged.
inline constexpr double kToyDivergence = 1e6;

class ToyWorkload {
 public:
  explicit ToyWorkload(ToyWorkloadSpec spec);

  const ToyWorkloadSpec& spec() const noexcept { return spec_; }
  const Dataset& data() const noexcept { return data_; }
  const Mlp& model() const noexcept { return model_; }

  /// Trains one network. schedule.horizon sets the number of steps.
  TrainingResult train(const ScheduleSpec& schedule,
                       const OptimizerConfig& config,
                       const RunSeed& seed) const;

 private:
  ToyWorkloadSpec spec_;
  Dataset data_;
  Mlp model_;
  std::vector<std::size_t> eval_rows_;
};

}  // namespace lrs
