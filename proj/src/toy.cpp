// SPDX-License-Identifier: Apache-2.0
#include "lrslab/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"

namespace lrs {

void OptimizerConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw ValidationError("beta1", "beta1 must lie in [0,1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("beta2", "beta2 must lie in [0,1)");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ValidationError("weight_decay", "weight decay must be >= 0");
  }
  if (!(epsilon > 0.0)) throw ValidationError("epsilon", "epsilon must be > 0");
}

bool adamw_step(std::span<double> params, std::span<const double> grads,
                AdamState& state, const OptimizerConfig& config, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ValidationError("params", "parameter, gradient and state sizes differ");
  }
  if (!(lr >= 0.0)) throw ValidationError("lr", "learning rate must be >= 0");
  for (double g : grads) {
    if (!std::isfinite(g)) return false;
  }
  const std::int64_t step = state.step + 1;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + config.epsilon) +
                       config.weight_decay * params[i]);
  }
  state.step = step;
  return true;
}

void ToyWorkloadSpec::validate() const {
  if (input_dim < 1) throw ValidationError("input_dim", "input_dim must be >= 1");
  if (classes < 2) throw ValidationError("classes", "need at least two classes");
  if (samples < 1) throw ValidationError("samples", "samples must be >= 1");
  for (int w : hidden) {
    if (w < 1) throw ValidationError("hidden", "hidden widths must be >= 1");
  }
  if (batch < 1 || batch > samples) {
    throw ValidationError("batch", "batch must lie in [1, samples]");
  }
  if (horizon < 1) throw ValidationError("horizon", "horizon must be >= 1");
  if (!(center_scale > 0.0)) {
    throw ValidationError("center_scale", "center_scale must be > 0");
  }
  if (eval_every < 1) throw ValidationError("eval_every", "eval_every must be >= 1");
  if (eval_samples < 0 || eval_samples > samples) {
    throw ValidationError("eval_samples", "eval_samples must lie in [0, samples]");
  }
}

Dataset Dataset::generate(const ToyWorkloadSpec& spec) {
  spec.validate();
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const auto k = static_cast<std::size_t>(spec.classes);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> centers(k * d);
  Engine center_rng(spec.center_seed);
  for (auto& c : centers) c = spec.center_scale * normal(center_rng);

  Dataset out;
  out.dim = spec.input_dim;
  out.classes = spec.classes;
  out.features.resize(static_cast<std::size_t>(spec.samples) * d);
  out.labels.resize(static_cast<std::size_t>(spec.samples));
  Engine rng(spec.data_seed);
  std::uniform_int_distribution<int> label(0, spec.classes - 1);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const int y = label(rng);
    out.labels[i] = y;
    const double* c = centers.data() + static_cast<std::size_t>(y) * d;
    double* x = out.features.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = c[j] + normal(rng);
  }
  return out;
}

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ValidationError("widths", "MLP needs >= 2 layers");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(count_);
    count_ += static_cast<std::size_t>(widths_[l + 1]) *
                  static_cast<std::size_t>(widths_[l]) +
              static_cast<std::size_t>(widths_[l + 1]);
  }
}

std::vector<double> Mlp::initialize(std::uint64_t seed) const {
  std::vector<double> params(count_, 0.0);
  Engine rng(seed);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const auto in = static_cast<std::size_t>(widths_[l]);
    const auto out = static_cast<std::size_t>(widths_[l + 1]);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(in)));
    double* w = params.data() + offsets_[l];
    for (std::size_t i = 0; i < in * out; ++i) w[i] = normal(rng);
  }
  return params;
}

Mlp::Eval Mlp::forward_backward(std::span<const double> params,
                                const Dataset& data,
                                std::span<const std::size_t> rows,
                                std::span<double> grads) const {
  const std::size_t layers = widths_.size() - 1;
  const bool want_grad = !grads.empty();
  if (want_grad) std::fill(grads.begin(), grads.end(), 0.0);

  // acts[l] holds the input to layer l (post-ReLU), acts[layers] the logits.
  std::vector<std::vector<double>> acts(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l) {
    acts[l].resize(static_cast<std::size_t>(widths_[l]));
  }
  std::vector<std::vector<double>> delta(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l) {
    delta[l].resize(static_cast<std::size_t>(widths_[l]));
  }

  double total = 0.0;
  std::size_t wrong = 0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  const auto dim = static_cast<std::size_t>(data.dim);

  for (std::size_t row : rows) {
    const double* x = data.features.data() + row * dim;
    std::copy(x, x + dim, acts[0].begin());
    for (std::size_t l = 0; l < layers; ++l) {
      const auto in = static_cast<std::size_t>(widths_[l]);
      const auto out = static_cast<std::size_t>(widths_[l + 1]);
      const double* w = params.data() + offsets_[l];
      const double* b = w + in * out;
      const bool relu = l + 1 < layers;
      for (std::size_t o = 0; o < out; ++o) {
        double z = b[o];
        const double* wo = w + o * in;
        for (std::size_t i = 0; i < in; ++i) z += wo[i] * acts[l][i];
        acts[l + 1][o] = relu ? std::max(z, 0.0) : z;
      }
    }
    const auto& logits = acts[layers];
    const double top = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - top);
    const double log_denom = std::log(denom) + top;
    const int y = data.labels[row];
    total += log_denom - logits[static_cast<std::size_t>(y)];
    const auto argmax = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (argmax != y) ++wrong;

    if (!want_grad) continue;
    for (std::size_t o = 0; o < logits.size(); ++o) {
      delta[layers][o] = std::exp(logits[o] - log_denom) * inv_n;
    }
    delta[layers][static_cast<std::size_t>(y)] -= inv_n;
    for (std::size_t l = layers; l-- > 0;) {
      const auto in = static_cast<std::size_t>(widths_[l]);
      const auto out = static_cast<std::size_t>(widths_[l + 1]);
      const double* w = params.data() + offsets_[l];
      double* gw = grads.data() + offsets_[l];
      double* gb = gw + in * out;
      std::fill(delta[l].begin(), delta[l].end(), 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[l + 1][o];
        if (d == 0.0) continue;
        gb[o] += d;
        const double* wo = w + o * in;
        double* gwo = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          gwo[i] += d * acts[l][i];
          delta[l][i] += d * wo[i];
        }
      }
      if (l > 0) {
        for (std::size_t i = 0; i < in; ++i) {
          if (acts[l][i] <= 0.0) delta[l][i] = 0.0;
        }
      }
    }
  }
  return {total * inv_n, static_cast<double>(wrong) * inv_n};
}

namespace {

std::vector<int> layer_widths(const ToyWorkloadSpec& spec) {
  std::vector<int> w{spec.input_dim};
  w.insert(w.end(), spec.hidden.begin(), spec.hidden.end());
  w.push_back(spec.classes);
  return w;
}

bool diverged_loss(double loss) {
  return !std::isfinite(loss) || loss > kToyDivergence;
}

}  // namespace

ToyWorkload::ToyWorkload(ToyWorkloadSpec spec)
    : spec_(std::move(spec)),
      data_(Dataset::generate(spec_)),
      model_(layer_widths(spec_)) {
  const auto n = spec_.eval_samples == 0 ? data_.size()
                                         : static_cast<std::size_t>(spec_.eval_samples);
  eval_rows_.resize(n);
  std::iota(eval_rows_.begin(), eval_rows_.end(), std::size_t{0});
}

TrainingResult ToyWorkload::train(const ScheduleSpec& schedule,
                                  const OptimizerConfig& config,
                                  const RunSeed& seed) const {
  config.validate();
  const int horizon = schedule.horizon;
  const auto batch = static_cast<std::size_t>(spec_.batch);
  auto params = model_.initialize(seed.init_seed);
  std::vector<double> grads(params.size());
  AdamState state(params.size());

  Engine order_rng(seed.data_order_seed);
  std::vector<std::size_t> order(data_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), order_rng);
  std::size_t cursor = 0;
  std::vector<std::size_t> rows(batch);

  TrainingResult out;
  out.step_losses.reserve(static_cast<std::size_t>(horizon));
  out.min_loss = std::numeric_limits<double>::infinity();
  out.min_error = 1.0;
  out.final_error = 1.0;

  auto evaluate = [&](int step) {
    const auto e = model_.forward_backward(params, data_, eval_rows_, {});
    out.eval_losses.emplace_back(step, e.loss);
    const double prev = out.running_min.empty() ? e.loss : out.running_min.back();
    out.running_min.push_back(std::min(prev, e.loss));
    out.final_error = e.error;
    out.min_error = std::min(out.min_error, e.error);
    if (diverged_loss(e.loss)) out.diverged = true;
  };

  evaluate(0);
  for (int t = 0; t < horizon && !out.diverged; ++t) {
    for (std::size_t i = 0; i < batch; ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      rows[i] = order[cursor++];
    }
    const auto e = model_.forward_backward(params, data_, rows, grads);
    out.step_losses.push_back(e.loss);
    if (diverged_loss(e.loss) ||
        !adamw_step(params, grads, state, config, schedule.lr(t))) {
      out.diverged = true;
      break;
    }
    if ((t + 1) % spec_.eval_every == 0 || t + 1 == horizon) evaluate(t + 1);
  }
  out.min_loss = out.diverged ? std::numeric_limits<double>::infinity()
                              : out.running_min.back();
  return out;
}

}  // namespace lrs
