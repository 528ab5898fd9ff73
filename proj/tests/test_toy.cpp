// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "lrslab/errors.hpp"
#include "lrslab/harness.hpp"
#include "lrslab/toy.hpp"

using namespace lrs;

namespace {

ToyWorkloadSpec tiny_spec() {
  ToyWorkloadSpec s;
  s.input_dim = 8;
  s.classes = 3;
  s.samples = 256;
  s.hidden = {8};
  s.batch = 16;
  s.horizon = 40;
  s.eval_every = 10;
  s.eval_samples = 64;
  return s;
}

double adam_scalar(double theta, double g, double lr, double wd) {
  std::vector<double> p{theta};
  const std::vector<double> grad{g};
  AdamState st(1);
  OptimizerConfig c;
  c.weight_decay = wd;
  REQUIRE(adamw_step(p, grad, st, c, lr));
  return p[0];
}

}  // namespace

TEST_CASE("adamw hand oracle") {
  // fresh state: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
  const double eps = 1e-8;
  CHECK(std::abs(adam_scalar(1.0, 1.0, 0.1, 0.0) - (1.0 - 0.1 / (1.0 + eps))) < 1e-12);
  CHECK(std::abs(adam_scalar(1.0, 1.0, 0.1, 0.0) - 0.9) < 1e-7);
  CHECK(std::abs(adam_scalar(1.0, 1.0, 0.1, 0.1) - (1.0 - 0.1 * (1.0 / (1.0 + eps) + 0.1))) < 1e-12);
  CHECK(std::abs(adam_scalar(1.0, 1.0, 0.1, 0.1) - 0.89) < 1e-7);

  // second step by hand
  std::vector<double> p{0.5};
  AdamState st(1);
  const OptimizerConfig c;
  REQUIRE(adamw_step(p, std::vector<double>{2.0}, st, c, 0.01));
  REQUIRE(adamw_step(p, std::vector<double>{-1.0}, st, c, 0.01));
  const double m = 0.9 * (0.1 * 2.0) + 0.1 * -1.0;
  const double v = 0.999 * (0.001 * 4.0) + 0.001 * 1.0;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  const double first = 0.5 - 0.01 * (2.0 / (2.0 + 1e-8));
  CHECK(std::abs(p[0] - (first - 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8))) < 1e-12);
  CHECK(st.step == 2);
}

TEST_CASE("adamw zero lr and non-finite gradients") {
  std::vector<double> p{1.0, -2.0};
  AdamState st(2);
  const OptimizerConfig c;
  REQUIRE(adamw_step(p, std::vector<double>{0.3, 0.4}, st, c, 0.0));
  CHECK(p == std::vector<double>{1.0, -2.0});
  CHECK(st.step == 1);
  CHECK(st.m[0] != 0.0);
  const auto before = st.m;
  CHECK_FALSE(adamw_step(p, std::vector<double>{NAN, 0.0}, st, c, 0.1));
  CHECK(st.m == before);
  CHECK(st.step == 1);
  CHECK_THROWS_AS(adamw_step(p, std::vector<double>{1.0}, st, c, 0.1), ValidationError);
  CHECK_THROWS_AS(adamw_step(p, std::vector<double>{1.0, 1.0}, st, c, -0.1), ValidationError);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig c;
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.weight_decay = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.epsilon = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("mlp gradient matches central differences") {
  ToyWorkloadSpec s;
  s.input_dim = 1;
  s.classes = 2;
  s.samples = 16;
  s.batch = 16;
  const auto data = Dataset::generate(s);
  const Mlp net({1, 2, 2});
  REQUIRE(net.parameter_count() == 10);
  auto params = net.initialize(3);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] += 0.1 * static_cast<double>(i % 3);
  std::vector<std::size_t> rows(16);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<double> grads(10);
  net.forward_backward(params, data, rows, grads);
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double h = 1e-5;
    auto plus = params, minus = params;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (net.forward_backward(plus, data, rows, {}).loss -
                       net.forward_backward(minus, data, rows, {}).loss) / (2 * h);
    worst = std::max(worst, std::abs(fd - grads[i]) / std::max(std::abs(fd), 1e-6));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("dataset is a pure function of its seed") {
  const auto s = tiny_spec();
  const auto a = Dataset::generate(s);
  const auto b = Dataset::generate(s);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  auto t = s;
  t.data_seed = 2;
  CHECK(Dataset::generate(t).features != a.features);
}

TEST_CASE("training determinism and records") {
  const ToyWorkload w(tiny_spec());
  const ScheduleSpec sched(ShapeParams(Family::kCosine, {0.1, 1.0}), 0.01, 40);
  const RunSeed seed{5, 6};
  const auto a = w.train(sched, {}, seed);
  const auto b = w.train(sched, {}, seed);
  CHECK(a.step_losses == b.step_losses);
  CHECK(a.eval_losses == b.eval_losses);
  CHECK(a.min_loss == b.min_loss);
  REQUIRE(a.step_losses.size() == 40);
  CHECK(a.eval_losses.front().first == 0);
  CHECK(a.eval_losses.back().first == 40);
  CHECK(a.eval_losses.size() == 5);
  for (std::size_t i = 1; i < a.running_min.size(); ++i) {
    CHECK(a.running_min[i] <= a.running_min[i - 1]);
  }
  CHECK(a.min_loss == a.running_min.back());
  CHECK(a.min_error >= 0.0);
  CHECK(a.final_error <= 1.0);
  CHECK_FALSE(a.diverged);
  const auto c = w.train(sched, {}, RunSeed{5, 7});
  CHECK(c.step_losses != a.step_losses);
}

TEST_CASE("disabled weight decay equals zero decay") {
  const ToyWorkload w(tiny_spec());
  const ScheduleSpec sched(ShapeParams(Family::kConstant, {0.0}), 0.01, 40);
  OptimizerConfig zero;
  zero.weight_decay = 0.0;
  CHECK(w.train(sched, zero, {1, 2}).step_losses == w.train(sched, {}, {1, 2}).step_losses);
}

TEST_CASE("huge learning rates are flagged as diverged") {
  ToyWorkloadSpec s = tiny_spec();
  s.hidden = {32, 32};
  const ToyWorkload w(s);
  const ScheduleSpec sched(ShapeParams(Family::kConstant, {0.0}), 1e6, 40);
  const auto r = w.train(sched, {}, {1, 1});
  CHECK(r.diverged);
  CHECK(std::isinf(r.min_loss));
}

TEST_CASE("base lr matters on the toy workload") {
  const ToyTrainingWorkload w(tiny_spec(), {});
  const auto shape = ShapeParams(Family::kCosine, {0.0, 1.0});
  SearchConfig c;
  c.k_search = 5;
  const auto seeds = c.search_seeds();
  const double good = score(shape, 0.01, w, seeds);
  const double too_big = score(shape, 10.0, w, seeds);
  CHECK(good <= too_big);
}

TEST_CASE("toy workload settings validation") {
  auto s = tiny_spec();
  s.batch = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = tiny_spec();
  s.eval_samples = 10000;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
