// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lrslab/lrslab.h"

TEST_CASE("version and errors") {
  CHECK(std::string(lrs_version()).size() > 0);
  lrs_shape* s = nullptr;
  CHECK(lrs_shape_create("triangle", nullptr, 0, &s) == LRS_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(std::string(lrs_last_error()).find("triangle") != std::string::npos);
  CHECK(lrs_shape_create("con", nullptr, 0, nullptr) == LRS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("shape round trip") {
  const double params[2] = {0.1, 0.5};
  lrs_shape* s = nullptr;
  REQUIRE(lrs_shape_create("cos-std", params, 2, &s) == LRS_OK);
  double v = -1.0;
  REQUIRE(lrs_shape_eval(s, 0.1, &v) == LRS_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(lrs_shape_eval(s, 1.5, &v) == LRS_ERR_INVALID_ARGUMENT);

  size_t needed = 0;
  char tiny[4];
  CHECK(lrs_shape_to_json(s, tiny, sizeof tiny, &needed) == LRS_ERR_BUFFER_TOO_SMALL);
  std::vector<char> buf(needed);
  REQUIRE(lrs_shape_to_json(s, buf.data(), buf.size(), &needed) == LRS_OK);
  lrs_shape* t = nullptr;
  REQUIRE(lrs_shape_from_json(buf.data(), &t) == LRS_OK);

  std::vector<double> a(100), b(100);
  REQUIRE(lrs_shape_lrs(s, 0.02, 100, a.data()) == LRS_OK);
  REQUIRE(lrs_shape_lrs(t, 0.02, 100, b.data()) == LRS_OK);
  CHECK(a == b);
  CHECK(a[0] == 0.0);
  CHECK(lrs_shape_lrs(s, -1.0, 100, a.data()) == LRS_ERR_INVALID_ARGUMENT);
  lrs_shape_destroy(s);
  lrs_shape_destroy(t);
  lrs_shape_destroy(nullptr);

  CHECK(lrs_shape_from_json("{bad", &t) == LRS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("sampling is reproducible") {
  lrs_shape *a = nullptr, *b = nullptr;
  REQUIRE(lrs_shape_sample("tps", 42, &a) == LRS_OK);
  REQUIRE(lrs_shape_sample("tps", 42, &b) == LRS_OK);
  for (double f : {0.0, 0.1, 0.33, 0.8, 1.0}) {
    double x, y;
    lrs_shape_eval(a, f, &x);
    lrs_shape_eval(b, f, &y);
    CHECK(x == y);
  }
  lrs_shape_destroy(a);
  lrs_shape_destroy(b);
}

TEST_CASE("grid") {
  double g[16];
  REQUIRE(lrs_base_lr_grid(1e-4, 1e-1, 16, g) == LRS_OK);
  CHECK(g[0] == 1e-4);
  CHECK(g[15] == 1e-1);
  CHECK(lrs_base_lr_grid(1e-1, 1e-4, 16, g) == LRS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("theory, gradient and descent") {
  lrs_problem* p = nullptr;
  REQUIRE(lrs_problem_create(50, 5, 40, LRS_INIT_RESIDUAL, &p) == LRS_OK);
  std::vector<double> lrs(40, 0.0), losses(41);
  int diverged = -1;
  REQUIRE(lrs_theory_solve(p, lrs.data(), losses.data(), &diverged) == LRS_OK);
  CHECK(diverged == 0);
  for (double l : losses) CHECK(l == doctest::Approx(0.5).epsilon(1e-14));

  std::fill(lrs.begin(), lrs.end(), 0.1);
  double final_loss = 0.0;
  std::vector<double> grad(40);
  REQUIRE(lrs_theory_gradient(p, lrs.data(), &final_loss, grad.data()) == LRS_OK);
  CHECK(final_loss < 0.5);
  CHECK(grad[0] < 0.0);

  std::fill(lrs.begin(), lrs.end(), 50.0);
  REQUIRE(lrs_theory_solve(p, lrs.data(), losses.data(), &diverged) == LRS_OK);
  CHECK(diverged == 1);
  CHECK(std::isinf(losses.back()));

  lrs_descent_config cfg;
  lrs_descent_config_default(&cfg);
  CHECK(cfg.meta_lr == 1e-2);
  cfg.meta_steps = 20;
  std::vector<double> out(40);
  REQUIRE(lrs_schedule_descent(p, &cfg, out.data(), &final_loss) == LRS_OK);
  CHECK(final_loss < 0.5);

  std::fill(lrs.begin(), lrs.end(), 0.05);
  std::vector<double> e1(41), e2(41);
  REQUIRE(lrs_simulate_empirical(p, lrs.data(), 3, e1.data(), &diverged) == LRS_OK);
  REQUIRE(lrs_simulate_empirical(p, lrs.data(), 3, e2.data(), &diverged) == LRS_OK);
  CHECK(e1 == e2);
  lrs_problem_destroy(p);

  CHECK(lrs_problem_create(0, 5, 40, LRS_INIT_RESIDUAL, &p) == LRS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("adamw step") {
  lrs_adamw_config cfg;
  lrs_adamw_config_default(&cfg);
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.99;
  cfg.weight_decay = 0.1;
  cfg.epsilon = 1e-8;
  double w = 1.0, m = 0.0, v = 0.0;
  const double g = 2.0;
  int64_t step = 0;
  int applied = 0;
  REQUIRE(lrs_adamw_step(&w, &g, &m, &v, &step, 1, &cfg, 0.01, &applied) == LRS_OK);
  CHECK(applied == 1);
  CHECK(step == 1);
  CHECK(w == doctest::Approx(1.0 - 0.01 * (2.0 / (2.0 + 1e-8) + 0.1)).epsilon(1e-12));
  const double bad = NAN;
  REQUIRE(lrs_adamw_step(&w, &bad, &m, &v, &step, 1, &cfg, 0.01, &applied) == LRS_OK);
  CHECK(applied == 0);
  CHECK(step == 1);
}

TEST_CASE("median and band") {
  const double xs[5] = {5, 1, 4, 2, 3};
  double med = 0;
  REQUIRE(lrs_median(xs, 5, &med) == LRS_OK);
  CHECK(med == 3.0);
  CHECK(lrs_median(xs, 0, &med) == LRS_ERR_INVALID_ARGUMENT);
  std::vector<double> ys(100);
  for (int i = 0; i < 100; ++i) ys[static_cast<size_t>(i)] = i + 1;
  lrs_dkw_band band;
  REQUIRE(lrs_dkw_median_band(ys.data(), ys.size(), 0.05, &band) == LRS_OK);
  CHECK(band.epsilon == doctest::Approx(0.13581015157406195).epsilon(1e-12));
  CHECK(band.lower_rank == 37);
  CHECK(band.upper_rank == 64);
  CHECK(band.lower == 37.0);
  CHECK(band.upper == 64.0);
  CHECK(band.degenerate == 0);
}
