// SPDX-License-Identifier: Apache-2.0
#include "lrslab/lrslab.h"

#include <algorithm>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "lrslab/commands.hpp"
#include "lrslab/errors.hpp"
#include "lrslab/linreg.hpp"
#include "lrslab/schedule.hpp"
#include "lrslab/stats.hpp"
#include "lrslab/toy.hpp"

struct lrs_shape {
  lrs::ShapeParams shape;
};

struct lrs_problem {
  lrs::LinRegProblem problem;
};

namespace {

thread_local std::string g_last_error;

lrs_status fail(lrs_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
lrs_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const lrs::ValidationError& e) {
    return fail(LRS_ERR_INVALID_ARGUMENT, std::string(e.field()) + ": " + e.what());
  } catch (const lrs::ConfigError& e) {
    return fail(LRS_ERR_CONFIG, std::string(e.field()) + ": " + e.what());
  } catch (const lrs::DivergenceError& e) {
    return fail(LRS_ERR_DIVERGED, e.what());
  } catch (const std::exception& e) {
    return fail(LRS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LRS_ERR_INTERNAL, "unknown error");
  }
}

#define LRS_REQUIRE(cond, what) \
  if (!(cond)) return fail(LRS_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* lrs_last_error(void) { return g_last_error.c_str(); }

const char* lrs_version(void) { return LRSLAB_VERSION_STRING; }

lrs_status lrs_shape_create(const char* family, const double* params, size_t n_params,
                            lrs_shape** out) {
  LRS_REQUIRE(family && out && (params || n_params == 0), "null argument");
  return guarded([&] {
    const auto f = lrs::family_from_name(family);
    *out = new lrs_shape{lrs::ShapeParams(f, std::vector<double>(params, params + n_params))};
    return LRS_OK;
  });
}

lrs_status lrs_shape_from_json(const char* json, lrs_shape** out) {
  LRS_REQUIRE(json && out, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw lrs::ValidationError("json", e.what());
    }
    *out = new lrs_shape{lrs::shape_from_json(j)};
    return LRS_OK;
  });
}

lrs_status lrs_shape_sample(const char* family, uint64_t seed, lrs_shape** out) {
  LRS_REQUIRE(family && out, "null argument");
  return guarded([&] {
    *out = new lrs_shape{lrs::sample_shape(lrs::SearchSpace::standard(),
                                           lrs::family_from_name(family), seed)};
    return LRS_OK;
  });
}

lrs_status lrs_shape_eval(const lrs_shape* shape, double fraction, double* out) {
  LRS_REQUIRE(shape && out, "null argument");
  return guarded([&] {
    *out = shape->shape(fraction);
    return LRS_OK;
  });
}

lrs_status lrs_shape_to_json(const lrs_shape* shape, char* buffer, size_t capacity,
                             size_t* needed) {
  LRS_REQUIRE(shape && needed, "null argument");
  return guarded([&] {
    const auto text = lrs::shape_to_json(shape->shape).dump();
    *needed = text.size() + 1;
    if (!buffer || capacity < *needed) {
      return fail(LRS_ERR_BUFFER_TOO_SMALL, "buffer too small");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return LRS_OK;
  });
}

lrs_status lrs_shape_lrs(const lrs_shape* shape, double base_lr, int horizon, double* out) {
  LRS_REQUIRE(shape && out, "null argument");
  return guarded([&] {
    const auto lrs = lrs::ScheduleSpec(shape->shape, base_lr, horizon).lrs();
    std::copy(lrs.begin(), lrs.end(), out);
    return LRS_OK;
  });
}

void lrs_shape_destroy(lrs_shape* shape) { delete shape; }

lrs_status lrs_base_lr_grid(double lo, double hi, int n, double* out) {
  LRS_REQUIRE(out, "null argument");
  return guarded([&] {
    const auto g = lrs::base_lr_grid(lo, hi, n);
    std::copy(g.begin(), g.end(), out);
    return LRS_OK;
  });
}

lrs_status lrs_problem_create(int dim, int batch, int horizon, lrs_initial_moments init,
                              lrs_problem** out) {
  LRS_REQUIRE(out, "null argument");
  LRS_REQUIRE(init == LRS_INIT_RESIDUAL || init == LRS_INIT_PARAMETER, "unknown init");
  return guarded([&] {
    *out = new lrs_problem{lrs::LinRegProblem::make(
        dim, batch, horizon,
        init == LRS_INIT_RESIDUAL ? lrs::InitialMoments::kIsotropicResidual
                                  : lrs::InitialMoments::kIsotropicParameter)};
    return LRS_OK;
  });
}

void lrs_problem_destroy(lrs_problem* problem) { delete problem; }

namespace {

std::span<const double> steps(const lrs_problem* p, const double* lrs) {
  return {lrs, static_cast<std::size_t>(p->problem.horizon)};
}

void copy_losses(const std::vector<double>& losses, int horizon, double* out) {
  const auto n = static_cast<std::size_t>(horizon) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = i < losses.size() ? losses[i] : std::numeric_limits<double>::infinity();
  }
}

}  // namespace

lrs_status lrs_theory_solve(const lrs_problem* problem, const double* lrs, double* losses,
                            int* diverged) {
  LRS_REQUIRE(problem && lrs && losses, "null argument");
  return guarded([&] {
    const auto r = lrs::solve_theory(problem->problem, steps(problem, lrs));
    copy_losses(r.losses, problem->problem.horizon, losses);
    if (diverged) *diverged = r.diverged ? 1 : 0;
    return LRS_OK;
  });
}

lrs_status lrs_theory_gradient(const lrs_problem* problem, const double* lrs,
                               double* final_loss, double* gradient) {
  LRS_REQUIRE(problem && lrs && gradient, "null argument");
  return guarded([&] {
    const auto r = lrs::theory_gradient(problem->problem, steps(problem, lrs));
    std::copy(r.gradient.begin(), r.gradient.end(), gradient);
    if (final_loss) *final_loss = r.final_loss;
    return LRS_OK;
  });
}

void lrs_descent_config_default(lrs_descent_config* config) {
  if (!config) return;
  const lrs::DescentConfig d;
  *config = {d.meta_lr, d.meta_steps, d.blowup_threshold, d.shrink_factor,
             d.grid_lo, d.grid_hi,    d.grid_n};
}

lrs_status lrs_schedule_descent(const lrs_problem* problem, const lrs_descent_config* config,
                                double* lrs_out, double* final_loss) {
  LRS_REQUIRE(problem && lrs_out, "null argument");
  return guarded([&] {
    lrs::DescentConfig c;
    if (config) {
      c.meta_lr = config->meta_lr;
      c.meta_steps = config->meta_steps;
      c.blowup_threshold = config->blowup_threshold;
      c.shrink_factor = config->shrink_factor;
      c.grid_lo = config->grid_lo;
      c.grid_hi = config->grid_hi;
      c.grid_n = config->grid_n;
    }
    const auto r = lrs::schedule_descent(problem->problem, c);
    std::copy(r.lrs.begin(), r.lrs.end(), lrs_out);
    if (final_loss) *final_loss = r.final_loss;
    return LRS_OK;
  });
}

lrs_status lrs_simulate_empirical(const lrs_problem* problem, const double* lrs, uint64_t seed,
                                  double* losses, int* diverged) {
  LRS_REQUIRE(problem && lrs && losses, "null argument");
  return guarded([&] {
    const auto r = lrs::simulate_empirical(problem->problem, steps(problem, lrs), seed);
    copy_losses(r.losses, problem->problem.horizon, losses);
    if (diverged) *diverged = r.diverged ? 1 : 0;
    return LRS_OK;
  });
}

void lrs_adamw_config_default(lrs_adamw_config* config) {
  if (!config) return;
  const lrs::OptimizerConfig d;
  *config = {d.beta1, d.beta2, d.weight_decay, d.epsilon};
}

lrs_status lrs_adamw_step(double* params, const double* grads, double* m, double* v,
                          int64_t* step, size_t n, const lrs_adamw_config* config, double lr,
                          int* applied) {
  LRS_REQUIRE(params && grads && m && v && step && config, "null argument");
  return guarded([&] {
    const lrs::OptimizerConfig c{config->beta1, config->beta2, config->weight_decay,
                                 config->epsilon};
    c.validate();
    lrs::AdamState state(n);
    std::copy(m, m + n, state.m.begin());
    std::copy(v, v + n, state.v.begin());
    state.step = *step;
    const bool ok = lrs::adamw_step({params, n}, {grads, n}, state, c, lr);
    if (ok) {
      std::copy(state.m.begin(), state.m.end(), m);
      std::copy(state.v.begin(), state.v.end(), v);
      *step = state.step;
    }
    if (applied) *applied = ok ? 1 : 0;
    return LRS_OK;
  });
}

lrs_status lrs_median(const double* values, size_t n, double* out) {
  LRS_REQUIRE(values && out, "null argument");
  return guarded([&] {
    *out = lrs::median({values, n});
    return LRS_OK;
  });
}

lrs_status lrs_dkw_median_band(const double* values, size_t n, double delta,
                               lrs_dkw_band* out) {
  LRS_REQUIRE(values && out, "null argument");
  return guarded([&] {
    const auto b = lrs::dkw_median_band({values, n}, delta);
    *out = {b.epsilon, b.lower, b.upper, b.lower_rank, b.upper_rank, b.degenerate ? 1 : 0,
            b.right_unbounded ? 1 : 0};
    return LRS_OK;
  });
}

int lrs_run_command(const lrs_command_options* options) {
  if (!options || !options->command || !options->config_path || !options->out_dir) {
    g_last_error = "null argument";
    return lrs::kExitConfig;
  }
  lrs::CommandOptions o;
  o.command = options->command;
  o.config = options->config_path;
  o.out = options->out_dir;
  if (options->has_seed) o.seed = options->seed;
  o.force = options->force != 0;
  o.threads = options->threads;
  std::ostringstream err;
  const int code = lrs::run_command(o, err);
  g_last_error = err.str();
  return code;
}

}  // extern "C"
