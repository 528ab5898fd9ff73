/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to lrslab. Handles are opaque; every function returns an
 * lrs_status and reports details through lrs_last_error() on the calling
 * thread. Output buffers are caller-allocated unless stated otherwise.
 */
#ifndef LRSLAB_LRSLAB_H
#define LRSLAB_LRSLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(LRSLAB_BUILDING_LIBRARY)
#define LRS_API __attribute__((visibility("default")))
#else
#define LRS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrs_status {
  LRS_OK = 0,
  LRS_ERR_INVALID_ARGUMENT = 1,
  LRS_ERR_CONFIG = 2,
  LRS_ERR_DIVERGED = 3,
  LRS_ERR_BUFFER_TOO_SMALL = 4,
  LRS_ERR_INTERNAL = 5
} lrs_status;

typedef enum lrs_initial_moments {
  LRS_INIT_RESIDUAL = 0,
  LRS_INIT_PARAMETER = 1
} lrs_initial_moments;

typedef struct lrs_shape lrs_shape;
typedef struct lrs_problem lrs_problem;

/* Message of the last failed call on this thread; never NULL. */
LRS_API const char* lrs_last_error(void);
LRS_API const char* lrs_version(void);

/* Shapes. family is a short name such as "tps" or "cos-std". */
LRS_API lrs_status lrs_shape_create(const char* family, const double* params,
                                    size_t n_params, lrs_shape** out);
LRS_API lrs_status lrs_shape_from_json(const char* json, lrs_shape** out);
LRS_API lrs_status lrs_shape_sample(const char* family, uint64_t seed, lrs_shape** out);
LRS_API lrs_status lrs_shape_eval(const lrs_shape* shape, double fraction, double* out);
/* Writes a NUL-terminated JSON document. *needed receives the full size
 * including the terminator; LRS_ERR_BUFFER_TOO_SMALL if capacity is short. */
LRS_API lrs_status lrs_shape_to_json(const lrs_shape* shape, char* buffer,
                                     size_t capacity, size_t* needed);
LRS_API lrs_status lrs_shape_lrs(const lrs_shape* shape, double base_lr, int horizon,
                                 double* out);
LRS_API void lrs_shape_destroy(lrs_shape* shape);

LRS_API lrs_status lrs_base_lr_grid(double lo, double hi, int n, double* out);

/* Linear-regression problems: spectrum lambda_k = 2k / (D + 1). */
LRS_API lrs_status lrs_problem_create(int dim, int batch, int horizon,
                                      lrs_initial_moments init, lrs_problem** out);
LRS_API void lrs_problem_destroy(lrs_problem* problem);

/* losses has horizon + 1 slots. *diverged is set when the recurrence
 * overflowed; entries after the divergence step are +inf. */
LRS_API lrs_status lrs_theory_solve(const lrs_problem* problem, const double* lrs,
                                    double* losses, int* diverged);
/* d log L_T / d lr_t into gradient (horizon slots). */
LRS_API lrs_status lrs_theory_gradient(const lrs_problem* problem, const double* lrs,
                                       double* final_loss, double* gradient);

typedef struct lrs_descent_config {
  double meta_lr;
  int meta_steps;
  double blowup_threshold;
  double shrink_factor;
  double grid_lo;
  double grid_hi;
  int grid_n;
} lrs_descent_config;

LRS_API void lrs_descent_config_default(lrs_descent_config* config);
/* lrs_out has horizon slots. */
LRS_API lrs_status lrs_schedule_descent(const lrs_problem* problem,
                                        const lrs_descent_config* config,
                                        double* lrs_out, double* final_loss);

/* losses has horizon + 1 slots; truncated entries are +inf. */
LRS_API lrs_status lrs_simulate_empirical(const lrs_problem* problem, const double* lrs,
                                          uint64_t seed, double* losses, int* diverged);

typedef struct lrs_adamw_config {
  double beta1;
  double beta2;
  double weight_decay;
  double epsilon;
} lrs_adamw_config;

LRS_API void lrs_adamw_config_default(lrs_adamw_config* config);
/* m, v and *step hold optimizer state; *applied is 0 on a non-finite gradient. */
LRS_API lrs_status lrs_adamw_step(double* params, const double* grads, double* m, double* v,
                                  int64_t* step, size_t n, const lrs_adamw_config* config,
                                  double lr, int* applied);

LRS_API lrs_status lrs_median(const double* values, size_t n, double* out);

typedef struct lrs_dkw_band {
  double epsilon;
  double lower;
  double upper;
  int lower_rank;
  int upper_rank;
  int degenerate;
  int right_unbounded;
} lrs_dkw_band;

LRS_API lrs_status lrs_dkw_median_band(const double* values, size_t n, double delta,
                                       lrs_dkw_band* out);

typedef struct lrs_command_options {
  const char* command;
  const char* config_path;
  const char* out_dir;
  int has_seed;
  uint64_t seed;
  int force;
  int threads;
} lrs_command_options;

/* Returns the process exit code (0, 2 or 3; 1 for other failures).
 * Diagnostics are available through lrs_last_error(). */
LRS_API int lrs_run_command(const lrs_command_options* options);

#ifdef __cplusplus
}
#endif

#endif /* LRSLAB_LRSLAB_H */
