// SPDX-License-Identifier: Apache-2.0
//
// Two-stage random search over schedule shapes (search step, then
// evaluation step on a larger seed grid), coordinate linesearch,
// cross-condition re-evaluation and seed-noise characterization.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrslab/schedule.hpp"
#include "lrslab/stats.hpp"
#include "lrslab/workload.hpp"

namespace lrs {

struct SearchConfig {
  Family family = Family::kTwoPointSpline;
  int n_shapes = 3600;
  double lr_lo = 1e-4;
  double lr_hi = 1e-1;
  int lr_n = 16;
  int k_search = 10;
  int top_k = 100;
  int eval_init = 10;
  int eval_order = 10;
  double delta = 0.05;
  std::uint64_t master_seed = 0;
  /// 0 picks LRSLAB_THREADS or the hardware concurrency.
  int threads = 0;
  /// Keep one RunRecord per run in the report.
  bool keep_runs = false;
  bool keep_trajectories = false;

  void validate() const;
  std::vector<double> lr_grid() const;
  std::vector<RunSeed> search_seeds() const;
  std::vector<RunSeed> eval_seeds() const;
};

struct ShapeEntry {
  /// Position of the shape in the sampling sequence.
  int index;
  ShapeParams shape;
  int best_lr_index;
  double best_lr;
  double search_median;
  /// Median score at each grid LR.
  std::vector<double> lr_medians;
  /// Best LR sits on the first or last grid point.
  bool edge_lr;
  /// Median landed on the divergence sentinel.
  bool unstable;
  std::optional<double> eval_median;
  std::optional<DkwBand> band;
  std::vector<double> eval_scores;
};

struct SearchReport {
  Family family;
  std::vector<ShapeEntry> entries;
  std::vector<RunRecord> runs;
  std::vector<std::string> warnings;

  std::vector<double> best_scores() const;
  /// Count of shapes whose best LR is each grid index.
  std::vector<int> best_lr_histogram(int lr_n) const;
};

/// Median over seeds of each run's score.
double score(const ShapeParams& shape, double base_lr, const Workload& workload,
             std::span<const RunSeed> seeds, const Condition& condition = {});

/// Shape i of a family under a master seed.
ShapeParams search_shape(Family family, std::uint64_t master_seed, int index);

SearchReport search_step(const SearchConfig& config, const Workload& workload,
                         const Condition& condition = {});

/// Re-scores the top-k entries on the evaluation seed grid and re-ranks them.
SearchReport evaluation_step(const SearchReport& report, const SearchConfig& config,
                             const Workload& workload, const Condition& condition = {});

struct LinesearchRow {
  std::string param;
  double value;
  bool original;
  double best_lr;
  double median;
  std::optional<DkwBand> band;
};

struct LinesearchRequest {
  /// Parameters to sweep; empty sweeps all.
  std::vector<std::string> params;
  /// Explicit sweep values; out-of-range values throw ValidationError.
  std::map<std::string, std::vector<double>> values;
  int points = 9;
};

/// `points` values uniform over the range (log-uniform where sampled so),
/// with the original value merged in.
std::vector<double> linesearch_values(const ParamSpec& spec, double original, int points);

std::vector<LinesearchRow> coordinate_linesearch(const ShapeParams& shape,
                                                 const SearchConfig& config,
                                                 const Workload& workload,
                                                 const LinesearchRequest& request = {},
                                                 const Condition& condition = {});

struct MatrixCell {
  std::string selection;
  std::string evaluation;
  double median;
  std::optional<DkwBand> band;
};

struct CrossConditionResult {
  std::vector<ShapeEntry> selected;  // one per condition
  std::vector<MatrixCell> cells;     // row-major, selection x evaluation
};

CrossConditionResult cross_condition_matrix(std::span<const Condition> conditions,
                                            const SearchConfig& config,
                                            const Workload& workload);

struct NoiseResult {
  std::vector<int> subset_sizes;
  std::vector<double> false_negative_rates;
  std::vector<double> reference_medians;
  /// subset_medians[s][i]: median of the first subset_sizes[s] B-scores of shape i.
  std::vector<std::vector<double>> subset_medians;
};

/// scores_a[i], scores_b[i]: per-seed scores of shape i from two independent
/// seed sets. The reference ranking uses all of A.
NoiseResult noise_from_scores(const std::vector<std::vector<double>>& scores_a,
                              const std::vector<std::vector<double>>& scores_b,
                              std::span<const int> subset_sizes, int top_k);

/// Fraction of the reference top-k missing from the candidate top-k.
double false_negative_rate(std::span<const double> reference,
                           std::span<const double> candidate, int top_k);

struct NoiseConfig {
  int seeds = 100;
  std::vector<int> subset_sizes = {1, 3, 10, 100};
  int top_k = 100;
};

NoiseResult noise_characterization(std::span<const ShapeParams> shapes,
                                   std::span<const double> base_lrs,
                                   const SearchConfig& config,
                                   const NoiseConfig& noise,
                                   const Workload& workload,
                                   const Condition& condition = {});

}  // namespace lrs
