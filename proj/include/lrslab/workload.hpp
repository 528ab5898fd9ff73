// SPDX-License-Identifier: Apache-2.0
//
// Common contract for everything the search harness can train: a workload
// turns (schedule, seed pair, condition) into a scalar score.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrslab/linreg.hpp"
#include "lrslab/schedule.hpp"
#include "lrslab/toy.hpp"

namespace lrs {

/// Optimizer and/or horizon overrides applied on top of a workload.
struct Condition {
  std::string label = "default";
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<double> weight_decay;
  std::optional<int> horizon;

  OptimizerConfig apply(OptimizerConfig base) const;
  nlohmann::json to_json() const;
  static Condition from_json(const nlohmann::json& j);
};

struct RunOutcome {
  /// min over steps of the training loss; +inf when the run diverged.
  double score;
  bool diverged;
  /// Downsampled loss trajectory, filled only when requested.
  std::vector<double> trajectory;
};

class Workload {
 public:
  virtual ~Workload() = default;
  virtual std::string name() const = 0;
  virtual int horizon() const = 0;
  /// True when the score ignores the seed pair.
  virtual bool deterministic() const { return false; }
  virtual RunOutcome run(const ScheduleSpec& schedule, const RunSeed& seed,
                         const Condition& condition,
                         bool keep_trajectory = false) const = 0;

  int horizon_for(const Condition& condition) const {
    return condition.horizon.value_or(horizon());
  }
};

/// Scores schedules by the mean-loss recurrence; seeds are ignored.
class LinRegTheoryWorkload final : public Workload {
 public:
  explicit LinRegTheoryWorkload(LinRegProblem problem) : problem_(std::move(problem)) {}
  std::string name() const override { return "linreg-theory"; }
  int horizon() const override { return problem_.horizon; }
  bool deterministic() const override { return true; }
  RunOutcome run(const ScheduleSpec& schedule, const RunSeed& seed,
                 const Condition& condition, bool keep_trajectory) const override;
  const LinRegProblem& problem() const noexcept { return problem_; }

 private:
  LinRegProblem problem_;
};

/// Minibatch SGD on a fixed random kernel; init_seed draws the residuals and
/// data_order_seed the minibatches.
class LinRegEmpiricalWorkload final : public Workload {
 public:
  LinRegEmpiricalWorkload(LinRegProblem problem, std::uint64_t rotation_seed);
  std::string name() const override { return "linreg-empirical"; }
  int horizon() const override { return problem_.horizon; }
  RunOutcome run(const ScheduleSpec& schedule, const RunSeed& seed,
                 const Condition& condition, bool keep_trajectory) const override;

 private:
  LinRegProblem problem_;
  EmpiricalKernel kernel_;
};

enum class ToyObjective { kLoss, kError };

class ToyTrainingWorkload final : public Workload {
 public:
  ToyTrainingWorkload(ToyWorkloadSpec spec, OptimizerConfig optimizer,
                      ToyObjective objective = ToyObjective::kLoss);
  std::string name() const override { return "toy"; }
  int horizon() const override { return toy_.spec().horizon; }
  RunOutcome run(const ScheduleSpec& schedule, const RunSeed& seed,
                 const Condition& condition, bool keep_trajectory) const override;
  const ToyWorkload& toy() const noexcept { return toy_; }

 private:
  ToyWorkload toy_;
  OptimizerConfig optimizer_;
  ToyObjective objective_;
};

/// Keeps at most `points` evenly spaced entries, always including the last.
std::vector<double> downsample(const std::vector<double>& values, std::size_t points);

struct RunRecord {
  /// Canonical id; sorting by it fixes the aggregation order.
  std::string run_id;
  nlohmann::json schedule;
  RunSeed seed;
  std::string condition;
  double score;
  bool diverged;
  std::vector<double> trajectory;

  nlohmann::json to_json() const;
};

}  // namespace lrs
