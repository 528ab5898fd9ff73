// SPDX-License-Identifier: Apache-2.0
#include "lrslab/workload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrslab/errors.hpp"

namespace lrs {

OptimizerConfig Condition::apply(OptimizerConfig base) const {
  if (beta1) base.beta1 = *beta1;
  if (beta2) base.beta2 = *beta2;
  if (weight_decay) base.weight_decay = *weight_decay;
  base.validate();
  return base;
}

nlohmann::json Condition::to_json() const {
  nlohmann::json j{{"label", label}};
  if (beta1) j["beta1"] = *beta1;
  if (beta2) j["beta2"] = *beta2;
  if (weight_decay) j["weight_decay"] = *weight_decay;
  if (horizon) j["horizon"] = *horizon;
  return j;
}

Condition Condition::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("condition", "condition must be an object");
  Condition c;
  for (const auto& [key, value] : j.items()) {
    if (key == "label") {
      if (!value.is_string()) throw ConfigError("condition.label", "label must be a string");
      c.label = value.get<std::string>();
    } else if (key == "beta1" || key == "beta2" || key == "weight_decay") {
      if (!value.is_number()) throw ConfigError("condition." + key, key + " must be a number");
      const double v = value.get<double>();
      (key == "beta1" ? c.beta1 : key == "beta2" ? c.beta2 : c.weight_decay) = v;
    } else if (key == "horizon") {
      if (!value.is_number_integer() || value.get<long long>() < 1) {
        throw ConfigError("condition.horizon", "horizon must be a positive integer");
      }
      c.horizon = value.get<int>();
    } else {
      throw ConfigError("condition." + key, "unknown condition field '" + key + "'");
    }
  }
  try {
    c.apply(OptimizerConfig{});
  } catch (const ValidationError& e) {
    throw ConfigError("condition." + e.field(), e.what());
  }
  return c;
}

std::vector<double> downsample(const std::vector<double>& values, std::size_t points) {
  if (points == 0 || values.size() <= points) return values;
  std::vector<double> out;
  out.reserve(points);
  const double stride = static_cast<double>(values.size() - 1) /
                        static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(stride * static_cast<double>(i)));
    out.push_back(values[std::min(k, values.size() - 1)]);
  }
  return out;
}

namespace {

constexpr std::size_t kTrajectoryPoints = 101;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

RunOutcome LinRegTheoryWorkload::run(const ScheduleSpec& schedule, const RunSeed&,
                                     const Condition& condition,
                                     bool keep_trajectory) const {
  const auto problem = problem_.with_horizon(horizon_for(condition));
  const auto lrs = schedule.lrs();
  if (!keep_trajectory) {
    const double s = theory_min_loss(problem, lrs);
    return {s, std::isinf(s), {}};
  }
  const auto r = solve_theory(problem, lrs);
  RunOutcome out{kInf, r.diverged, downsample(r.losses, kTrajectoryPoints)};
  if (!r.diverged) out.score = *std::min_element(r.losses.begin(), r.losses.end());
  return out;
}

LinRegEmpiricalWorkload::LinRegEmpiricalWorkload(LinRegProblem problem,
                                                 std::uint64_t rotation_seed)
    : problem_(std::move(problem)), kernel_(problem_, rotation_seed) {}

RunOutcome LinRegEmpiricalWorkload::run(const ScheduleSpec& schedule,
                                        const RunSeed& seed,
                                        const Condition& condition,
                                        bool keep_trajectory) const {
  const auto problem = problem_.with_horizon(horizon_for(condition));
  const auto r = simulate_empirical(problem, kernel_, schedule.lrs(), seed.init_seed,
                                    seed.data_order_seed);
  RunOutcome out{kInf, r.diverged, {}};
  if (!r.diverged) out.score = *std::min_element(r.losses.begin(), r.losses.end());
  if (keep_trajectory) out.trajectory = downsample(r.losses, kTrajectoryPoints);
  return out;
}

ToyTrainingWorkload::ToyTrainingWorkload(ToyWorkloadSpec spec,
                                         OptimizerConfig optimizer,
                                         ToyObjective objective)
    : toy_(std::move(spec)), optimizer_(optimizer), objective_(objective) {
  optimizer_.validate();
}

RunOutcome ToyTrainingWorkload::run(const ScheduleSpec& schedule, const RunSeed& seed,
                                    const Condition& condition,
                                    bool keep_trajectory) const {
  const auto r = toy_.train(schedule, condition.apply(optimizer_), seed);
  RunOutcome out{kInf, r.diverged, {}};
  if (!r.diverged) out.score = objective_ == ToyObjective::kLoss ? r.min_loss : r.min_error;
  if (keep_trajectory) {
    std::vector<double> losses;
    losses.reserve(r.eval_losses.size());
    for (const auto& [step, loss] : r.eval_losses) losses.push_back(loss);
    out.trajectory = downsample(losses, kTrajectoryPoints);
  }
  return out;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j{{"run_id", run_id},
                   {"schedule", schedule},
                   {"init_seed", seed.init_seed},
                   {"data_order_seed", seed.data_order_seed},
                   {"condition", condition},
                   {"diverged", diverged}};
  // JSON has no infinity; diverged runs carry a null score.
  j["score"] = std::isfinite(score) ? nlohmann::json(score) : nlohmann::json(nullptr);
  if (!trajectory.empty()) j["trajectory"] = trajectory;
  return j;
}

}  // namespace lrs
