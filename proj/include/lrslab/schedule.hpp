// SPDX-License-Identifier: Apache-2.0
//
// Learning-rate schedule shapes. A shape is a map [0,1] -> [0,1] from
// training progress to a multiplier of the base learning rate; the absolute
// schedule at step t of a T-step run is base_lr * shape(t / T).
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lrslab/interpolate.hpp"

namespace lrs {

enum class Family : int {
  kConstant = 0,             // con
  kCosine,                   // cos-std
  kGeneralizedCosine,        // cos-gen
  kSqrt,                     // sqrt
  kRex,                      // rex
  kTwoPointSpline,           // tps
  kTwoPointLinear,           // tpl
  kSmoothNonMonotonic,       // snm
  kCosineFinal,              // cos-y
  kTwoPointSplineFinal,      // tps-y
};

inline constexpr std::size_t kFamilyCount = 10;

std::string_view family_name(Family family) noexcept;
Family family_from_name(std::string_view name);
std::span<const Family> all_families() noexcept;
/// The eight families without a tunable final value.
std::span<const Family> core_families() noexcept;
/// Every family except snm starts with a linear warmup from 0.
bool has_linear_warmup(Family family) noexcept;

enum class Sampling { kUniform, kLogUniform };

struct ParamSpec {
  std::string name;
  double lo;
  double hi;
  Sampling law;
};

/// Per-family parameter ranges and sampling laws.
class SearchSpace {
 public:
  static const SearchSpace& standard();

  const std::vector<ParamSpec>& params(Family family) const;

  /// Narrows one parameter's range. The new range must lie inside the
  /// standard range so sampled shapes stay valid.
  void restrict_range(Family family, std::string_view name, double lo,
                      double hi);

 private:
  SearchSpace() = default;
  std::array<std::vector<ParamSpec>, kFamilyCount> params_;
  friend SearchSpace make_standard_space();
};

class ShapeParams {
 public:
  /// Values follow the order of SearchSpace::standard().params(family).
  /// Throws ValidationError naming the first offending parameter.
  ShapeParams(Family family, std::vector<double> values);

  Family family() const noexcept { return family_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<ParamSpec>& specs() const;

  std::size_t index_of(std::string_view name) const;
  double value(std::string_view name) const;
  ShapeParams with_value(std::string_view name, double v) const;

  /// Warmup fraction (x0 for the spline families, 0 for snm).
  double warmup() const noexcept { return warmup_; }

  /// The shape multiplier at progress fraction f in [0,1].
  double operator()(double f) const;

  /// Multipliers at f = t / horizon for t = 0 .. horizon-1.
  std::vector<double> sample_steps(int horizon) const;

  /// Knots of the spline-based families (empty otherwise).
  const std::vector<Knot>& control_points() const noexcept {
    return curve_.knots();
  }

  friend bool operator==(const ShapeParams& a, const ShapeParams& b) {
    return a.family_ == b.family_ && a.values_ == b.values_;
  }

 private:
  double decay(double g) const;

  Family family_;
  std::vector<double> values_;
  double warmup_ = 0.0;
  Interpolant curve_;
};

double eval_shape(const ShapeParams& shape, double f);

/// Draws one shape; identical seeds give bit-identical parameters.
ShapeParams sample_shape(const SearchSpace& space, Family family,
                         std::uint64_t seed);

/// n geometrically spaced values with exact endpoints lo and hi.
std::vector<double> base_lr_grid(double lo, double hi, int n);

struct ScheduleSpec {
  ScheduleSpec(ShapeParams shape, double base_lr, int horizon);

  ShapeParams shape;
  double base_lr;
  int horizon;

  double fraction(int step) const noexcept {
    return static_cast<double>(step) / static_cast<double>(horizon);
  }
  double lr(int step) const { return base_lr * shape(fraction(step)); }
  /// Absolute learning rates for steps 0 .. horizon-1.
  std::vector<double> lrs() const;
};

nlohmann::json shape_to_json(const ShapeParams& shape);
ShapeParams shape_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_from_json(const nlohmann::json& j);

}  // namespace lrs
