// SPDX-License-Identifier: Apache-2.0
#include "lrslab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"

namespace lrs {
namespace {

constexpr std::array<std::string_view, kFamilyCount> kNames = {
    "con", "cos-std", "cos-gen", "sqrt", "rex",
    "tps", "tpl",     "snm",     "cos-y", "tps-y"};

constexpr std::array<Family, kFamilyCount> kAll = {
    Family::kConstant,          Family::kCosine,
    Family::kGeneralizedCosine, Family::kSqrt,
    Family::kRex,               Family::kTwoPointSpline,
    Family::kTwoPointLinear,    Family::kSmoothNonMonotonic,
    Family::kCosineFinal,       Family::kTwoPointSplineFinal};

// Snm knots that land on the same abscissa are separated by this much.
constexpr double kKnotNudge = 1e-6;

std::size_t idx(Family f) { return static_cast<std::size_t>(f); }

double cosine_decay(double g, double alpha) {
  const double s = std::min(alpha * g, 1.0);
  return 0.5 * (std::cos(std::numbers::pi * s) + 1.0);
}

std::vector<Knot> two_point_knots(std::span<const double> v) {
  const double x0 = v[0], y1 = v[1], dx1 = v[2], dx2 = v[3], dy2 = v[4];
  const double x1 = x0 + dx1 * (1.0 - x0);
  const double x2 = x1 + dx2 * (1.0 - x1);
  const double y2 = y1 * (1.0 - dy2);
  return {{x0, 1.0}, {x1, y1}, {x2, y2}, {1.0, 0.0}};
}

std::vector<Knot> smooth_non_monotonic_knots(std::span<const double> v) {
  const double y_start = v[0], y_end = v[1], x_peak = v[2], y1 = v[3],
               dx1 = v[4], y2 = v[5], dx2 = v[6];
  const double xa = dx1;
  const double xb = xa + dx2 * (1.0 - xa);
  struct Tagged {
    Knot k;
    bool peak;
  };
  std::vector<Tagged> t = {{{0.0, y_start}, false},
                           {{xa, y1}, false},
                           {{xb, y2}, false},
                           {{x_peak, 1.0}, true},
                           {{1.0, y_end}, false}};
  auto order = [](const Tagged& a, const Tagged& b) {
    if (a.k.x != b.k.x) return a.k.x < b.k.x;
    return a.peak && !b.peak;
  };
  std::stable_sort(t.begin(), t.end(), order);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].k.x <= t[i - 1].k.x && !t[i].peak) {
      t[i].k.x = t[i - 1].k.x + kKnotNudge;
    }
  }
  std::stable_sort(t.begin(), t.end(), order);
  std::vector<Knot> knots;
  knots.reserve(t.size());
  for (const auto& e : t) knots.push_back(e.k);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    knots[i].x = std::max(knots[i].x, knots[i - 1].x);
  }
  return knots;
}

}  // namespace

std::string_view family_name(Family family) noexcept {
  return kNames[idx(family)];
}

Family family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    if (kNames[i] == name) return kAll[i];
  }
  throw ValidationError("family",
                        "unknown schedule family '" + std::string(name) + "'");
}

std::span<const Family> all_families() noexcept { return kAll; }

std::span<const Family> core_families() noexcept {
  return std::span<const Family>(kAll).first(8);
}

bool has_linear_warmup(Family family) noexcept {
  return family != Family::kSmoothNonMonotonic;
}

SearchSpace make_standard_space() {
  SearchSpace s;
  const ParamSpec warmup{"warmup", 0.0, 0.25, Sampling::kUniform};
  const ParamSpec alpha{"alpha", 0.0, 2.0, Sampling::kUniform};
  auto unit = [](const char* n) {
    return ParamSpec{n, 0.0, 1.0, Sampling::kUniform};
  };
  const std::vector<ParamSpec> two_point = {
      {"x0", 0.01, 0.25, Sampling::kUniform},
      {"y1", 0.1, 1.0, Sampling::kUniform},
      unit("delta_x1"),
      unit("delta_x2"),
      unit("delta_y2")};

  s.params_[idx(Family::kConstant)] = {warmup};
  s.params_[idx(Family::kCosine)] = {warmup, alpha};
  s.params_[idx(Family::kGeneralizedCosine)] = {
      warmup, alpha, {"exponent", 0.1, 10.0, Sampling::kLogUniform}};
  s.params_[idx(Family::kSqrt)] = {warmup, alpha};
  s.params_[idx(Family::kRex)] = {warmup,
                                  {"beta", 1e-8, 32.0, Sampling::kLogUniform}};
  s.params_[idx(Family::kTwoPointSpline)] = two_point;
  s.params_[idx(Family::kTwoPointLinear)] = two_point;
  s.params_[idx(Family::kSmoothNonMonotonic)] = {
      unit("y_start"), unit("y_end"),    unit("x_peak"), unit("y1"),
      unit("delta_x1"), unit("y2"), unit("delta_x2")};
  s.params_[idx(Family::kCosineFinal)] = {warmup, unit("y_final")};
  auto tps_y = two_point;
  tps_y.push_back(unit("y_final"));
  s.params_[idx(Family::kTwoPointSplineFinal)] = tps_y;
  return s;
}

const SearchSpace& SearchSpace::standard() {
  static const SearchSpace space = make_standard_space();
  return space;
}

const std::vector<ParamSpec>& SearchSpace::params(Family family) const {
  return params_[idx(family)];
}

void SearchSpace::restrict_range(Family family, std::string_view name,
                                 double lo, double hi) {
  const auto& base = standard().params(family);
  auto& mine = params_[idx(family)];
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].name != name) continue;
    if (!(lo <= hi) || lo < base[i].lo || hi > base[i].hi) {
      throw ValidationError(std::string(name),
                            "range for '" + std::string(name) +
                                "' must lie inside the standard range");
    }
    if (mine[i].law == Sampling::kLogUniform && lo <= 0.0) {
      throw ValidationError(std::string(name),
                            "log-uniform range must be positive");
    }
    mine[i].lo = lo;
    mine[i].hi = hi;
    return;
  }
  throw ValidationError(std::string(name), "family " +
                                               std::string(family_name(family)) +
                                               " has no parameter '" +
                                               std::string(name) + "'");
}

ShapeParams::ShapeParams(Family family, std::vector<double> values)
    : family_(family), values_(std::move(values)) {
  const auto& specs = SearchSpace::standard().params(family_);
  if (values_.size() != specs.size()) {
    throw ValidationError(
        "params", std::string(family_name(family_)) + " expects " +
                      std::to_string(specs.size()) + " parameters, got " +
                      std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double v = values_[i];
    if (!(v >= specs[i].lo && v <= specs[i].hi)) {
      throw ValidationError(
          specs[i].name, std::string(family_name(family_)) + " parameter '" +
                             specs[i].name + "' = " + std::to_string(v) +
                             " outside [" + std::to_string(specs[i].lo) +
                             ", " + std::to_string(specs[i].hi) + "]");
    }
  }
  switch (family_) {
    case Family::kTwoPointSpline:
    case Family::kTwoPointSplineFinal:
      warmup_ = values_[0];
      curve_ = Interpolant(two_point_knots(values_),
                           Interpolant::Kind::kMonotoneCubic);
      break;
    case Family::kTwoPointLinear:
      warmup_ = values_[0];
      curve_ = Interpolant(two_point_knots(values_), Interpolant::Kind::kLinear);
      break;
    case Family::kSmoothNonMonotonic:
      warmup_ = 0.0;
      curve_ = Interpolant(smooth_non_monotonic_knots(values_),
                           Interpolant::Kind::kMonotoneCubic);
      break;
    default:
      warmup_ = values_[0];
      break;
  }
}

const std::vector<ParamSpec>& ShapeParams::specs() const {
  return SearchSpace::standard().params(family_);
}

std::size_t ShapeParams::index_of(std::string_view name) const {
  const auto& s = specs();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].name == name) return i;
  }
  throw ValidationError(std::string(name),
                        std::string(family_name(family_)) +
                            " has no parameter '" + std::string(name) + "'");
}

double ShapeParams::value(std::string_view name) const {
  return values_[index_of(name)];
}

ShapeParams ShapeParams::with_value(std::string_view name, double v) const {
  auto vals = values_;
  vals[index_of(name)] = v;
  return ShapeParams(family_, std::move(vals));
}

// Decay part as a function of post-warmup progress g in [0,1].
double ShapeParams::decay(double g) const {
  const auto& v = values_;
  switch (family_) {
    case Family::kConstant:
      return 1.0;
    case Family::kCosine:
      return cosine_decay(g, v[1]);
    case Family::kGeneralizedCosine:
      return std::pow(cosine_decay(g, v[1]), v[2]);
    case Family::kSqrt:
      return std::sqrt(std::max(1.0 - v[1] * g, 0.0));
    case Family::kRex: {
      const double beta = v[1];
      const double z = 1.0 - g;
      if (beta == 0.0) return 1.0;
      if (z <= 0.0) return 0.0;
      return z / (beta + (1.0 - beta) * z);
    }
    case Family::kCosineFinal:
      return v[1] + (1.0 - v[1]) * cosine_decay(g, 1.0);
    default:
      return 1.0;
  }
}

double ShapeParams::operator()(double f) const {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw ValidationError("f", "shape evaluated outside [0,1]: " +
                                   std::to_string(f));
  }
  double out;
  switch (family_) {
    case Family::kSmoothNonMonotonic:
      out = curve_(f);
      break;
    case Family::kTwoPointSpline:
    case Family::kTwoPointLinear:
    case Family::kTwoPointSplineFinal:
      if (f <= warmup_) {
        out = f / warmup_;
      } else {
        out = curve_(f);
        if (family_ == Family::kTwoPointSplineFinal) {
          out = values_[5] + (1.0 - values_[5]) * out;
        }
      }
      break;
    default:
      if (f < warmup_) {
        out = f / warmup_;
      } else {
        const double g = warmup_ < 1.0 ? (f - warmup_) / (1.0 - warmup_) : 1.0;
        out = decay(std::min(g, 1.0));
      }
      break;
  }
  return std::clamp(out, 0.0, 1.0);
}

std::vector<double> ShapeParams::sample_steps(int horizon) const {
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    out[static_cast<std::size_t>(t)] =
        (*this)(static_cast<double>(t) / static_cast<double>(horizon));
  }
  return out;
}

double eval_shape(const ShapeParams& shape, double f) { return shape(f); }

ShapeParams sample_shape(const SearchSpace& space, Family family,
                         std::uint64_t seed) {
  Engine rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& specs = space.params(family);
  std::vector<double> values;
  values.reserve(specs.size());
  for (const auto& p : specs) {
    const double u = unit(rng);
    double v;
    if (p.law == Sampling::kLogUniform) {
      v = std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
    } else {
      v = p.lo + u * (p.hi - p.lo);
    }
    values.push_back(std::clamp(v, p.lo, p.hi));
  }
  return ShapeParams(family, std::move(values));
}

std::vector<double> base_lr_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw ValidationError("lo", "learning-rate grid needs 0 < lo < hi");
  }
  if (n < 2) throw ValidationError("n", "learning-rate grid needs n >= 2");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double log_lo = std::log(lo);
  const double span = std::log(hi) - log_lo;
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_lo + span * static_cast<double>(i) / (n - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

ScheduleSpec::ScheduleSpec(ShapeParams shape_, double base_lr_, int horizon_)
    : shape(std::move(shape_)), base_lr(base_lr_), horizon(horizon_) {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    throw ValidationError("base_lr", "base learning rate must be positive");
  }
  if (horizon < 1) throw ValidationError("horizon", "horizon must be >= 1");
}

std::vector<double> ScheduleSpec::lrs() const {
  auto out = shape.sample_steps(horizon);
  for (auto& v : out) v *= base_lr;
  return out;
}

nlohmann::json shape_to_json(const ShapeParams& shape) {
  nlohmann::json params = nlohmann::json::object();
  const auto& specs = shape.specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    params[specs[i].name] = shape.values()[i];
  }
  return {{"family", std::string(family_name(shape.family()))},
          {"params", params}};
}

ShapeParams shape_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw ValidationError("family", "shape needs a string 'family'");
  }
  const Family family = family_from_name(j["family"].get<std::string>());
  if (!j.contains("params") || !j["params"].is_object()) {
    throw ValidationError("params", "shape needs a 'params' object");
  }
  const auto& p = j["params"];
  const auto& specs = SearchSpace::standard().params(family);
  std::vector<double> values;
  for (const auto& s : specs) {
    if (!p.contains(s.name) || !p[s.name].is_number()) {
      throw ValidationError(s.name, "missing numeric parameter '" + s.name +
                                        "' for family " +
                                        std::string(family_name(family)));
    }
    values.push_back(p[s.name].get<double>());
  }
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool known = std::any_of(specs.begin(), specs.end(),
                             [&](const ParamSpec& s) { return s.name == it.key(); });
    if (!known) {
      throw ValidationError(it.key(), "unknown parameter '" + it.key() +
                                          "' for family " +
                                          std::string(family_name(family)));
    }
  }
  return ShapeParams(family, std::move(values));
}

nlohmann::json schedule_to_json(const ScheduleSpec& spec) {
  return {{"shape", shape_to_json(spec.shape)},
          {"base_lr", spec.base_lr},
          {"horizon", spec.horizon}};
}

ScheduleSpec schedule_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("shape")) {
    throw ValidationError("shape", "schedule needs a 'shape'");
  }
  if (!j.contains("base_lr") || !j["base_lr"].is_number()) {
    throw ValidationError("base_lr", "schedule needs numeric 'base_lr'");
  }
  if (!j.contains("horizon") || !j["horizon"].is_number_integer()) {
    throw ValidationError("horizon", "schedule needs integer 'horizon'");
  }
  return ScheduleSpec(shape_from_json(j["shape"]), j["base_lr"].get<double>(),
                      j["horizon"].get<int>());
}

}  // namespace lrs
