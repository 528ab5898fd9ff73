// SPDX-License-Identifier: Apache-2.0
#include "lrslab/config.hpp"

#include <fstream>
#include <limits>

#include "lrslab/errors.hpp"

namespace lrs {

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", "malformed JSON in " + path.string() + ": " + e.what());
  }
}

ObjectReader::ObjectReader(const nlohmann::json& j, std::string path)
    : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) {
    throw ConfigError(path_.empty() ? "config" : path_,
                      "'" + (path_.empty() ? std::string("config") : path_) +
                          "' must be a JSON object");
  }
}

std::string ObjectReader::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const nlohmann::json& ObjectReader::require(const std::string& key) {
  seen_.insert(key);
  if (!j_.contains(key)) throw ConfigError(field(key), "missing field '" + field(key) + "'");
  return j_.at(key);
}

const nlohmann::json& ObjectReader::raw(const std::string& key) { return require(key); }

std::optional<nlohmann::json> ObjectReader::optional_raw(const std::string& key) {
  seen_.insert(key);
  if (!j_.contains(key)) return std::nullopt;
  return j_.at(key);
}

double ObjectReader::number(const std::string& key, std::optional<double> fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) {
    if (fallback) return *fallback;
    return require(key).get<double>();
  }
  const auto& v = j_.at(key);
  if (!v.is_number()) throw ConfigError(field(key), "'" + field(key) + "' must be a number");
  return v.get<double>();
}

long long ObjectReader::integer(const std::string& key, std::optional<long long> fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) {
    if (fallback) return *fallback;
    require(key);
  }
  const auto& v = j_.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(field(key), "'" + field(key) + "' must be an integer");
  }
  return v.get<long long>();
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key,
                                             std::optional<std::uint64_t> fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) {
    if (fallback) return *fallback;
    require(key);
  }
  const auto& v = j_.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  throw ConfigError(field(key), "'" + field(key) + "' must be a non-negative integer");
}

bool ObjectReader::boolean(const std::string& key, std::optional<bool> fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) {
    if (fallback) return *fallback;
    require(key);
  }
  const auto& v = j_.at(key);
  if (!v.is_boolean()) throw ConfigError(field(key), "'" + field(key) + "' must be a boolean");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key, std::optional<std::string> fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) {
    if (fallback) return *fallback;
    require(key);
  }
  const auto& v = j_.at(key);
  if (!v.is_string()) throw ConfigError(field(key), "'" + field(key) + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> ObjectReader::numbers(const std::string& key) {
  const auto& v = require(key);
  if (!v.is_array()) throw ConfigError(field(key), "'" + field(key) + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw ConfigError(field(key), "'" + field(key) + "' must contain only numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!seen_.count(key)) throw ConfigError(field(key), "unknown field '" + field(key) + "'");
  }
}

namespace {

int checked_int(ObjectReader& r, const std::string& key, long long fallback, long long lo) {
  const long long v = r.integer(key, fallback);
  if (v < lo || v > std::numeric_limits<int>::max()) {
    throw ConfigError(r.field(key), "'" + r.field(key) + "' must be >= " + std::to_string(lo));
  }
  return static_cast<int>(v);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

}  // namespace

LinRegProblem problem_from_json(const nlohmann::json& j, const std::string& path) {
  ObjectReader r(j, path);
  const int dim = checked_int(r, "dim", 500, 1);
  const int batch = checked_int(r, "batch", 32, 1);
  const int horizon = checked_int(r, "horizon", 1000, 1);
  const auto init_name = r.string("init", "residual");
  InitialMoments init;
  if (init_name == "residual") {
    init = InitialMoments::kIsotropicResidual;
  } else if (init_name == "parameter") {
    init = InitialMoments::kIsotropicParameter;
  } else {
    throw ConfigError(r.field("init"), "'" + r.field("init") +
                                           "' must be \"residual\" or \"parameter\"");
  }
  r.finish();
  if (batch > dim) throw ConfigError(r.field("batch"), "batch must not exceed dim");
  return LinRegProblem::make(dim, batch, horizon, init);
}

DescentConfig descent_from_json(const nlohmann::json& j, const std::string& path) {
  ObjectReader r(j, path);
  DescentConfig c;
  c.meta_lr = r.number("meta_lr", c.meta_lr);
  c.meta_steps = checked_int(r, "meta_steps", c.meta_steps, 0);
  c.blowup_threshold = r.number("blowup_threshold", c.blowup_threshold);
  c.shrink_factor = r.number("shrink_factor", c.shrink_factor);
  c.grid_lo = r.number("grid_lo", c.grid_lo);
  c.grid_hi = r.number("grid_hi", c.grid_hi);
  c.grid_n = checked_int(r, "grid_n", c.grid_n, 2);
  c.snapshot_every = checked_int(r, "snapshot_every", c.snapshot_every, 1);
  r.finish();
  if (!(c.meta_lr > 0)) throw ConfigError(r.field("meta_lr"), "meta_lr must be > 0");
  if (!(c.blowup_threshold > 0)) {
    throw ConfigError(r.field("blowup_threshold"), "blowup_threshold must be > 0");
  }
  if (!(c.shrink_factor > 0 && c.shrink_factor < 1)) {
    throw ConfigError(r.field("shrink_factor"), "shrink_factor must lie in (0,1)");
  }
  return c;
}

OptimizerConfig optimizer_from_json(const nlohmann::json& j, const std::string& path) {
  ObjectReader r(j, path);
  OptimizerConfig c;
  c.beta1 = r.number("beta1", c.beta1);
  c.beta2 = r.number("beta2", c.beta2);
  c.weight_decay = r.number("weight_decay", c.weight_decay);
  c.epsilon = r.number("epsilon", c.epsilon);
  r.finish();
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(r.field(e.field()), e.what());
  }
  return c;
}

ToyWorkloadSpec toy_spec_from_json(ObjectReader& r) {
  ToyWorkloadSpec s;
  s.input_dim = checked_int(r, "input_dim", s.input_dim, 1);
  s.classes = checked_int(r, "classes", s.classes, 2);
  s.samples = checked_int(r, "samples", s.samples, 1);
  if (r.has("hidden")) {
    const auto widths = r.numbers("hidden");
    s.hidden.clear();
    for (double w : widths) {
      if (w < 1 || w != static_cast<int>(w)) {
        throw ConfigError(r.field("hidden"), "hidden widths must be positive integers");
      }
      s.hidden.push_back(static_cast<int>(w));
    }
  }
  s.batch = checked_int(r, "batch", s.batch, 1);
  s.horizon = checked_int(r, "horizon", s.horizon, 1);
  s.center_scale = r.number("center_scale", s.center_scale);
  s.center_seed = r.unsigned_integer("center_seed", s.center_seed);
  s.data_seed = r.unsigned_integer("data_seed", s.data_seed);
  s.eval_every = checked_int(r, "eval_every", s.eval_every, 1);
  s.eval_samples = checked_int(r, "eval_samples", s.eval_samples, 0);
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(r.field(e.field()), e.what());
  }
  return s;
}

std::unique_ptr<Workload> workload_from_json(const nlohmann::json& j, const std::string& path) {
  ObjectReader r(j, path);
  const auto type = r.string("type");
  if (type == "linreg-theory" || type == "linreg-empirical") {
    nlohmann::json problem = nlohmann::json::object();
    for (const char* key : {"dim", "batch", "horizon", "init"}) {
      if (auto v = r.optional_raw(key)) problem[key] = *v;
    }
    std::uint64_t rotation = 0;
    if (type == "linreg-empirical") rotation = r.unsigned_integer("rotation_seed", 0);
    r.finish();
    auto p = problem_from_json(problem, path);
    if (type == "linreg-theory") return std::make_unique<LinRegTheoryWorkload>(std::move(p));
    return std::make_unique<LinRegEmpiricalWorkload>(std::move(p), rotation);
  }
  if (type == "toy") {
    auto spec = toy_spec_from_json(r);
    OptimizerConfig opt;
    if (auto o = r.optional_raw("optimizer")) opt = optimizer_from_json(*o, join(path, "optimizer"));
    const auto objective = r.string("objective", "loss");
    if (objective != "loss" && objective != "error") {
      throw ConfigError(r.field("objective"), "objective must be \"loss\" or \"error\"");
    }
    r.finish();
    return std::make_unique<ToyTrainingWorkload>(
        std::move(spec), opt, objective == "loss" ? ToyObjective::kLoss : ToyObjective::kError);
  }
  throw ConfigError(r.field("type"), "unknown workload type '" + type + "'");
}

Family family_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "'" + path + "' must be a family name");
  try {
    return family_from_name(j.get<std::string>());
  } catch (const ValidationError& e) {
    throw ConfigError(path, e.what());
  }
}

SearchConfig search_from_json(const nlohmann::json& j, const std::string& path) {
  ObjectReader r(j, path);
  SearchConfig c;
  if (auto f = r.optional_raw("family")) c.family = family_from_json(*f, r.field("family"));
  c.n_shapes = checked_int(r, "n_shapes", c.n_shapes, 1);
  c.lr_lo = r.number("lr_lo", c.lr_lo);
  c.lr_hi = r.number("lr_hi", c.lr_hi);
  c.lr_n = checked_int(r, "lr_n", c.lr_n, 2);
  c.k_search = checked_int(r, "k_search", c.k_search, 1);
  c.top_k = checked_int(r, "top_k", c.top_k, 1);
  c.eval_init = checked_int(r, "eval_init", c.eval_init, 1);
  c.eval_order = checked_int(r, "eval_order", c.eval_order, 1);
  c.delta = r.number("delta", c.delta);
  c.keep_runs = r.boolean("keep_runs", c.keep_runs);
  c.keep_trajectories = r.boolean("keep_trajectories", c.keep_trajectories);
  r.finish();
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(r.field(e.field()), e.what());
  }
  if (c.top_k > c.n_shapes) throw ConfigError(r.field("top_k"), "top_k must not exceed n_shapes");
  return c;
}

}  // namespace lrs
