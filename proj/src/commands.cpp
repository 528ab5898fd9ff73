// SPDX-License-Identifier: Apache-2.0
#include "lrslab/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <vector>

#include "lrslab/config.hpp"
#include "lrslab/errors.hpp"
#include "lrslab/fit.hpp"
#include "lrslab/harness.hpp"
#include "lrslab/linreg.hpp"
#include "lrslab/parallel.hpp"
#include "lrslab/persist.hpp"
#include "lrslab/rng.hpp"
#include "lrslab/stats.hpp"

#ifndef LRSLAB_VERSION_STRING
#define LRSLAB_VERSION_STRING "unknown"
#endif

namespace lrs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<std::string_view, 11> kCommands = {
    "search", "evaluate", "linesearch", "ecdf", "xcond", "sched-descent",
    "theory", "simulate", "noise", "fit-family", "grid"};

struct Context {
  std::uint64_t seed = 0;
  int threads = 0;
};

// Ordered file name -> content; written in this order, manifest last.
struct Artifacts {
  std::map<std::string, std::string> files;
  std::vector<std::string> warnings;
  json extra = json::object();
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

std::string params_cell(const ShapeParams& shape) { return shape_to_json(shape)["params"].dump(); }

std::vector<std::string> band_cells(const std::optional<DkwBand>& band) {
  if (!band) return {"", "", ""};
  return {fmt(band->lower), fmt(band->upper), fmt(band->half_width())};
}

template <typename T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string search_csv(const SearchReport& report) {
  CsvTable t({"rank", "index", "family", "best_lr_index", "best_lr", "search_median",
              "edge_lr", "unstable", "params"});
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    t.row({std::to_string(i + 1), std::to_string(e.index),
           std::string(family_name(report.family)), std::to_string(e.best_lr_index),
           fmt(e.best_lr), fmt(e.search_median), fmt(e.edge_lr), fmt(e.unstable),
           params_cell(e.shape)});
  }
  return t.str();
}

std::string eval_csv(const SearchReport& report) {
  CsvTable t({"rank", "index", "family", "best_lr", "search_median", "eval_median",
              "dkw_lower", "dkw_upper", "dkw_half_width", "right_unbounded", "n_seeds",
              "params"});
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    t.row(concat<std::string>(
        {std::to_string(i + 1), std::to_string(e.index), std::string(family_name(report.family)),
         fmt(e.best_lr), fmt(e.search_median), fmt(e.eval_median.value_or(NAN))},
        concat<std::string>(band_cells(e.band),
                            {fmt(e.band && e.band->right_unbounded),
                             std::to_string(e.eval_scores.size()), params_cell(e.shape)})));
  }
  return t.str();
}

std::string histogram_csv(const SearchReport& report, const SearchConfig& config) {
  const auto lrs = config.lr_grid();
  const auto h = report.best_lr_histogram(config.lr_n);
  CsvTable t({"lr_index", "lr", "count"});
  for (std::size_t i = 0; i < h.size(); ++i) {
    t.row({std::to_string(i), fmt(lrs[i]), std::to_string(h[i])});
  }
  return t.str();
}

void ecdf_rows(CsvTable& t, const std::string& label, std::span<const double> scores) {
  for (const auto& [s, p] : ecdf(scores)) t.row({label, fmt(s), fmt(p)});
}

Condition read_condition(ObjectReader& r) {
  if (auto c = r.optional_raw("condition")) return Condition::from_json(*c);
  return {};
}

struct SearchInputs {
  std::unique_ptr<Workload> workload;
  SearchConfig search;
  Condition condition;
};

SearchInputs read_search_inputs(ObjectReader& r, const Context& ctx) {
  SearchInputs in;
  in.workload = workload_from_json(r.raw("workload"), "workload");
  in.search = search_from_json(r.optional_raw("search").value_or(json::object()), "search");
  in.search.master_seed = ctx.seed;
  in.search.threads = ctx.threads;
  in.condition = read_condition(r);
  return in;
}

void add_runs(Artifacts& a, std::vector<RunRecord> runs) {
  if (runs.empty()) return;
  std::sort(runs.begin(), runs.end(),
            [](const RunRecord& x, const RunRecord& y) { return x.run_id < y.run_id; });
  a.files["runs.jsonl"] += to_jsonl(runs);
}

Artifacts cmd_search(ObjectReader& r, const Context& ctx, bool evaluate) {
  auto in = read_search_inputs(r, ctx);
  const int resolution = static_cast<int>(r.integer("resolution", 101));
  r.finish();
  Artifacts a;
  auto report = search_step(in.search, *in.workload, in.condition);
  a.files["search_summary.csv"] = search_csv(report);
  a.files["lr_histogram.csv"] = histogram_csv(report, in.search);
  CsvTable e({"family", "score", "probability"});
  ecdf_rows(e, std::string(family_name(in.search.family)), report.best_scores());
  a.files["search_ecdf.csv"] = e.str();
  a.warnings = report.warnings;
  auto runs = std::move(report.runs);
  if (evaluate) {
    auto evaluated = evaluation_step(report, in.search, *in.workload, in.condition);
    a.files["eval_summary.csv"] = eval_csv(evaluated);
    const auto& best = evaluated.entries.front();
    const ScheduleSpec spec(best.shape, best.best_lr, in.workload->horizon_for(in.condition));
    a.files["best_schedule.json"] = schedule_to_json(spec).dump(2) + "\n";
    a.files["best_schedule.csv"] = export_schedule(spec, resolution);
    runs = concat(std::move(runs), evaluated.runs);
  } else {
    const auto& best = report.entries.front();
    const ScheduleSpec spec(best.shape, best.best_lr, in.workload->horizon_for(in.condition));
    a.files["best_schedule.json"] = schedule_to_json(spec).dump(2) + "\n";
  }
  add_runs(a, std::move(runs));
  return a;
}

Artifacts cmd_linesearch(ObjectReader& r, const Context& ctx) {
  auto in = read_search_inputs(r, ctx);
  ShapeParams shape = [&] {
    try {
      return shape_from_json(r.raw("shape"));
    } catch (const ValidationError& e) {
      throw ConfigError("shape." + e.field(), e.what());
    }
  }();
  LinesearchRequest req;
  if (auto ls = r.optional_raw("linesearch")) {
    ObjectReader lr(*ls, "linesearch");
    if (auto p = lr.optional_raw("params")) {
      if (!p->is_array()) throw ConfigError("linesearch.params", "params must be an array");
      for (const auto& name : *p) {
        if (!name.is_string()) throw ConfigError("linesearch.params", "params must be names");
        req.params.push_back(name.get<std::string>());
      }
    }
    if (auto v = lr.optional_raw("values")) {
      ObjectReader vr(*v, "linesearch.values");
      for (const auto& [name, _] : v->items()) req.values[name] = vr.numbers(name);
      vr.finish();
    }
    req.points = static_cast<int>(lr.integer("points", 9));
    lr.finish();
  }
  r.finish();
  Artifacts a;
  std::vector<LinesearchRow> rows;
  try {
    rows = coordinate_linesearch(shape, in.search, *in.workload, req, in.condition);
  } catch (const ValidationError& e) {
    throw ConfigError("linesearch." + e.field(), e.what());
  }
  CsvTable t({"param", "value", "original", "best_lr", "median", "dkw_lower", "dkw_upper",
              "dkw_half_width"});
  for (const auto& row : rows) {
    t.row(concat<std::string>({row.param, fmt(row.value), fmt(row.original), fmt(row.best_lr),
                               fmt(row.median)},
                              band_cells(row.band)));
  }
  a.files["linesearch.csv"] = t.str();
  return a;
}

std::vector<Family> read_families(ObjectReader& r, const std::string& key,
                                  std::span<const Family> fallback) {
  auto v = r.optional_raw(key);
  if (!v) return {fallback.begin(), fallback.end()};
  if (!v->is_array() || v->empty()) {
    throw ConfigError(r.field(key), "'" + r.field(key) + "' must be a non-empty array");
  }
  std::vector<Family> out;
  for (const auto& f : *v) out.push_back(family_from_json(f, r.field(key)));
  return out;
}

Artifacts cmd_ecdf(ObjectReader& r, const Context& ctx) {
  auto in = read_search_inputs(r, ctx);
  const auto families = read_families(r, "families", core_families());
  r.finish();
  Artifacts a;
  CsvTable e({"family", "score", "probability"});
  CsvTable best({"family", "best_score", "best_lr", "edge_lr", "params"});
  for (Family f : families) {
    auto cfg = in.search;
    cfg.family = f;
    const auto report = search_step(cfg, *in.workload, in.condition);
    ecdf_rows(e, std::string(family_name(f)), report.best_scores());
    const auto& top = report.entries.front();
    best.row({std::string(family_name(f)), fmt(top.search_median), fmt(top.best_lr),
              fmt(top.edge_lr), params_cell(top.shape)});
    for (const auto& w : report.warnings) {
      a.warnings.push_back(std::string(family_name(f)) + ": " + w);
    }
  }
  a.files["ecdf.csv"] = e.str();
  a.files["family_best.csv"] = best.str();
  return a;
}

std::vector<Condition> sweep_conditions(const json& j) {
  ObjectReader r(j, "sweep");
  const auto param = r.string("param");
  std::vector<double> values;
  if (r.has("values")) {
    values = r.numbers("values");
  } else if (param == "beta1") {
    values = {0.8, 0.9, 0.95, 0.975};
  } else if (param == "beta2") {
    values = {0.9, 0.99, 0.999, 0.9995};
  } else if (param == "weight_decay") {
    values = {0.0, 0.001, 0.01, 0.1};
  } else {
    throw ConfigError("sweep.values", "sweep over '" + param + "' needs explicit values");
  }
  r.finish();
  std::vector<Condition> out;
  for (double v : values) {
    json c{{"label", param + "=" + fmt(v)}};
    if (param == "horizon") {
      if (v != std::floor(v) || v < 1) throw ConfigError("sweep.values", "horizons must be integers");
      c[param] = static_cast<int>(v);
    } else if (param == "beta1" || param == "beta2" || param == "weight_decay") {
      c[param] = v;
    } else {
      throw ConfigError("sweep.param", "unknown sweep parameter '" + param + "'");
    }
    out.push_back(Condition::from_json(c));
  }
  return out;
}

Artifacts cmd_xcond(ObjectReader& r, const Context& ctx) {
  auto in = read_search_inputs(r, ctx);
  std::vector<Condition> conditions;
  if (auto c = r.optional_raw("conditions")) {
    if (!c->is_array()) throw ConfigError("conditions", "conditions must be an array");
    for (const auto& x : *c) conditions.push_back(Condition::from_json(x));
  }
  if (auto s = r.optional_raw("sweep")) {
    if (!conditions.empty()) throw ConfigError("sweep", "give either conditions or sweep");
    conditions = sweep_conditions(*s);
  }
  r.finish();
  if (conditions.size() < 2) throw ConfigError("conditions", "need at least two conditions");
  Artifacts a;
  CrossConditionResult res;
  try {
    res = cross_condition_matrix(conditions, in.search, *in.workload);
  } catch (const ValidationError& e) {
    throw ConfigError("conditions", e.what());
  }
  CsvTable m({"selection", "evaluation", "median", "dkw_lower", "dkw_upper", "dkw_half_width"});
  for (const auto& cell : res.cells) {
    m.row(concat<std::string>({cell.selection, cell.evaluation, fmt(cell.median)},
                              band_cells(cell.band)));
  }
  CsvTable s({"condition", "best_lr", "eval_median", "edge_lr", "params"});
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const auto& e = res.selected[i];
    s.row({conditions[i].label, fmt(e.best_lr), fmt(e.eval_median.value_or(NAN)),
           fmt(e.edge_lr), params_cell(e.shape)});
  }
  a.files["xcond_matrix.csv"] = m.str();
  a.files["xcond_selected.csv"] = s.str();
  return a;
}

LinRegProblem read_problem(ObjectReader& r) {
  return problem_from_json(r.optional_raw("problem").value_or(json::object()), "problem");
}

std::string trajectory_csv(std::span<const double> lrs, std::span<const double> losses) {
  CsvTable t({"step", "lr", "loss"});
  for (std::size_t i = 0; i < losses.size(); ++i) {
    t.row({std::to_string(i), i < lrs.size() ? fmt(lrs[i]) : "", fmt(losses[i])});
  }
  return t.str();
}

// Absolute per-step LRs from "lrs", "constant" or "schedule".
std::vector<double> read_lrs(ObjectReader& r, const LinRegProblem& problem) {
  const int given = r.has("lrs") + r.has("constant") + r.has("schedule");
  if (given != 1) {
    throw ConfigError("schedule", "give exactly one of lrs, constant or schedule");
  }
  std::vector<double> lrs;
  if (r.has("lrs")) {
    lrs = r.numbers("lrs");
    if (static_cast<int>(lrs.size()) != problem.horizon) {
      throw ConfigError("lrs", "lrs must have one entry per step of the horizon");
    }
  } else if (r.has("constant")) {
    lrs.assign(static_cast<std::size_t>(problem.horizon), r.number("constant"));
  } else {
    json s = r.raw("schedule");
    if (!s.is_object()) throw ConfigError("schedule", "schedule must be an object");
    if (s.contains("horizon") && s["horizon"] != problem.horizon) {
      throw ConfigError("schedule.horizon", "schedule horizon must equal problem.horizon");
    }
    s["horizon"] = problem.horizon;
    try {
      lrs = schedule_from_json(s).lrs();
    } catch (const ValidationError& e) {
      throw ConfigError("schedule." + e.field(), e.what());
    }
  }
  for (double v : lrs) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("lrs", "learning rates must be finite and >= 0");
    }
  }
  return lrs;
}

Artifacts cmd_theory(ObjectReader& r, const Context&) {
  const auto problem = read_problem(r);
  const auto lrs = read_lrs(r, problem);
  r.finish();
  const auto res = solve_theory(problem, lrs);
  if (res.diverged) {
    throw DivergenceError("theory recurrence diverged at step " +
                          std::to_string(res.losses.size() - 1));
  }
  Artifacts a;
  a.files["theory.csv"] = trajectory_csv(lrs, res.losses);
  a.extra["final_loss"] = res.final_loss();
  return a;
}

Artifacts cmd_simulate(ObjectReader& r, const Context& ctx) {
  const auto problem = read_problem(r);
  const auto lrs = read_lrs(r, problem);
  const int seeds = static_cast<int>(r.integer("seeds", 100));
  r.finish();
  if (seeds < 1) throw ConfigError("seeds", "seeds must be >= 1");
  const auto n = static_cast<std::size_t>(seeds);
  std::vector<EmpiricalResult> runs(n);
  parallel_for(n, ctx.threads, [&](std::size_t k) {
    runs[k] = simulate_empirical(problem, lrs, derive_seed(ctx.seed, Stream::kSimulate, k));
  });
  const auto theory = solve_theory(problem, lrs);
  const auto steps = static_cast<std::size_t>(problem.horizon) + 1;
  CsvTable t({"step", "lr", "empirical_mean", "n_finite", "theory"});
  for (std::size_t s = 0; s < steps; ++s) {
    double sum = 0.0;
    int count = 0;
    for (const auto& run : runs) {
      if (s < run.losses.size() && std::isfinite(run.losses[s])) {
        sum += run.losses[s];
        ++count;
      }
    }
    t.row({std::to_string(s), s < lrs.size() ? fmt(lrs[s]) : "",
           count ? fmt(sum / count) : "nan", std::to_string(count),
           s < theory.losses.size() ? fmt(theory.losses[s]) : "inf"});
  }
  CsvTable f({"seed_index", "final_loss", "diverged"});
  int diverged = 0;
  for (std::size_t k = 0; k < n; ++k) {
    diverged += runs[k].diverged;
    f.row({std::to_string(k), runs[k].diverged ? "inf" : fmt(runs[k].losses.back()),
           fmt(runs[k].diverged)});
  }
  Artifacts a;
  a.files["simulate.csv"] = t.str();
  a.files["simulate_final.csv"] = f.str();
  if (diverged) a.warnings.push_back(std::to_string(diverged) + " seeds diverged");
  if (theory.diverged) a.warnings.push_back("theory recurrence diverged");
  return a;
}

std::vector<Family> fit_families(ObjectReader& r) {
  static const std::array<Family, 1> kDefault = {Family::kSmoothNonMonotonic};
  return read_families(r, "fit_families", kDefault);
}

FitOptions read_fit_options(ObjectReader& r, const Context& ctx) {
  FitOptions o;
  if (auto f = r.optional_raw("fit")) {
    ObjectReader fr(*f, "fit");
    o.random_samples = static_cast<int>(fr.integer("random_samples", o.random_samples));
    o.restarts = static_cast<int>(fr.integer("restarts", o.restarts));
    o.max_sweeps = static_cast<int>(fr.integer("max_sweeps", o.max_sweeps));
    fr.finish();
    if (o.random_samples < 1) throw ConfigError("fit.random_samples", "must be >= 1");
    if (o.restarts < 1) throw ConfigError("fit.restarts", "must be >= 1");
    if (o.max_sweeps < 0) throw ConfigError("fit.max_sweeps", "must be >= 0");
  }
  o.seed = ctx.seed;
  return o;
}

void write_fits(Artifacts& a, std::span<const Family> families, std::span<const double> lrs,
                const FitOptions& options, const LinRegProblem* problem) {
  const double peak = *std::max_element(lrs.begin(), lrs.end());
  if (!(peak > 0.0)) throw ConfigError("target", "target schedule must have a positive entry");
  std::vector<double> target(lrs.size());
  for (std::size_t i = 0; i < lrs.size(); ++i) target[i] = lrs[i] / peak;
  std::vector<std::string> header = {"family", "mse", "random_mse", "converged", "base_lr"};
  if (problem) header.push_back("theory_loss");
  header.push_back("params");
  CsvTable t(header);
  for (Family f : families) {
    const auto fit = fit_family_to_target(f, target, options);
    std::vector<std::string> row = {std::string(family_name(f)), fmt(fit.mse),
                                    fmt(fit.random_mse), fmt(fit.converged), fmt(peak)};
    const ScheduleSpec spec(fit.shape, peak, static_cast<int>(lrs.size()));
    if (problem) row.push_back(fmt(solve_theory(*problem, spec.lrs()).final_loss()));
    row.push_back(params_cell(fit.shape));
    t.row(row);
    a.files["fit_" + std::string(family_name(f)) + ".json"] =
        schedule_to_json(spec).dump(2) + "\n";
  }
  a.files["fit.csv"] = t.str();
}

Artifacts cmd_descent(ObjectReader& r, const Context& ctx) {
  const auto problem = read_problem(r);
  const auto cfg = descent_from_json(r.optional_raw("descent").value_or(json::object()),
                                     "descent");
  const bool fit = r.has("fit_families");
  const auto families = fit_families(r);
  const auto options = read_fit_options(r, ctx);
  r.finish();
  const auto res = schedule_descent(problem, cfg);
  const double peak = *std::max_element(res.lrs.begin(), res.lrs.end());
  Artifacts a;
  CsvTable s({"step", "lr", "multiplier"});
  for (std::size_t t = 0; t < res.lrs.size(); ++t) {
    s.row({std::to_string(t), fmt(res.lrs[t]), fmt(peak > 0 ? res.lrs[t] / peak : 0.0)});
  }
  a.files["descent_schedule.csv"] = s.str();
  CsvTable tr({"meta_step", "loss", "shrunk"});
  for (const auto& st : res.trace) tr.row({std::to_string(st.step), fmt(st.loss), fmt(st.shrunk)});
  a.files["descent_trace.csv"] = tr.str();
  CsvTable sn({"meta_step", "step", "lr"});
  for (const auto& snap : res.snapshots) {
    for (std::size_t t = 0; t < snap.lrs.size(); ++t) {
      sn.row({std::to_string(snap.step), std::to_string(t), fmt(snap.lrs[t])});
    }
  }
  a.files["descent_snapshots.csv"] = sn.str();
  a.files["descent_losses.csv"] = trajectory_csv(res.lrs, solve_theory(problem, res.lrs).losses);
  a.extra["initial_lr"] = res.initial_lr;
  a.extra["initial_loss"] = res.initial_loss;
  a.extra["final_loss"] = res.final_loss;
  if (fit) write_fits(a, families, res.lrs, options, &problem);
  return a;
}

Artifacts cmd_fit(ObjectReader& r, const Context& ctx) {
  const auto families = fit_families(r);
  const auto options = read_fit_options(r, ctx);
  Artifacts a;
  if (r.has("target")) {
    const auto target = r.numbers("target");
    if (target.empty()) throw ConfigError("target", "target must be non-empty");
    r.finish();
    for (double v : target) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("target", "entries must be >= 0");
    }
    write_fits(a, families, target, options, nullptr);
    return a;
  }
  const auto problem = read_problem(r);
  const auto cfg = descent_from_json(r.optional_raw("descent").value_or(json::object()),
                                     "descent");
  r.finish();
  const auto res = schedule_descent(problem, cfg);
  a.extra["descent_final_loss"] = res.final_loss;
  write_fits(a, families, res.lrs, options, &problem);
  return a;
}

Artifacts cmd_noise(ObjectReader& r, const Context& ctx) {
  auto in = read_search_inputs(r, ctx);
  NoiseConfig noise;
  int n_shapes = 1000;
  double base_lr = 0.0;
  {
    ObjectReader nr(r.raw("noise"), "noise");
    n_shapes = static_cast<int>(nr.integer("n_shapes", n_shapes));
    base_lr = nr.number("base_lr");
    noise.seeds = static_cast<int>(nr.integer("seeds", noise.seeds));
    noise.top_k = static_cast<int>(nr.integer("top_k", noise.top_k));
    if (nr.has("subset_sizes")) {
      noise.subset_sizes.clear();
      for (double v : nr.numbers("subset_sizes")) noise.subset_sizes.push_back(static_cast<int>(v));
    }
    nr.finish();
    if (n_shapes < 1) throw ConfigError("noise.n_shapes", "n_shapes must be >= 1");
    if (!(base_lr > 0)) throw ConfigError("noise.base_lr", "base_lr must be > 0");
    if (noise.seeds < 1) throw ConfigError("noise.seeds", "seeds must be >= 1");
    for (int s : noise.subset_sizes) {
      if (s < 1 || s > noise.seeds) {
        throw ConfigError("noise.subset_sizes", "subset sizes must lie in [1, seeds]");
      }
    }
  }
  r.finish();
  std::vector<ShapeParams> shapes;
  for (int i = 0; i < n_shapes; ++i) shapes.push_back(search_shape(in.search.family, ctx.seed, i));
  const std::vector<double> lrs(shapes.size(), base_lr);
  const auto res = noise_characterization(shapes, lrs, in.search, noise, *in.workload, in.condition);
  Artifacts a;
  CsvTable rates({"subset_size", "false_negative_rate"});
  for (std::size_t s = 0; s < res.subset_sizes.size(); ++s) {
    rates.row({std::to_string(res.subset_sizes[s]), fmt(res.false_negative_rates[s])});
  }
  std::vector<std::string> header = {"index", "reference_median"};
  for (int s : res.subset_sizes) header.push_back("median_" + std::to_string(s));
  CsvTable scatter(header);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    std::vector<std::string> row = {std::to_string(i), fmt(res.reference_medians[i])};
    for (const auto& m : res.subset_medians) row.push_back(fmt(m[i]));
    scatter.row(row);
  }
  a.files["noise_rates.csv"] = rates.str();
  a.files["noise_scatter.csv"] = scatter.str();
  return a;
}

Artifacts cmd_grid(ObjectReader& r, const Context&) {
  const double lo = r.number("lo", 1e-4);
  const double hi = r.number("hi", 1e-1);
  const auto n = r.integer("n", 16);
  r.finish();
  std::vector<double> grid;
  try {
    grid = base_lr_grid(lo, hi, static_cast<int>(n));
  } catch (const ValidationError& e) {
    throw ConfigError(e.field(), e.what());
  }
  CsvTable t({"index", "lr"});
  for (std::size_t i = 0; i < grid.size(); ++i) t.row({std::to_string(i), fmt(grid[i])});
  Artifacts a;
  a.files["grid.csv"] = t.str();
  return a;
}

Artifacts dispatch(const std::string& command, ObjectReader& r, const Context& ctx) {
  if (command == "search") return cmd_search(r, ctx, false);
  if (command == "evaluate") return cmd_search(r, ctx, true);
  if (command == "linesearch") return cmd_linesearch(r, ctx);
  if (command == "ecdf") return cmd_ecdf(r, ctx);
  if (command == "xcond") return cmd_xcond(r, ctx);
  if (command == "sched-descent") return cmd_descent(r, ctx);
  if (command == "theory") return cmd_theory(r, ctx);
  if (command == "simulate") return cmd_simulate(r, ctx);
  if (command == "noise") return cmd_noise(r, ctx);
  if (command == "fit-family") return cmd_fit(r, ctx);
  if (command == "grid") return cmd_grid(r, ctx);
  throw ConfigError("command", "unknown command '" + command + "'");
}

}  // namespace

std::span<const std::string_view> command_names() noexcept { return kCommands; }

int run_command(const CommandOptions& options, std::ostream& err) {
  try {
    if (std::find(kCommands.begin(), kCommands.end(), options.command) == kCommands.end()) {
      throw ConfigError("command", "unknown command '" + options.command + "'");
    }
    if (options.out.empty()) throw ConfigError("out", "an output directory is required");
    if (options.threads < 0) throw ConfigError("threads", "threads must be >= 0");
    const json config = load_config(options.config);
    ObjectReader r(config, "");
    Context ctx;
    ctx.seed = r.unsigned_integer("seed", 0);
    if (options.seed) ctx.seed = *options.seed;
    ctx.threads = options.threads;

    // Parse and run before touching the output directory so a bad config
    // leaves no trace; the collision check comes first to fail fast.
    if (fs::exists(options.out) && fs::is_directory(options.out) &&
        !fs::is_empty(options.out) && !options.force) {
      prepare_output_dir(options.out, false);
    }
    const std::string started = utc_timestamp();
    Artifacts artifacts = dispatch(options.command, r, ctx);

    prepare_output_dir(options.out, options.force);
    json files = json::array();
    for (const auto& [name, content] : artifacts.files) {
      write_file_atomic(options.out / name, content);
      files.push_back(name);
    }
    json manifest{{"command", options.command},
                  {"config_hash", hex64(fnv1a64(config.dump()))},
                  {"code_version", LRSLAB_VERSION_STRING},
                  {"master_seed", ctx.seed},
                  {"started_at", started},
                  {"finished_at", utc_timestamp()},
                  {"files", files},
                  {"warnings", artifacts.warnings},
                  {"results", artifacts.extra}};
    write_file_atomic(options.out / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& w : artifacts.warnings) err << "warning: " << w << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error [" << e.field() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "config error [" << e.field() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace lrs
