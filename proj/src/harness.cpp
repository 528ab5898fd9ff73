// SPDX-License-Identifier: Apache-2.0
#include "lrslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "lrslab/errors.hpp"
#include "lrslab/parallel.hpp"
#include "lrslab/rng.hpp"

namespace lrs {
namespace {

std::string run_id(const char* stage, Family family, int shape, int lr, int seed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s/%s/s%06d/l%02d/k%04d", stage,
                std::string(family_name(family)).c_str(), shape, lr, seed);
  return buf;
}

// Per-seed scores; deterministic workloads are run once and replicated.
std::vector<RunOutcome> run_seeds(const ScheduleSpec& schedule, const Workload& workload,
                                  std::span<const RunSeed> seeds,
                                  const Condition& condition, bool keep_trajectory) {
  std::vector<RunOutcome> out;
  out.reserve(seeds.size());
  if (workload.deterministic() && !seeds.empty()) {
    auto r = workload.run(schedule, seeds[0], condition, keep_trajectory);
    out.assign(seeds.size(), r);
    return out;
  }
  for (const auto& s : seeds) out.push_back(workload.run(schedule, s, condition, keep_trajectory));
  return out;
}

std::vector<double> scores_of(const std::vector<RunOutcome>& outcomes) {
  std::vector<double> s;
  s.reserve(outcomes.size());
  for (const auto& o : outcomes) s.push_back(o.score);
  return s;
}

std::optional<DkwBand> band_if_possible(std::span<const double> scores, double delta) {
  if (scores.size() < 2) return std::nullopt;
  return dkw_median_band(scores, delta);
}

// Indices of the k smallest values, ties broken by index.
std::vector<std::size_t> top_indices(std::span<const double> values, int k) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(std::max(k, 0))));
  return idx;
}

std::vector<RunSeed> seed_list(std::uint64_t master, Stream init, Stream order, int n) {
  std::vector<RunSeed> seeds;
  for (int k = 0; k < n; ++k) {
    const auto u = static_cast<std::uint64_t>(k);
    seeds.push_back({derive_seed(master, init, u), derive_seed(master, order, u)});
  }
  return seeds;
}

}  // namespace

void SearchConfig::validate() const {
  if (n_shapes < 1) throw ValidationError("n_shapes", "n_shapes must be >= 1");
  if (lr_n < 1) throw ValidationError("lr_n", "lr grid needs >= 1 point");
  base_lr_grid(lr_lo, lr_hi, lr_n);
  if (k_search < 1) throw ValidationError("k_search", "k_search must be >= 1");
  if (top_k < 1) throw ValidationError("top_k", "top_k must be >= 1");
  if (eval_init < 1) throw ValidationError("eval_init", "eval_init must be >= 1");
  if (eval_order < 1) throw ValidationError("eval_order", "eval_order must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta", "delta must lie in (0,1)");
  if (threads < 0) throw ValidationError("threads", "threads must be >= 0");
}

std::vector<double> SearchConfig::lr_grid() const { return base_lr_grid(lr_lo, lr_hi, lr_n); }

std::vector<RunSeed> SearchConfig::search_seeds() const {
  return seed_list(master_seed, Stream::kSearchInit, Stream::kSearchOrder, k_search);
}

std::vector<RunSeed> SearchConfig::eval_seeds() const {
  std::vector<RunSeed> seeds;
  for (int i = 0; i < eval_init; ++i) {
    for (int j = 0; j < eval_order; ++j) {
      seeds.push_back({derive_seed(master_seed, Stream::kEvalInit, static_cast<std::uint64_t>(i)),
                       derive_seed(master_seed, Stream::kEvalOrder, static_cast<std::uint64_t>(j))});
    }
  }
  return seeds;
}

std::vector<double> SearchReport::best_scores() const {
  std::vector<double> s;
  s.reserve(entries.size());
  for (const auto& e : entries) s.push_back(e.eval_median.value_or(e.search_median));
  return s;
}

std::vector<int> SearchReport::best_lr_histogram(int lr_n) const {
  std::vector<int> h(static_cast<std::size_t>(lr_n), 0);
  for (const auto& e : entries) {
    if (e.best_lr_index >= 0 && e.best_lr_index < lr_n) ++h[static_cast<std::size_t>(e.best_lr_index)];
  }
  return h;
}

double score(const ShapeParams& shape, double base_lr, const Workload& workload,
             std::span<const RunSeed> seeds, const Condition& condition) {
  if (seeds.empty()) throw ValidationError("seeds", "score needs at least one seed");
  const ScheduleSpec schedule(shape, base_lr, workload.horizon_for(condition));
  return median(scores_of(run_seeds(schedule, workload, seeds, condition, false)));
}

ShapeParams search_shape(Family family, std::uint64_t master_seed, int index) {
  const auto stream = (static_cast<std::uint64_t>(family) << 32) |
                      static_cast<std::uint64_t>(static_cast<std::uint32_t>(index));
  return sample_shape(SearchSpace::standard(), family,
                      derive_seed(master_seed, Stream::kShapeSample, stream));
}

SearchReport search_step(const SearchConfig& config, const Workload& workload,
                         const Condition& condition) {
  config.validate();
  const auto lrs = config.lr_grid();
  const auto seeds = config.search_seeds();
  const int horizon = workload.horizon_for(condition);
  const auto n = static_cast<std::size_t>(config.n_shapes);
  const auto m = static_cast<std::size_t>(config.lr_n);

  std::vector<ShapeParams> shapes;
  shapes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    shapes.push_back(search_shape(config.family, config.master_seed, static_cast<int>(i)));
  }

  std::vector<double> medians(n * m);
  std::vector<std::vector<RunOutcome>> outcomes(config.keep_runs ? n * m : 0);
  parallel_for(n * m, config.threads, [&](std::size_t u) {
    const ScheduleSpec schedule(shapes[u / m], lrs[u % m], horizon);
    auto r = run_seeds(schedule, workload, seeds, condition, config.keep_trajectories);
    medians[u] = median(scores_of(r));
    if (config.keep_runs) outcomes[u] = std::move(r);
  });

  SearchReport report{config.family, {}, {}, {}};
  report.entries.reserve(n);
  int edge_hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(medians.begin() + static_cast<std::ptrdiff_t>(i * m),
                            medians.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    const auto best = static_cast<int>(std::min_element(row.begin(), row.end()) - row.begin());
    const double best_score = row[static_cast<std::size_t>(best)];
    const bool edge = m > 1 && (best == 0 || best == static_cast<int>(m) - 1);
    edge_hits += edge ? 1 : 0;
    report.entries.push_back(ShapeEntry{static_cast<int>(i), shapes[i], best,
                                        lrs[static_cast<std::size_t>(best)], best_score,
                                        std::move(row), edge, std::isinf(best_score),
                                        std::nullopt, std::nullopt, {}});
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ShapeEntry& a, const ShapeEntry& b) {
                     return a.search_median < b.search_median;
                   });
  if (edge_hits > 0) {
    report.warnings.push_back(std::to_string(edge_hits) + " of " + std::to_string(n) +
                              " shapes have their best base LR on a grid endpoint");
  }
  if (report.entries.front().edge_lr) {
    report.warnings.push_back("best shape's base LR lies on a grid endpoint");
  }

  if (config.keep_runs) {
    report.runs.reserve(n * m * seeds.size());
    for (std::size_t u = 0; u < n * m; ++u) {
      const ScheduleSpec schedule(shapes[u / m], lrs[u % m], horizon);
      const auto sched_json = schedule_to_json(schedule);
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const auto& o = outcomes[u][k];
        report.runs.push_back({run_id("search", config.family, static_cast<int>(u / m),
                                      static_cast<int>(u % m), static_cast<int>(k)),
                               sched_json, seeds[k], condition.label, o.score, o.diverged,
                               o.trajectory});
      }
    }
  }
  return report;
}

SearchReport evaluation_step(const SearchReport& report, const SearchConfig& config,
                             const Workload& workload, const Condition& condition) {
  config.validate();
  if (report.entries.size() < static_cast<std::size_t>(config.top_k)) {
    throw ValidationError("top_k", "report has fewer entries than top_k");
  }
  const auto k = static_cast<std::size_t>(config.top_k);
  const auto seeds = config.eval_seeds();
  const int horizon = workload.horizon_for(condition);

  SearchReport out{report.family, {}, {}, report.warnings};
  out.entries.assign(report.entries.begin(),
                     report.entries.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::vector<RunOutcome>> outcomes(k);
  parallel_for(k, config.threads, [&](std::size_t i) {
    const ScheduleSpec schedule(out.entries[i].shape, out.entries[i].best_lr, horizon);
    outcomes[i] = run_seeds(schedule, workload, seeds, condition, config.keep_trajectories);
  });
  for (std::size_t i = 0; i < k; ++i) {
    auto& e = out.entries[i];
    e.eval_scores = scores_of(outcomes[i]);
    e.eval_median = median(e.eval_scores);
    e.band = band_if_possible(e.eval_scores, config.delta);
    if (config.keep_runs) {
      const auto sched_json =
          schedule_to_json(ScheduleSpec(e.shape, e.best_lr, horizon));
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto& o = outcomes[i][s];
        out.runs.push_back({run_id("eval", report.family, e.index, e.best_lr_index,
                                   static_cast<int>(s)),
                            sched_json, seeds[s], condition.label, o.score, o.diverged,
                            o.trajectory});
      }
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ShapeEntry& a, const ShapeEntry& b) {
                     return *a.eval_median < *b.eval_median;
                   });
  std::sort(out.runs.begin(), out.runs.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
  return out;
}

std::vector<double> linesearch_values(const ParamSpec& spec, double original, int points) {
  if (points < 2) throw ValidationError("points", "linesearch needs >= 2 points");
  std::vector<double> v;
  for (int i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / (points - 1);
    double x;
    if (i == 0) {
      x = spec.lo;
    } else if (i == points - 1) {
      x = spec.hi;
    } else if (spec.law == Sampling::kLogUniform) {
      x = std::exp(std::log(spec.lo) + u * (std::log(spec.hi) - std::log(spec.lo)));
    } else {
      x = spec.lo + u * (spec.hi - spec.lo);
    }
    v.push_back(x);
  }
  v.push_back(original);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<LinesearchRow> coordinate_linesearch(const ShapeParams& shape,
                                                 const SearchConfig& config,
                                                 const Workload& workload,
                                                 const LinesearchRequest& request,
                                                 const Condition& condition) {
  config.validate();
  const auto& specs = shape.specs();
  std::vector<std::string> names = request.params;
  if (names.empty()) {
    for (const auto& s : specs) names.push_back(s.name);
  }
  for (const auto& [name, vals] : request.values) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ValidationError(name, "sweep values given for a parameter that is not swept");
    }
  }

  struct Point {
    std::string param;
    double value;
    bool original;
    ShapeParams shape;
  };
  std::vector<Point> points;
  for (const auto& name : names) {
    const std::size_t k = shape.index_of(name);
    const auto& spec = specs[k];
    const double orig = shape.values()[k];
    std::vector<double> values;
    if (auto it = request.values.find(name); it != request.values.end()) {
      for (double v : it->second) {
        if (!(v >= spec.lo && v <= spec.hi)) {
          throw ValidationError(name, "linesearch value " + std::to_string(v) +
                                          " outside the range of '" + name + "'");
        }
      }
      values = it->second;
      values.push_back(orig);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
    } else {
      values = linesearch_values(spec, orig, request.points);
    }
    for (double v : values) {
      points.push_back({name, v, v == orig, shape.with_value(name, v)});
    }
  }

  const auto lrs = config.lr_grid();
  const auto search = config.search_seeds();
  const auto eval = config.eval_seeds();
  const int horizon = workload.horizon_for(condition);
  std::vector<LinesearchRow> rows(points.size());
  parallel_for(points.size(), config.threads, [&](std::size_t i) {
    const auto& p = points[i];
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t l = 0; l < lrs.size(); ++l) {
      const double s = median(scores_of(run_seeds(ScheduleSpec(p.shape, lrs[l], horizon),
                                                  workload, search, condition, false)));
      if (l == 0 || s < best_score) {
        best = l;
        best_score = s;
      }
    }
    const auto scores = scores_of(
        run_seeds(ScheduleSpec(p.shape, lrs[best], horizon), workload, eval, condition, false));
    rows[i] = {p.param, p.value, p.original, lrs[best], median(scores),
               band_if_possible(scores, config.delta)};
  });
  return rows;
}

CrossConditionResult cross_condition_matrix(std::span<const Condition> conditions,
                                            const SearchConfig& config,
                                            const Workload& workload) {
  if (conditions.size() < 2) {
    throw ValidationError("conditions", "cross-condition matrix needs >= 2 conditions");
  }
  std::set<std::string> labels;
  for (const auto& c : conditions) {
    if (!labels.insert(c.label).second) {
      throw ValidationError("conditions", "duplicate condition label '" + c.label + "'");
    }
  }
  CrossConditionResult out;
  for (const auto& c : conditions) {
    const auto report = evaluation_step(search_step(config, workload, c), config, workload, c);
    out.selected.push_back(report.entries.front());
  }
  const auto seeds = config.eval_seeds();
  const std::size_t n = conditions.size();
  out.cells.resize(n * n);
  parallel_for(n * n, config.threads, [&](std::size_t u) {
    const auto& sel = out.selected[u / n];
    const auto& ev = conditions[u % n];
    const ScheduleSpec schedule(sel.shape, sel.best_lr, workload.horizon_for(ev));
    const auto scores = scores_of(run_seeds(schedule, workload, seeds, ev, false));
    out.cells[u] = {conditions[u / n].label, ev.label, median(scores),
                    band_if_possible(scores, config.delta)};
  });
  return out;
}

double false_negative_rate(std::span<const double> reference,
                           std::span<const double> candidate, int top_k) {
  if (reference.size() != candidate.size()) {
    throw ValidationError("scores", "reference and candidate sizes differ");
  }
  if (reference.empty()) throw ValidationError("scores", "no shapes");
  const int k = std::min(top_k, static_cast<int>(reference.size()));
  if (k < 1) throw ValidationError("top_k", "top_k must be >= 1");
  const auto ref = top_indices(reference, k);
  const auto cand = top_indices(candidate, k);
  const std::set<std::size_t> cand_set(cand.begin(), cand.end());
  int missing = 0;
  for (auto i : ref) missing += cand_set.count(i) ? 0 : 1;
  return static_cast<double>(missing) / k;
}

NoiseResult noise_from_scores(const std::vector<std::vector<double>>& scores_a,
                              const std::vector<std::vector<double>>& scores_b,
                              std::span<const int> subset_sizes, int top_k) {
  if (scores_a.size() != scores_b.size() || scores_a.empty()) {
    throw ValidationError("scores", "need matching, non-empty score sets");
  }
  NoiseResult out;
  out.subset_sizes.assign(subset_sizes.begin(), subset_sizes.end());
  for (const auto& a : scores_a) out.reference_medians.push_back(median(a));
  for (int size : subset_sizes) {
    std::vector<double> meds;
    for (const auto& b : scores_b) {
      if (size < 1 || static_cast<std::size_t>(size) > b.size()) {
        throw ValidationError("subset_sizes", "subset size exceeds the seed count");
      }
      meds.push_back(median(std::span<const double>(b.data(), static_cast<std::size_t>(size))));
    }
    out.false_negative_rates.push_back(false_negative_rate(out.reference_medians, meds, top_k));
    out.subset_medians.push_back(std::move(meds));
  }
  return out;
}

NoiseResult noise_characterization(std::span<const ShapeParams> shapes,
                                   std::span<const double> base_lrs,
                                   const SearchConfig& config, const NoiseConfig& noise,
                                   const Workload& workload, const Condition& condition) {
  if (shapes.size() != base_lrs.size()) {
    throw ValidationError("base_lrs", "one base LR per shape is required");
  }
  if (noise.seeds < 1) throw ValidationError("seeds", "seeds must be >= 1");
  const auto seeds_a = seed_list(config.master_seed, Stream::kNoiseInitA,
                                 Stream::kNoiseOrderA, noise.seeds);
  const auto seeds_b = seed_list(config.master_seed, Stream::kNoiseInitB,
                                 Stream::kNoiseOrderB, noise.seeds);
  const int horizon = workload.horizon_for(condition);
  const std::size_t n = shapes.size();
  std::vector<std::vector<double>> a(n), b(n);
  parallel_for(2 * n, config.threads, [&](std::size_t u) {
    const std::size_t i = u / 2;
    const ScheduleSpec schedule(shapes[i], base_lrs[i], horizon);
    auto& dst = (u % 2 == 0) ? a[i] : b[i];
    dst = scores_of(run_seeds(schedule, workload, (u % 2 == 0) ? seeds_a : seeds_b,
                              condition, false));
  });
  return noise_from_scores(a, b, noise.subset_sizes, noise.top_k);
}

}  // namespace lrs
