// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lrslab/commands.hpp"
#include "lrslab/errors.hpp"
#include "lrslab/persist.hpp"

using namespace lrs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lrslab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

fs::path write_config(const fs::path& dir, const std::string& name, const nlohmann::json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump();
  return p;
}

int run(const std::string& cmd, const fs::path& config, const fs::path& out, bool force = false,
        int threads = 1, std::string* err_text = nullptr) {
  CommandOptions o;
  o.command = cmd;
  o.config = config;
  o.out = out;
  o.force = force;
  o.threads = threads;
  std::ostringstream err;
  const int code = run_command(o, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CsvTable t({"a", "b"});
  t.row({"1", "{\"x\":1,\"y\":2}"});
  CHECK(t.str() == "a,b\n1,\"{\"\"x\"\":1,\"\"y\"\":2}\"\n");
  CHECK_THROWS(t.row({"1"}));
}

TEST_CASE("atomic write replaces content and leaves no temp files") {
  const auto dir = scratch("atomic");
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  int n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  CHECK(n == 1);
}

TEST_CASE("fnv hash") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(255) == "00000000000000ff");
}

TEST_CASE("export schedule") {
  const ScheduleSpec con(ShapeParams(Family::kConstant, {0.0}), 0.01, 10);
  const auto rows = lines(export_schedule(con, 10));
  REQUIRE(rows.size() == 11);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "0.01");
  }
  const ScheduleSpec cos(ShapeParams(Family::kCosine, {0.0, 1.0}), 0.01, 100);
  const auto c = lines(export_schedule(cos, 100));
  CHECK(c[51].rfind("50,0.5,", 0) == 0);
  CHECK(std::stod(c[51].substr(c[51].rfind(',') + 1)) == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(lines(export_schedule(cos, 5)).size() == 6);
  CHECK_THROWS_AS(export_schedule(cos, 1), ValidationError);
}

TEST_CASE("grid command") {
  const auto dir = scratch("grid");
  const auto cfg = write_config(dir, "c.json", {{"lo", 1e-4}, {"hi", 1e-1}, {"n", 16}});
  REQUIRE(run("grid", cfg, dir / "out") == kExitOk);
  const auto rows = lines(slurp(dir / "out" / "grid.csv"));
  REQUIRE(rows.size() == 17);
  CHECK(rows[1] == "0,0.0001");
  CHECK(std::stod(rows[16].substr(3)) == 0.1);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["command"] == "grid");
  CHECK(manifest["config_hash"] ==
        hex64(fnv1a64(nlohmann::json({{"lo", 1e-4}, {"hi", 1e-1}, {"n", 16}}).dump())));
  CHECK(manifest["master_seed"] == 0);

  std::string err;
  CHECK(run("grid", cfg, dir / "out", false, 1, &err) == kExitConfig);
  CHECK(err.find("--force") != std::string::npos);
  CHECK(run("grid", cfg, dir / "out", true) == kExitOk);
}

TEST_CASE("config errors name the field") {
  const auto dir = scratch("config");
  std::string err;
  const auto unknown = write_config(dir, "u.json", {{"lo", 1e-4}, {"bogus", 1}});
  CHECK(run("grid", unknown, dir / "o1", false, 1, &err) == kExitConfig);
  CHECK(err.find("bogus") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o1"));

  const auto typed = write_config(dir, "t.json", {{"workload", {{"type", "toy"}, {"batch", "x"}}}});
  CHECK(run("search", typed, dir / "o2", false, 1, &err) == kExitConfig);
  CHECK(err.find("workload.batch") != std::string::npos);

  std::ofstream(dir / "m.json") << "{ not json";
  CHECK(run("grid", dir / "m.json", dir / "o3", false, 1, &err) == kExitConfig);

  const auto fam = write_config(dir, "f.json",
                                {{"workload", {{"type", "linreg-theory"}}},
                                 {"search", {{"family", "triangle"}}}});
  CHECK(run("search", fam, dir / "o4", false, 1, &err) == kExitConfig);
  CHECK(err.find("search.family") != std::string::npos);
  CHECK(run("nope", unknown, dir / "o5") == kExitConfig);
}

TEST_CASE("theory command") {
  const auto dir = scratch("theory");
  const auto zero = write_config(
      dir, "z.json", {{"problem", {{"dim", 500}, {"batch", 32}, {"horizon", 1000}}}, {"constant", 0.0}});
  REQUIRE(run("theory", zero, dir / "z") == kExitOk);
  const auto rows = lines(slurp(dir / "z" / "theory.csv"));
  REQUIRE(rows.size() == 1002);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "0.5");
  }
  const auto big = write_config(
      dir, "b.json", {{"problem", {{"dim", 50}, {"batch", 5}, {"horizon", 500}}}, {"constant", 5.0}});
  CHECK(run("theory", big, dir / "b") == kExitDivergence);
  const auto sched = write_config(
      dir, "s.json",
      {{"problem", {{"dim", 50}, {"batch", 5}, {"horizon", 100}}},
       {"schedule", {{"shape", {{"family", "cos-std"}, {"params", {{"warmup", 0.0}, {"alpha", 1.0}}}}},
                     {"base_lr", 0.1}}}});
  CHECK(run("theory", sched, dir / "s") == kExitOk);
}

TEST_CASE("search rerun is byte-identical") {
  const auto dir = scratch("search");
  const nlohmann::json cfg{
      {"seed", 7},
      {"workload", {{"type", "linreg-theory"}, {"dim", 40}, {"batch", 8}, {"horizon", 60}}},
      {"search", {{"family", "tps"}, {"n_shapes", 20}, {"k_search", 1}, {"top_k", 3},
                  {"eval_init", 1}, {"eval_order", 1}, {"lr_lo", 0.01}, {"lr_hi", 1.0},
                  {"keep_runs", true}}}};
  const auto p = write_config(dir, "c.json", cfg);
  REQUIRE(run("evaluate", p, dir / "a", false, 1) == kExitOk);
  REQUIRE(run("evaluate", p, dir / "b", false, 3) == kExitOk);
  for (const char* f : {"search_summary.csv", "eval_summary.csv", "runs.jsonl", "best_schedule.json",
                        "best_schedule.csv", "lr_histogram.csv"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(lines(slurp(dir / "a" / "runs.jsonl")).size() == 20u * 16u + 3u);
  // the exported best schedule re-imports to the same score
  const auto best = schedule_from_json(nlohmann::json::parse(slurp(dir / "a" / "best_schedule.json")));
  const LinRegTheoryWorkload w(LinRegProblem::make(40, 8, 60));
  const auto rows = lines(slurp(dir / "a" / "eval_summary.csv"));
  std::stringstream ss(rows[1]);
  std::vector<std::string> cells;
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  const double eval = std::stod(cells[5]);
  CHECK(w.run(best, {}, {}, false).score == eval);
}

TEST_CASE("other commands run end to end") {
  const auto dir = scratch("misc");
  const nlohmann::json problem{{"dim", 30}, {"batch", 6}, {"horizon", 50}};
  const auto d = write_config(dir, "d.json",
                              {{"problem", problem},
                               {"descent", {{"meta_steps", 30}}},
                               {"fit_families", {"snm", "tps"}},
                               {"fit", {{"random_samples", 50}, {"restarts", 1}}}});
  REQUIRE(run("sched-descent", d, dir / "d") == kExitOk);
  CHECK(lines(slurp(dir / "d" / "descent_schedule.csv")).size() == 51);
  CHECK(lines(slurp(dir / "d" / "fit.csv")).size() == 3);

  const auto f = write_config(dir, "f.json",
                              {{"target", {1.0, 0.9, 0.5, 0.1}}, {"fit_families", {"tpl"}},
                               {"fit", {{"random_samples", 20}, {"restarts", 1}}}});
  REQUIRE(run("fit-family", f, dir / "f") == kExitOk);

  const auto s = write_config(dir, "s.json", {{"problem", problem}, {"constant", 0.05}, {"seeds", 8}});
  REQUIRE(run("simulate", s, dir / "s", false, 2) == kExitOk);
  CHECK(lines(slurp(dir / "s" / "simulate.csv")).size() == 52);

  const nlohmann::json toy{{"type", "toy"}, {"input_dim", 4}, {"classes", 2}, {"samples", 64},
                           {"hidden", {4}}, {"batch", 8}, {"horizon", 10}, {"eval_every", 5}};
  const nlohmann::json small{{"family", "cos-std"}, {"n_shapes", 4}, {"k_search", 1}, {"top_k", 2},
                             {"eval_init", 2}, {"eval_order", 1}};
  const auto e = write_config(dir, "e.json",
                              {{"workload", toy}, {"search", small}, {"families", {"con", "cos-std"}}});
  REQUIRE(run("ecdf", e, dir / "e") == kExitOk);
  const auto x = write_config(dir, "x.json",
                              {{"workload", toy}, {"search", small},
                               {"sweep", {{"param", "weight_decay"}, {"values", {0.0, 0.1}}}}});
  REQUIRE(run("xcond", x, dir / "x") == kExitOk);
  CHECK(lines(slurp(dir / "x" / "xcond_matrix.csv")).size() == 5);
  const auto l = write_config(
      dir, "l.json",
      {{"workload", toy}, {"search", small},
       {"shape", {{"family", "cos-std"}, {"params", {{"warmup", 0.0}, {"alpha", 1.0}}}}},
       {"linesearch", {{"params", {"alpha"}}, {"points", 3}}}});
  REQUIRE(run("linesearch", l, dir / "l") == kExitOk);
  CHECK(lines(slurp(dir / "l" / "linesearch.csv")).size() == 4);
  const auto n = write_config(
      dir, "n.json",
      {{"workload", toy}, {"search", small},
       {"noise", {{"n_shapes", 5}, {"base_lr", 0.01}, {"seeds", 3}, {"subset_sizes", {1, 3}}, {"top_k", 2}}}});
  REQUIRE(run("noise", n, dir / "n") == kExitOk);
  CHECK(lines(slurp(dir / "n" / "noise_rates.csv")).size() == 3);
}
