// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrslab/lrslab.h"

int main(int argc, char** argv) {
  const std::vector<std::string> commands = {
      "search", "evaluate", "linesearch", "ecdf", "xcond", "sched-descent",
      "theory", "simulate", "noise", "fit-family", "grid"};

  CLI::App app{"Learning-rate schedule lab"};
  app.set_version_flag("--version", std::string(lrs_version()));
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
  int threads = 0;

  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_flag("--force", force, "Overwrite a non-empty output directory");
  app.add_option("--threads", threads, "Worker threads (0 = auto)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  lrs_command_options options{command.c_str(), config.c_str(), out.c_str(),
                              seed.has_value() ? 1 : 0, seed.value_or(0),
                              force ? 1 : 0, threads};
  const int code = lrs_run_command(&options);
  const char* message = lrs_last_error();
  if (message && *message) std::fputs(message, stderr);
  return code;
}
