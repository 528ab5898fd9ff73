// SPDX-License-Identifier: Apache-2.0
//
// Command dispatch shared by the CLI and the C API.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace lrs {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
};

struct CommandOptions {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out;
  /// Overrides the config's "seed".
  std::optional<std::uint64_t> seed;
  bool force = false;
  /// 0 = LRSLAB_THREADS or hardware concurrency.
  int threads = 0;
};

std::span<const std::string_view> command_names() noexcept;

/// Runs one command and writes its artifacts under options.out, manifest
/// last. Errors are reported on `err`; the return value is an ExitCode.
int run_command(const CommandOptions& options, std::ostream& err);

}  // namespace lrs
