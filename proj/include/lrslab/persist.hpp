// SPDX-License-Identifier: Apache-2.0
//
// Output artifacts: atomic file writes, CSV/JSONL formatting, manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lrslab/schedule.hpp"
#include "lrslab/workload.hpp"

namespace lrs {

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Round-trippable decimal: %.17g, with "inf"/"-inf"/"nan" for non-finite.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Quotes a CSV cell when it contains a separator, quote or newline.
std::string csv_escape(std::string_view cell);

std::string to_jsonl(const std::vector<RunRecord>& records);

std::uint64_t fnv1a64(std::string_view data) noexcept;
std::string hex64(std::uint64_t v);

/// CSV of (step, fraction, multiplier, lr). `resolution` rows are spread
/// evenly over steps 0 .. T-1 (every step when resolution >= T).
std::string export_schedule(const ScheduleSpec& spec, int resolution);

/// Creates `dir`. A non-empty existing directory needs `force`.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

std::string utc_timestamp();

}  // namespace lrs
