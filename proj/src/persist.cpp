// SPDX-License-Identifier: Apache-2.0
#include "lrslab/persist.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "lrslab/errors.hpp"

namespace lrs {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::logic_error("CSV row has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

std::string to_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string export_schedule(const ScheduleSpec& spec, int resolution) {
  if (resolution < 2) throw ValidationError("resolution", "resolution must be >= 2");
  const int horizon = spec.horizon;
  std::vector<int> steps;
  if (resolution >= horizon) {
    for (int t = 0; t < horizon; ++t) steps.push_back(t);
  } else {
    for (int i = 0; i < resolution; ++i) {
      const int t = static_cast<int>(std::llround(static_cast<double>(i) * (horizon - 1) /
                                                  (resolution - 1)));
      if (steps.empty() || steps.back() != t) steps.push_back(t);
    }
  }
  CsvTable table({"step", "fraction", "multiplier", "lr"});
  for (int t : steps) {
    const double m = spec.shape(spec.fraction(t));
    table.row({std::to_string(t), format_double(spec.fraction(t)), format_double(m),
               format_double(spec.base_lr * m)});
  }
  return table.str();
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw ConfigError("out", "output path " + dir.string() + " is not a directory");
    }
    if (!fs::is_empty(dir) && !force) {
      throw ConfigError("out", "output directory " + dir.string() +
                                   " already exists; pass --force to overwrite");
    }
    return;
  }
  fs::create_directories(dir);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lrs
