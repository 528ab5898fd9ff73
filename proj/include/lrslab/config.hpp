// SPDX-License-Identifier: Apache-2.0
//
// JSON config documents. Every reader rejects unknown keys and reports the
// dotted path of the offending field in ConfigError::field().
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrslab/harness.hpp"
#include "lrslab/linreg.hpp"
#include "lrslab/workload.hpp"

namespace lrs {

nlohmann::json load_config(const std::filesystem::path& path);

/// Typed access to one JSON object. finish() throws on keys never read.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path);

  bool has(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key);
  std::optional<nlohmann::json> optional_raw(const std::string& key);

  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt);
  std::uint64_t unsigned_integer(const std::string& key,
                                 std::optional<std::uint64_t> fallback = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string string(const std::string& key,
                     std::optional<std::string> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key);

  std::string field(const std::string& key) const;
  void finish() const;

 private:
  const nlohmann::json& require(const std::string& key);
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

LinRegProblem problem_from_json(const nlohmann::json& j, const std::string& path);
DescentConfig descent_from_json(const nlohmann::json& j, const std::string& path);
ToyWorkloadSpec toy_spec_from_json(ObjectReader& r);
OptimizerConfig optimizer_from_json(const nlohmann::json& j, const std::string& path);
std::unique_ptr<Workload> workload_from_json(const nlohmann::json& j, const std::string& path);
SearchConfig search_from_json(const nlohmann::json& j, const std::string& path);
Family family_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace lrs
