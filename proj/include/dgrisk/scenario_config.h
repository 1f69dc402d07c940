// Copyright 2026 The dgrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DGRISK_SCENARIO_CONFIG_H_
#define DGRISK_SCENARIO_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dgrisk/composition.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/hier_risk.h"
#include "dgrisk/multilevel_attack.h"
#include "dgrisk/postprocess.h"
#include "json.hpp"

namespace dgrisk {

enum class ScenarioKind { kFlat, kHier, kMultilevel, kComposition, kPostprocess };

absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name);
std::string_view ScenarioKindName(ScenarioKind kind);

struct LogGrid {
  double min = 0;
  double max = 0;
  int points = 0;

  friend bool operator==(const LogGrid&, const LogGrid&) = default;
};

// One sweep dimension. A single parameter takes each value in turn; several
// parameters are zipped, each value then being an array with one entry per
// parameter. Explicit values and a log grid may be combined for a single
// numeric parameter (merged, sorted, deduplicated).
struct SweepAxis {
  std::vector<std::string> parameters;
  std::vector<nlohmann::json> values;
  std::optional<LogGrid> log_grid;

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct TrialSettings {
  std::optional<std::int64_t> n_trials;
  std::optional<std::int64_t> n_draws;
  std::optional<std::int64_t> burn_in;
  std::uint64_t seed = 1;

  friend bool operator==(const TrialSettings&, const TrialSettings&) = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kFlat;
  std::string name;
  std::string description;
  // Object of parameter name to value; see the README for each kind's keys.
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<SweepAxis> sweep;
  TrialSettings trials;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) =
      default;
};

// Parses and validates. Syntax errors carry line and column; validation
// failures list every offending field.
absl::StatusOr<ScenarioConfig> ParseScenarioConfig(std::string_view text);

// As ParseScenarioConfig; NotFound when the file does not exist.
absl::StatusOr<ScenarioConfig> LoadScenario(const std::filesystem::path& path);

// Field-level problems, empty for a valid config.
std::vector<std::string> ValidateScenarioConfig(const ScenarioConfig& config);

nlohmann::json ScenarioConfigToJson(const ScenarioConfig& config);
std::string SerializeScenarioConfig(const ScenarioConfig& config);

// Values an axis takes, in order.
std::vector<nlohmann::json> AxisValues(const SweepAxis& axis);

struct SweepPoint {
  std::int64_t index = 0;
  // Base parameters with this point's values applied.
  nlohmann::json parameters;
  // Only the swept parameter values, in axis order.
  std::vector<std::pair<std::string, nlohmann::json>> swept;
};

// Cartesian product of the axes, first axis varying slowest. A config
// without sweep has a single point.
std::vector<SweepPoint> ExpandSweep(const ScenarioConfig& config);

// Number or {"preset": name, "level": level}.
absl::StatusOr<double> ResolveRho(const nlohmann::json& value);

absl::StatusOr<PriorX2> ParsePriorX2(const nlohmann::json& value);
nlohmann::json PriorX2ToJson(const PriorX2& prior);

// Typed scenarios from a merged parameter object. Missing keys take the
// documented defaults.
absl::StatusOr<FlatScenario> FlatScenarioFromParams(const nlohmann::json& p);
absl::StatusOr<HierScenario> HierScenarioFromParams(const nlohmann::json& p);
absl::StatusOr<MultiLevelScenario> MultiLevelScenarioFromParams(
    const nlohmann::json& p);
absl::StatusOr<PostProcessScenario> PostProcessScenarioFromParams(
    const nlohmann::json& p);
// `base_dir` resolves a relative trace_file.
absl::StatusOr<ReleaseTrace> ReleaseTraceFromParams(
    const nlohmann::json& p, const std::filesystem::path& base_dir = {});

// Trace file: CSV with header `x1_star,rho`.
absl::StatusOr<std::vector<Release>> ReadTraceCsv(
    const std::filesystem::path& path);

}  // namespace dgrisk

#endif  // DGRISK_SCENARIO_CONFIG_H_
