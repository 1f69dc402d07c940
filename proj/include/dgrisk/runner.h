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

#ifndef DGRISK_RUNNER_H_
#define DGRISK_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>

#include "absl/status/statusor.h"
#include "dgrisk/result_set.h"
#include "dgrisk/scenario_config.h"

namespace dgrisk {

struct RunOptions {
  int workers = 1;
  // Monte Carlo trial counts divided by 10.
  bool fast = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> n_trials;
  // JSON-lines file of finished sweep points; matching points are reused.
  std::optional<std::filesystem::path> checkpoint;
  // Directory against which relative trace files resolve.
  std::filesystem::path base_dir;
  // Called after each finished point with (done, total).
  std::function<void(std::int64_t, std::int64_t)> progress;
};

// Default trial counts when neither the config nor the options set them.
inline constexpr std::int64_t kDefaultHierTrials = 100'000;
inline constexpr std::int64_t kDefaultMultilevelDraws = 1'000'000;
inline constexpr std::int64_t kDefaultPosteriorDraws = 10'000;
inline constexpr std::int64_t kDefaultDecisionDraws = 1'000;

// Evaluates every sweep point and collects the rows in sweep order. Output
// rows depend only on the config, seed and trial counts.
absl::StatusOr<ResultSet> Run(const ScenarioConfig& config,
                              const RunOptions& options = {});

}  // namespace dgrisk

#endif  // DGRISK_RUNNER_H_
