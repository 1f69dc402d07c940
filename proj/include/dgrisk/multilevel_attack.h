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

#ifndef DGRISK_MULTILEVEL_ATTACK_H_
#define DGRISK_MULTILEVEL_ATTACK_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "dgrisk/flat_risk.h"

namespace dgrisk {

// Target unique at several levels of the hierarchy; the adversary combines
// one noisy count per level. Noise is independent across levels.
struct MultiLevelScenario {
  FlatScenario flat;
  // rho for levels 1..l, bottom level first. level_rhos[0] == flat.rho1.
  std::vector<double> level_rhos;
};

absl::Status ValidateMultiLevelScenario(const MultiLevelScenario& s);

// Posterior of known_count + 1 given one release per level.
absl::StatusOr<double> MultilevelPosterior(
    const MultiLevelScenario& s, absl::Span<const std::int64_t> releases);

struct MultilevelPoint {
  int levels = 0;
  double marginal_posterior = 0;
  // Zero for exactly summed points.
  double marginal_posterior_se = 0;
  double risk = 0;
  double risk_se = 0;
  bool exact = true;
};

struct MultilevelOptions {
  std::int64_t mc_draws = 1'000'000;
  std::uint64_t seed = 1;
  int workers = 1;
};

// For l = 1..ell_max, the expected posterior of the true hypothesis when the
// adversary uses the first l levels. Exact nested sums for l <= 2; Monte Carlo
// with common draws across l otherwise.
absl::StatusOr<std::vector<MultilevelPoint>> MultilevelMarginalCurve(
    const FlatScenario& base, absl::Span<const double> level_rhos,
    int ell_max, const MultilevelOptions& options = {});

}  // namespace dgrisk

#endif  // DGRISK_MULTILEVEL_ATTACK_H_
