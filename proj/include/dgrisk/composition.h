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

#ifndef DGRISK_COMPOSITION_H_
#define DGRISK_COMPOSITION_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "dgrisk/flat_risk.h"

namespace dgrisk {

struct Release {
  std::int64_t x1_star = 0;
  double rho = 0;
};

// Sequence of releases of the same count by independent mechanisms. The
// scenario supplies known_count and the initial prior; its rho1 is unused.
struct ReleaseTrace {
  FlatScenario scenario;
  std::vector<Release> releases;
};

absl::Status ValidateReleaseTrace(const ReleaseTrace& trace);

// Posterior of known_count + 1 after each release, each step taking the
// previous posterior as its prior. Assumes a validated trace.
std::vector<double> SequentialPosterior(const ReleaseTrace& trace);

struct ComposedRisk {
  // Posterior after release i over posterior before it.
  std::vector<double> per_step_risks;
  // Product of per_step_risks, accumulated left to right.
  double total_risk = 1;
};

ComposedRisk ComposeRisk(const ReleaseTrace& trace);

}  // namespace dgrisk

#endif  // DGRISK_COMPOSITION_H_
