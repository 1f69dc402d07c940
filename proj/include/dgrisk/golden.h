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

#ifndef DGRISK_GOLDEN_H_
#define DGRISK_GOLDEN_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "dgrisk/result_set.h"

namespace dgrisk {

// approx: |actual - expected| <= tolerance + se_mult * se.
// max: actual <= expected + tolerance + se_mult * se; min symmetrically.
enum class GoldenCheck { kApprox, kAtMost, kAtLeast };

// One expected cell. The key selects a single row by column values.
struct GoldenCell {
  std::vector<std::pair<std::string, std::string>> key;
  std::string column;
  GoldenCheck check = GoldenCheck::kApprox;
  double expected = 0;
  double tolerance = 0;
  double se_mult = 0;
};

// CSV with header key,column,check,expected,tolerance,se_mult; key is
// "name=value;name=value" (empty for single-row results).
absl::StatusOr<std::vector<GoldenCell>> ParseGoldenCsv(std::string_view text);
absl::StatusOr<std::vector<GoldenCell>> LoadGolden(
    const std::filesystem::path& path);

struct GoldenOutcome {
  GoldenCell cell;
  std::optional<double> actual;
  double se = 0;
  double lower = 0;
  double upper = 0;
  bool pass = false;
  std::string message;
};

struct GoldenOptions {
  // Lower bound on se_mult for Monte Carlo columns. Reduced-trial runs set
  // it to 3 so the band grows with the (larger) standard error while the
  // fixed tolerance stays as printed.
  double mc_min_se_mult = 0;
};

std::vector<GoldenOutcome> CompareGolden(const ResultSet& results,
                                         absl::Span<const GoldenCell> golden,
                                         const GoldenOptions& options = {});

// One "[PASS]"/"[FAIL]" line per cell plus a summary line.
std::string FormatGoldenReport(absl::Span<const GoldenOutcome> outcomes);

}  // namespace dgrisk

#endif  // DGRISK_GOLDEN_H_
