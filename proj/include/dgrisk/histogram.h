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

#ifndef DGRISK_HISTOGRAM_H_
#define DGRISK_HISTOGRAM_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/hier_risk.h"

namespace dgrisk {

// Category labels for the four attributes of the GVHR histogram.
struct Codebook {
  std::vector<std::string> hhgq;
  std::vector<std::string> votingage;
  std::vector<std::string> hispanic;
  std::vector<std::string> cenrace;

  // Number of distinct cells.
  std::int64_t size() const;
};

// 8 x 2 x 6 x 9 = 864 cells of the 1940 census GVHR layout.
const Codebook& Census1940Codebook();

struct HistogramRow {
  std::string hhgq;
  std::string votingage;
  std::string hispanic;
  std::string cenrace;
  std::int64_t count = 0;

  std::string Label() const;
  bool SameCell(const HistogramRow& other) const;
};

// One geography's histogram. Cells not listed have count 0.
struct HistogramTable {
  std::string district;
  std::string county;
  std::string state;
  std::vector<HistogramRow> rows;
};

// CSV with header hhgq,votingage,hispanic,cenrace,count. Optional leading
// "# district: ...", "# county: ...", "# state: ..." lines.
absl::StatusOr<HistogramTable> ParseHistogramCsv(std::string_view text,
                                                 const Codebook& codebook);
absl::StatusOr<HistogramTable> ReadHistogramCsv(
    const std::filesystem::path& path, const Codebook& codebook);

struct ScanOptions {
  // Prior for a flagged target; 0 selects 1 / codebook size.
  double prior_p = 0;
};

struct TargetCandidate {
  HistogramRow row;
  // [0]: unique in the table; [1] (with siblings): unique in the union of
  // the table and its siblings.
  std::vector<bool> unique_at_level;
  FlatScenario flat;
  std::optional<HierScenario> hier;
};

// Flags cells with count 1 and builds the corresponding attack scenarios
// (census 2020 budget for rho). Siblings are the other lowest-level tables
// of the same second-level unit; when present each candidate also gets a
// two-level scenario.
absl::StatusOr<std::vector<TargetCandidate>> TargetScan(
    const HistogramTable& table, absl::Span<const HistogramTable> siblings,
    const Codebook& codebook, const ScanOptions& options = {});

}  // namespace dgrisk

#endif  // DGRISK_HISTOGRAM_H_
