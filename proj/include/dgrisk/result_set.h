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

#ifndef DGRISK_RESULT_SET_H_
#define DGRISK_RESULT_SET_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dgrisk {

// Empty cells (std::monostate) appear when rows of one result carry
// different columns.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

std::string FormatCell(const Cell& cell);
std::optional<double> CellAsDouble(const Cell& cell);

struct ResultMetadata {
  std::string version;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string kind;
  std::string name;

  friend bool operator==(const ResultMetadata&, const ResultMetadata&) =
      default;
};

struct ResultSet {
  ResultMetadata metadata;
  std::vector<std::string> columns;
  // Columns estimated by Monte Carlo; each has a partner "<name>_se".
  std::vector<std::string> mc_columns;
  std::vector<std::vector<Cell>> rows;

  // -1 when absent.
  int ColumnIndex(std::string_view name) const;
  // Row sizes match the header and every MC column has its partner.
  absl::Status Validate() const;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;
};

// Current UTC time, ISO 8601.
std::string UtcTimestamp();

// Version of this build.
std::string ToolVersion();

// CSV: "# key: value" metadata lines, a header, then RFC 4180 rows. Strings
// are always quoted, doubles always carry a '.', exponent, inf or nan, so
// the types survive a round trip.
std::string ToCsv(const ResultSet& results);
absl::StatusOr<ResultSet> ResultSetFromCsv(std::string_view text);

std::string ToJson(const ResultSet& results);
absl::StatusOr<ResultSet> ResultSetFromJson(std::string_view text);

// Rows only, for determinism checks that ignore the timestamp.
std::string RowsFingerprint(const ResultSet& results);

}  // namespace dgrisk

#endif  // DGRISK_RESULT_SET_H_
