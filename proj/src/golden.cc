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

#include "dgrisk/golden.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "dgrisk/result_set.h"

namespace dgrisk {
namespace {

std::optional<double> ParseNumber(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

bool CellMatches(const Cell& cell, const std::string& want) {
  const std::optional<double> have = CellAsDouble(cell);
  const std::optional<double> target = ParseNumber(want);
  if (have.has_value() && target.has_value()) {
    return std::fabs(*have - *target) <=
           1e-9 * std::max(1.0, std::fabs(*target));
  }
  return FormatCell(cell) == want;
}

std::string KeyString(const GoldenCell& cell) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : cell.key) parts.push_back(absl::StrCat(k, "=", v));
  return parts.empty() ? "(single row)" : absl::StrJoin(parts, ";");
}

const char* CheckName(GoldenCheck c) {
  switch (c) {
    case GoldenCheck::kApprox:
      return "approx";
    case GoldenCheck::kAtMost:
      return "max";
    case GoldenCheck::kAtLeast:
      return "min";
  }
  return "approx";
}

}  // namespace

absl::StatusOr<std::vector<GoldenCell>> ParseGoldenCsv(std::string_view text) {
  std::vector<GoldenCell> cells;
  bool header_seen = false;
  int line_no = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    std::string line(raw.data(), raw.size());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "key,column,check,expected,tolerance,se_mult") {
        return absl::InvalidArgumentError(absl::StrCat(
            "golden line ", line_no,
            ": expected header key,column,check,expected,tolerance,se_mult"));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> f = absl::StrSplit(line, ',');
    if (f.size() != 6) {
      return absl::InvalidArgumentError(
          absl::StrCat("golden line ", line_no, ": expected 6 fields"));
    }
    GoldenCell cell;
    if (!f[0].empty()) {
      for (absl::string_view part : absl::StrSplit(f[0], ';')) {
        std::vector<std::string> kv = absl::StrSplit(part, '=');
        if (kv.size() != 2) {
          return absl::InvalidArgumentError(
              absl::StrCat("golden line ", line_no, ": bad key part '",
                           part, "'"));
        }
        cell.key.emplace_back(kv[0], kv[1]);
      }
    }
    cell.column = f[1];
    if (f[2] == "approx") {
      cell.check = GoldenCheck::kApprox;
    } else if (f[2] == "max") {
      cell.check = GoldenCheck::kAtMost;
    } else if (f[2] == "min") {
      cell.check = GoldenCheck::kAtLeast;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "golden line ", line_no, ": check must be approx, max or min"));
    }
    const auto expected = ParseNumber(f[3]);
    const auto tolerance = ParseNumber(f[4]);
    const auto se_mult = ParseNumber(f[5]);
    if (!expected || !tolerance || !se_mult) {
      return absl::InvalidArgumentError(
          absl::StrCat("golden line ", line_no, ": non-numeric value"));
    }
    cell.expected = *expected;
    cell.tolerance = *tolerance;
    cell.se_mult = *se_mult;
    cells.push_back(std::move(cell));
  }
  return cells;
}

absl::StatusOr<std::vector<GoldenCell>> LoadGolden(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open golden file '", path.string(), "'"));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseGoldenCsv(buffer.str());
}

std::vector<GoldenOutcome> CompareGolden(const ResultSet& results,
                                         absl::Span<const GoldenCell> golden,
                                         const GoldenOptions& options) {
  std::vector<GoldenOutcome> outcomes;
  for (const GoldenCell& cell : golden) {
    GoldenOutcome out;
    out.cell = cell;
    const int col = results.ColumnIndex(cell.column);
    const bool mc = std::find(results.mc_columns.begin(),
                              results.mc_columns.end(),
                              cell.column) != results.mc_columns.end();
    const int se_col = results.ColumnIndex(cell.column + "_se");
    if (col < 0) {
      out.message = absl::StrCat("no column ", cell.column);
      outcomes.push_back(out);
      continue;
    }
    std::vector<const std::vector<Cell>*> matches;
    bool key_ok = true;
    for (const auto& [k, v] : cell.key) {
      if (results.ColumnIndex(k) < 0) key_ok = false;
    }
    if (!key_ok) {
      out.message = absl::StrCat("key column missing for ", KeyString(cell));
      outcomes.push_back(out);
      continue;
    }
    for (const auto& row : results.rows) {
      bool all = true;
      for (const auto& [k, v] : cell.key) {
        if (!CellMatches(row[results.ColumnIndex(k)], v)) {
          all = false;
          break;
        }
      }
      if (all) matches.push_back(&row);
    }
    if (matches.size() != 1) {
      out.message = absl::StrFormat("%d rows match %s", matches.size(),
                                    KeyString(cell));
      outcomes.push_back(out);
      continue;
    }
    const std::vector<Cell>& row = *matches.front();
    out.actual = CellAsDouble(row[col]);
    if (se_col >= 0) out.se = CellAsDouble(row[se_col]).value_or(0);
    const double se_mult =
        mc ? std::max(cell.se_mult, options.mc_min_se_mult) : cell.se_mult;
    const double tol = cell.tolerance + se_mult * out.se;
    out.lower = cell.check == GoldenCheck::kAtMost
                    ? -HUGE_VAL
                    : cell.expected - tol;
    out.upper = cell.check == GoldenCheck::kAtLeast
                    ? HUGE_VAL
                    : cell.expected + tol;
    if (!out.actual.has_value()) {
      out.message = "cell is not numeric";
    } else {
      // Small slack for printed-digit boundaries.
      const double slack = 1e-12 * std::max(1.0, std::fabs(cell.expected));
      out.pass = *out.actual >= out.lower - slack &&
                 *out.actual <= out.upper + slack;
    }
    outcomes.push_back(out);
  }
  return outcomes;
}

std::string FormatGoldenReport(absl::Span<const GoldenOutcome> outcomes) {
  std::string out;
  int passed = 0;
  for (const GoldenOutcome& o : outcomes) {
    passed += o.pass;
    std::string value = o.actual.has_value()
                            ? absl::StrFormat("%.6g", *o.actual)
                            : std::string("n/a");
    std::string band;
    if (o.cell.check == GoldenCheck::kApprox) {
      band = absl::StrFormat("%.6g +/- %.3g", o.cell.expected,
                             (o.upper - o.lower) / 2);
    } else if (o.cell.check == GoldenCheck::kAtMost) {
      band = absl::StrFormat("<= %.6g", o.upper);
    } else {
      band = absl::StrFormat(">= %.6g", o.lower);
    }
    absl::StrAppend(&out, o.pass ? "[PASS] " : "[FAIL] ", KeyString(o.cell),
                    " ", o.cell.column, " (", CheckName(o.cell.check),
                    "): got ", value, ", want ", band);
    if (o.se > 0) absl::StrAppend(&out, absl::StrFormat(" (se %.3g)", o.se));
    if (!o.message.empty()) absl::StrAppend(&out, " [", o.message, "]");
    absl::StrAppend(&out, "\n");
  }
  absl::StrAppend(&out, absl::StrFormat("%d/%d golden cells pass\n", passed,
                                        outcomes.size()));
  return out;
}

}  // namespace dgrisk
