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

#include "dgrisk/histogram.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dgrisk/accounting.h"
#include "dgrisk/status_macros.h"

namespace dgrisk {
namespace {

bool Contains(const std::vector<std::string>& labels, const std::string& v) {
  return std::find(labels.begin(), labels.end(), v) != labels.end();
}

// Minimal CSV field split with double-quote support.
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::int64_t CountOf(const HistogramTable& t, const HistogramRow& cell) {
  for (const HistogramRow& row : t.rows) {
    if (row.SameCell(cell)) return row.count;
  }
  return 0;
}

}  // namespace

std::int64_t Codebook::size() const {
  return static_cast<std::int64_t>(hhgq.size() * votingage.size() *
                                   hispanic.size() * cenrace.size());
}

const Codebook& Census1940Codebook() {
  static const Codebook* const kCodebook = new Codebook{
      {"Household", "Correctional institution", "Mental institution",
       "Institution for elderly, handicapped, and poor", "Military",
       "College dormitory", "Rooming house", "Other group quarters"},
      {"Of Voting Age", "Not Of Voting Age"},
      {"Not Hispanic", "Mexican", "Puerto Rican", "Cuban", "Other",
       "Not Reported"},
      {"White", "Black", "American Indian or Alaska Native", "Chinese",
       "Japanese", "Other Asian or Pacific Islander", "Other race",
       "Two major races", "Three or more major races"},
  };
  return *kCodebook;
}

std::string HistogramRow::Label() const {
  return absl::StrCat(votingage, " / ", hispanic, " / ", cenrace, " / ", hhgq);
}

bool HistogramRow::SameCell(const HistogramRow& o) const {
  return hhgq == o.hhgq && votingage == o.votingage && hispanic == o.hispanic &&
         cenrace == o.cenrace;
}

absl::StatusOr<HistogramTable> ParseHistogramCsv(std::string_view text,
                                                 const Codebook& codebook) {
  HistogramTable table;
  bool header_seen = false;
  int line_no = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    std::string line(raw.data(), raw.size());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string_view meta(line);
      meta.remove_prefix(1);
      while (!meta.empty() && meta.front() == ' ') meta.remove_prefix(1);
      const std::size_t colon = meta.find(':');
      if (colon == std::string_view::npos) continue;
      std::string key(meta.substr(0, colon));
      std::string value(meta.substr(colon + 1));
      value.erase(0, value.find_first_not_of(' '));
      if (key == "district") table.district = value;
      if (key == "county") table.county = value;
      if (key == "state") table.state = value;
      continue;
    }
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (!header_seen) {
      if (line != "hhgq,votingage,hispanic,cenrace,count") {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", line_no,
            ": expected header hhgq,votingage,hispanic,cenrace,count"));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 5 fields, got ",
                       fields.size()));
    }
    HistogramRow row{fields[0], fields[1], fields[2], fields[3], 0};
    const std::pair<const std::vector<std::string>*, const std::string*>
        checks[] = {{&codebook.hhgq, &row.hhgq},
                    {&codebook.votingage, &row.votingage},
                    {&codebook.hispanic, &row.hispanic},
                    {&codebook.cenrace, &row.cenrace}};
    const char* names[] = {"hhgq", "votingage", "hispanic", "cenrace"};
    for (int i = 0; i < 4; ++i) {
      if (!Contains(*checks[i].first, *checks[i].second)) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": codebook mismatch: ", names[i],
                         " '", *checks[i].second, "' is not a known label"));
      }
    }
    try {
      std::size_t used = 0;
      row.count = std::stoll(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("count");
    } catch (const std::exception&) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": count '", fields[4], "' is not an integer"));
    }
    if (row.count < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": count must be non-negative"));
    }
    for (const HistogramRow& prev : table.rows) {
      if (prev.SameCell(row)) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": duplicate cell ", row.Label()));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) {
    return absl::InvalidArgumentError("histogram has no header");
  }
  return table;
}

absl::StatusOr<HistogramTable> ReadHistogramCsv(
    const std::filesystem::path& path, const Codebook& codebook) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open histogram '", path.string(), "'"));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<HistogramTable> table =
      ParseHistogramCsv(buffer.str(), codebook);
  if (!table.ok()) {
    return absl::Status(table.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     table.status().message()));
  }
  return table;
}

absl::StatusOr<std::vector<TargetCandidate>> TargetScan(
    const HistogramTable& table, absl::Span<const HistogramTable> siblings,
    const Codebook& codebook, const ScanOptions& options) {
  const double prior =
      options.prior_p > 0 ? options.prior_p
                          : 1.0 / static_cast<double>(codebook.size());
  const BudgetAllocation census = Census2020PlSafe();
  ASSIGN_OR_RETURN(const double rho1, census.EffectiveRho("Block"));
  ASSIGN_OR_RETURN(const double rho2,
                   census.EffectiveRho("Optimized Block Group"));
  std::vector<TargetCandidate> out;
  for (const HistogramRow& row : table.rows) {
    if (!Contains(codebook.hhgq, row.hhgq) ||
        !Contains(codebook.votingage, row.votingage) ||
        !Contains(codebook.hispanic, row.hispanic) ||
        !Contains(codebook.cenrace, row.cenrace)) {
      return absl::InvalidArgumentError(
          absl::StrCat("codebook mismatch for row ", row.Label()));
    }
    if (row.count != 1) continue;
    TargetCandidate c;
    c.row = row;
    c.unique_at_level.push_back(true);
    c.flat.known_count = 0;
    c.flat.true_count = 1;
    c.flat.prior_p = prior;
    c.flat.rho1 = rho1;
    c.flat.target_label = row.Label();
    if (!siblings.empty()) {
      std::int64_t total = row.count;
      for (const HistogramTable& s : siblings) total += CountOf(s, row);
      c.unique_at_level.push_back(total == 1);
      HierScenario h;
      h.flat = c.flat;
      h.true_x2 = total;
      h.true_y1 = total - row.count;
      h.d = static_cast<std::int64_t>(siblings.size());
      h.rho2 = rho2;
      c.hier = h;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace dgrisk
