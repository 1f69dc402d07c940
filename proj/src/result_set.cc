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

#include "dgrisk/result_set.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

#ifndef DGRISK_VERSION_STRING
#define DGRISK_VERSION_STRING "0.1.0"
#endif

namespace dgrisk {
namespace {

using nlohmann::json;

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, result.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string Quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record starting at `pos`; advances `pos` past the record.
absl::StatusOr<std::vector<std::pair<std::string, bool>>> ReadRecord(
    std::string_view text, std::size_t& pos) {
  std::vector<std::pair<std::string, bool>> fields;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  while (pos <= text.size()) {
    const char c = pos < text.size() ? text[pos] : '\n';
    ++pos;
    if (in_quotes) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (pos > text.size()) {
          return absl::InvalidArgumentError("unterminated quoted field");
        }
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !quoted) {
      in_quotes = quoted = true;
    } else if (c == ',') {
      fields.emplace_back(std::move(field), quoted);
      field.clear();
      quoted = false;
    } else if (c == '\n') {
      fields.emplace_back(std::move(field), quoted);
      return fields;
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.emplace_back(std::move(field), quoted);
  return fields;
}

absl::StatusOr<Cell> ParseUnquoted(const std::string& s) {
  if (s.empty()) return Cell{};
  if (s == "nan") return Cell{std::nan("")};
  if (s == "inf") return Cell{HUGE_VAL};
  if (s == "-inf") return Cell{-HUGE_VAL};
  const bool is_double = s.find_first_of(".eE") != std::string::npos;
  if (is_double) {
    double v;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return Cell{v};
  } else {
    std::int64_t v;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return Cell{v};
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unquoted field '", s, "' is not a number"));
}

json CellToJson(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return FormatDouble(*d);
    return *d;
  }
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return nullptr;
}

}  // namespace

std::string FormatCell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return absl::StrCat(*i);
  if (const auto* d = std::get_if<double>(&cell)) return FormatDouble(*d);
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return "";
}

std::optional<double> CellAsDouble(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    return static_cast<double>(*i);
  }
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return std::nullopt;
}

int ResultSet::ColumnIndex(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

absl::Status ResultSet::Validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size()) {
      return absl::InternalError(absl::StrFormat(
          "row %d has %d cells for %d columns", r, rows[r].size(),
          columns.size()));
    }
  }
  for (const std::string& mc : mc_columns) {
    if (ColumnIndex(mc) < 0) {
      return absl::InternalError(absl::StrCat("missing MC column ", mc));
    }
    if (ColumnIndex(mc + "_se") < 0) {
      return absl::InternalError(
          absl::StrCat("MC column ", mc, " has no standard-error column"));
    }
  }
  return absl::OkStatus();
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ToolVersion() { return DGRISK_VERSION_STRING; }

std::string ToCsv(const ResultSet& results) {
  std::string out;
  const ResultMetadata& m = results.metadata;
  absl::StrAppend(&out, "# version: ", m.version, "\n");
  absl::StrAppend(&out, "# seed: ", m.seed, "\n");
  absl::StrAppend(&out, "# timestamp: ", m.timestamp, "\n");
  absl::StrAppend(&out, "# kind: ", m.kind, "\n");
  absl::StrAppend(&out, "# name: ", m.name, "\n");
  absl::StrAppend(&out, "# mc_columns: ", absl::StrJoin(results.mc_columns, ";"),
                  "\n");
  std::vector<std::string> header;
  for (const std::string& c : results.columns) header.push_back(Quote(c));
  absl::StrAppend(&out, absl::StrJoin(header, ","), "\n");
  for (const auto& row : results.rows) {
    std::vector<std::string> fields;
    for (const Cell& cell : row) {
      if (const auto* s = std::get_if<std::string>(&cell)) {
        fields.push_back(Quote(*s));
      } else {
        fields.push_back(FormatCell(cell));
      }
    }
    absl::StrAppend(&out, absl::StrJoin(fields, ","), "\n");
  }
  return out;
}

absl::StatusOr<ResultSet> ResultSetFromCsv(std::string_view text) {
  ResultSet results;
  std::size_t pos = 0;
  bool header_done = false;
  int record = 0;
  while (pos < text.size()) {
    if (!header_done && text[pos] == '#') {
      const std::size_t end = text.find('\n', pos);
      std::string_view line = text.substr(
          pos, end == std::string_view::npos ? std::string_view::npos
                                             : end - pos);
      pos = end == std::string_view::npos ? text.size() : end + 1;
      const std::size_t colon = line.find(": ");
      if (colon == std::string_view::npos) continue;
      const std::string key(line.substr(2, colon - 2));
      const std::string value(line.substr(colon + 2));
      ResultMetadata& m = results.metadata;
      if (key == "version") m.version = value;
      if (key == "seed") m.seed = std::stoull(value);
      if (key == "timestamp") m.timestamp = value;
      if (key == "kind") m.kind = value;
      if (key == "name") m.name = value;
      if (key == "mc_columns" && !value.empty()) {
        results.mc_columns = absl::StrSplit(value, ';');
      }
      continue;
    }
    ++record;
    auto fields = ReadRecord(text, pos);
    if (!fields.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "CSV record ", record, ": ", fields.status().message()));
    }
    if (!header_done) {
      for (auto& [name, quoted] : *fields) results.columns.push_back(name);
      header_done = true;
      continue;
    }
    std::vector<Cell> row;
    for (auto& [value, quoted] : *fields) {
      if (quoted) {
        row.emplace_back(value);
        continue;
      }
      absl::StatusOr<Cell> cell = ParseUnquoted(value);
      if (!cell.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "CSV record ", record, ": ", cell.status().message()));
      }
      row.push_back(*cell);
    }
    results.rows.push_back(std::move(row));
  }
  if (absl::Status s = results.Validate(); !s.ok()) {
    return absl::InvalidArgumentError(s.message());
  }
  return results;
}

std::string ToJson(const ResultSet& results) {
  json j;
  const ResultMetadata& m = results.metadata;
  j["metadata"] = {{"version", m.version},
                   {"seed", m.seed},
                   {"timestamp", m.timestamp},
                   {"kind", m.kind},
                   {"name", m.name}};
  j["columns"] = results.columns;
  j["mc_columns"] = results.mc_columns;
  json rows = json::array();
  for (const auto& row : results.rows) {
    json r = json::array();
    for (const Cell& cell : row) r.push_back(CellToJson(cell));
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

absl::StatusOr<ResultSet> ResultSetFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("result JSON parse error: ", e.what()));
  }
  ResultSet results;
  try {
    const json& m = j.at("metadata");
    results.metadata.version = m.at("version").get<std::string>();
    results.metadata.seed = m.at("seed").get<std::uint64_t>();
    results.metadata.timestamp = m.at("timestamp").get<std::string>();
    results.metadata.kind = m.at("kind").get<std::string>();
    results.metadata.name = m.at("name").get<std::string>();
    results.columns = j.at("columns").get<std::vector<std::string>>();
    results.mc_columns = j.at("mc_columns").get<std::vector<std::string>>();
    for (const json& r : j.at("rows")) {
      std::vector<Cell> row;
      for (const json& v : r) {
        if (v.is_null()) {
          row.emplace_back();
        } else if (v.is_number_float()) {
          row.emplace_back(v.get<double>());
        } else if (v.is_number()) {
          row.emplace_back(v.get<std::int64_t>());
        } else if (v.is_string()) {
          const std::string s = v.get<std::string>();
          // Non-finite doubles are stored as strings.
          if (s == "nan" || s == "inf" || s == "-inf") {
            row.push_back(ParseUnquoted(s).value());
          } else {
            row.emplace_back(s);
          }
        } else {
          return absl::InvalidArgumentError("unsupported cell type");
        }
      }
      results.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed result JSON: ", e.what()));
  }
  if (absl::Status s = results.Validate(); !s.ok()) {
    return absl::InvalidArgumentError(s.message());
  }
  return results;
}

std::string RowsFingerprint(const ResultSet& results) {
  ResultSet copy = results;
  copy.metadata.timestamp.clear();
  return ToCsv(copy);
}

}  // namespace dgrisk
