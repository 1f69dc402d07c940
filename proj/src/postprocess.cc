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

#include "dgrisk/postprocess.h"

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/status_macros.h"

namespace dgrisk {

absl::StatusOr<RoundingRule> ParseRoundingRule(std::string_view name) {
  if (name == "half_away_from_zero") return RoundingRule::kHalfAwayFromZero;
  if (name == "half_even") return RoundingRule::kHalfToEven;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown rounding rule '", std::string(name),
      "'; expected half_away_from_zero or half_even"));
}

std::string_view RoundingRuleName(RoundingRule rule) {
  return rule == RoundingRule::kHalfToEven ? "half_even"
                                           : "half_away_from_zero";
}

absl::Status ValidatePostProcessScenario(const PostProcessScenario& s) {
  RETURN_IF_ERROR(ValidateFlatScenario(s.flat));
  if (s.d < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("d must be at least 1, got %d", s.d));
  }
  if (s.x2_tilde < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "x2_tilde must be non-negative, got %d", s.x2_tilde));
  }
  if (s.x2 < s.flat.known_count + 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "x2 must be at least known_count + 1 = %d, got %d",
        s.flat.known_count + 1, s.x2));
  }
  return absl::OkStatus();
}

std::int64_t PostprocessBlock(std::int64_t x1_star, std::int64_t y1_star,
                              std::int64_t x2_tilde, std::int64_t d,
                              RoundingRule rounding) {
  const __int128 num = static_cast<__int128>(d) * x1_star + x2_tilde - y1_star;
  const __int128 den = static_cast<__int128>(d) + 1;
  if (num < 0) return 0;
  if (num > static_cast<__int128>(x2_tilde) * den) return x2_tilde;
  __int128 q = num / den;
  const __int128 twice_rem = 2 * (num - q * den);
  if (twice_rem > den) {
    ++q;
  } else if (twice_rem == den) {
    // Ties only arise for non-negative values here, so away from zero is up.
    if (rounding == RoundingRule::kHalfAwayFromZero || (q & 1) == 1) ++q;
  }
  return static_cast<std::int64_t>(q);
}

absl::StatusOr<std::vector<double>> PostprocessedLikelihoodTable(
    const PostProcessScenario& s, std::int64_t k1) {
  RETURN_IF_ERROR(ValidatePostProcessScenario(s));
  if (k1 != s.flat.known_count && k1 != s.flat.known_count + 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "k1 must be known_count or known_count + 1, got %d", k1));
  }
  ASSIGN_OR_RETURN(const DiscreteGaussian block,
                   DiscreteGaussian::FromRho(k1, s.flat.rho1));
  ASSIGN_OR_RETURN(
      const DiscreteGaussian siblings,
      DiscreteGaussian::FromScale(s.x2 - k1, s.d * block.scale()));
  const std::int64_t y_lo = siblings.location() - siblings.Radius();
  const std::int64_t y_hi = siblings.location() + siblings.Radius();
  std::vector<double> y_mass(y_hi - y_lo + 1);
  for (std::int64_t y = y_lo; y <= y_hi; ++y) {
    y_mass[y - y_lo] = siblings.Pmf(y);
  }
  std::vector<double> table(s.x2_tilde + 1, 0.0);
  const std::int64_t x_lo = k1 - block.Radius();
  const std::int64_t x_hi = k1 + block.Radius();
  std::vector<double> row(s.x2_tilde + 1);
  for (std::int64_t x = x_lo; x <= x_hi; ++x) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::int64_t y = y_lo; y <= y_hi; ++y) {
      row[PostprocessBlock(x, y, s.x2_tilde, s.d, s.rounding)] +=
          y_mass[y - y_lo];
    }
    const double px = block.Pmf(x);
    for (size_t v = 0; v < row.size(); ++v) table[v] += px * row[v];
  }
  return table;
}

absl::StatusOr<double> PostprocessedLikelihood(const PostProcessScenario& s,
                                               std::int64_t x1_tilde,
                                               std::int64_t k1) {
  if (x1_tilde < 0 || x1_tilde > s.x2_tilde) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "post-processed value %d outside [0, %d]", x1_tilde, s.x2_tilde));
  }
  ASSIGN_OR_RETURN(const std::vector<double> table,
                   PostprocessedLikelihoodTable(s, k1));
  return table[x1_tilde];
}

absl::StatusOr<double> PostprocessedMarginalPosterior(
    const PostProcessScenario& s) {
  const std::int64_t known = s.flat.known_count;
  ASSIGN_OR_RETURN(const std::vector<double> absent,
                   PostprocessedLikelihoodTable(s, known));
  ASSIGN_OR_RETURN(const std::vector<double> present,
                   PostprocessedLikelihoodTable(s, known + 1));
  const bool truth_present = s.flat.true_count == known + 1;
  const std::vector<double>& truth = truth_present ? present : absent;
  const double p = s.flat.prior_p;
  double total = 0;
  for (size_t v = 0; v < truth.size(); ++v) {
    if (truth[v] == 0) continue;
    const double w1 = p * present[v];
    const double w0 = (1 - p) * absent[v];
    const double post_true = (truth_present ? w1 : w0) / (w1 + w0);
    total += post_true * truth[v];
  }
  return total;
}

absl::StatusOr<double> PostprocessedMarginalRisk(
    const PostProcessScenario& s) {
  ASSIGN_OR_RETURN(const double marginal, PostprocessedMarginalPosterior(s));
  const bool truth_present = s.flat.true_count == s.flat.known_count + 1;
  return marginal / (truth_present ? s.flat.prior_p : 1 - s.flat.prior_p);
}

}  // namespace dgrisk
