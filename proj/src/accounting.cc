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

#include "dgrisk/accounting.h"

#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "boost/rational.hpp"

namespace dgrisk {
namespace {

bool InUnitInterval(const Fraction& f) {
  return f > Fraction(0) && f <= Fraction(1);
}

std::string ToString(const Fraction& f) {
  return absl::StrCat(f.numerator(), "/", f.denominator());
}

}  // namespace

absl::StatusOr<BudgetAllocation> BudgetAllocation::Create(
    double global_rho, std::vector<LevelAllocation> levels) {
  if (!std::isfinite(global_rho) || global_rho <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("global rho must be positive, got %g", global_rho));
  }
  if (levels.empty()) {
    return absl::InvalidArgumentError("allocation has no levels");
  }
  std::set<std::string> names;
  Fraction total(0);
  for (const LevelAllocation& level : levels) {
    if (!names.insert(level.level_name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate level name '", level.level_name, "'"));
    }
    if (!InUnitInterval(level.level_fraction) ||
        !InUnitInterval(level.query_fraction)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "fractions for level '", level.level_name, "' must lie in (0, 1], got ",
          ToString(level.level_fraction), " and ",
          ToString(level.query_fraction)));
    }
    total += level.level_fraction;
  }
  if (total > Fraction(1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("level fractions sum to ", ToString(total), " > 1"));
  }
  return BudgetAllocation(global_rho, std::move(levels));
}

absl::StatusOr<double> BudgetAllocation::EffectiveRho(
    std::string_view level_name) const {
  for (const LevelAllocation& level : levels_) {
    if (level.level_name == level_name) {
      const Fraction product = level.level_fraction * level.query_fraction;
      return global_rho_ * boost::rational_cast<double>(product);
    }
  }
  return absl::NotFoundError(
      absl::StrCat("unknown level '", std::string(level_name), "' in allocation"));
}

BudgetAllocation Census2020PlSafe() {
  std::vector<LevelAllocation> levels = {
      {"Block", Fraction(165, 4099), Fraction(3945, 4097)},
      {"Optimized Block Group", Fraction(1256, 4099), Fraction(1288, 4099)},
      {"Tract", Fraction(687, 4099), Fraction(241, 2051)},
      {"County", Fraction(447, 4099), Fraction(754, 4097)},
      {"State", Fraction(1440, 4099), Fraction(230, 4097)},
      {"United States", Fraction(104, 4099), Fraction(189, 241)},
  };
  return BudgetAllocation::Create(2.56, std::move(levels)).value();
}

absl::StatusOr<BudgetAllocation> BudgetPresetByName(std::string_view name) {
  if (name == kCensus2020PlSafe) return Census2020PlSafe();
  return absl::NotFoundError(absl::StrCat("unknown budget preset '", std::string(name),
                                          "'; known: ",
                                          std::string(kCensus2020PlSafe)));
}

absl::StatusOr<double> ZcdpToApproxDp(double rho, double delta) {
  if (!std::isfinite(rho) || rho <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rho must be positive, got %g", rho));
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  return rho + 2 * std::sqrt(rho * std::log(1 / delta));
}

}  // namespace dgrisk
