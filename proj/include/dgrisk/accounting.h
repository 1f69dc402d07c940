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

#ifndef DGRISK_ACCOUNTING_H_
#define DGRISK_ACCOUNTING_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "boost/rational.hpp"

namespace dgrisk {

using Fraction = boost::rational<std::int64_t>;

struct LevelAllocation {
  std::string level_name;
  Fraction level_fraction;
  Fraction query_fraction;
};

// rho budget split across geographic levels for one query. Immutable once
// created.
class BudgetAllocation {
 public:
  // Fails unless global_rho > 0, every fraction lies in (0, 1], level names
  // are distinct and the level fractions sum to at most 1.
  static absl::StatusOr<BudgetAllocation> Create(
      double global_rho, std::vector<LevelAllocation> levels);

  double global_rho() const { return global_rho_; }
  const std::vector<LevelAllocation>& levels() const { return levels_; }

  // global_rho * level_fraction * query_fraction; the fraction product is
  // formed exactly before conversion.
  absl::StatusOr<double> EffectiveRho(std::string_view level_name) const;

 private:
  BudgetAllocation(double global_rho, std::vector<LevelAllocation> levels)
      : global_rho_(global_rho), levels_(std::move(levels)) {}

  double global_rho_;
  std::vector<LevelAllocation> levels_;
};

// Name of the bundled 2020 census persons-file allocation for the GVHR query.
inline constexpr std::string_view kCensus2020PlSafe = "census2020-plsafe";

// Levels from the bottom of the hierarchy up: Block, Optimized Block Group,
// Tract, County, State, United States. The United States query fraction
// 189/241 is kept exactly as allocated even though its denominator does not
// follow the 4,099/4,097/2,051 pattern of the other rows.
BudgetAllocation Census2020PlSafe();

absl::StatusOr<BudgetAllocation> BudgetPresetByName(std::string_view name);

// epsilon = rho + 2 sqrt(rho ln(1 / delta)) for rho-zCDP to (epsilon,
// delta)-DP.
absl::StatusOr<double> ZcdpToApproxDp(double rho, double delta);

}  // namespace dgrisk

#endif  // DGRISK_ACCOUNTING_H_
