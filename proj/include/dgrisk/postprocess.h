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

#ifndef DGRISK_POSTPROCESS_H_
#define DGRISK_POSTPROCESS_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dgrisk/flat_risk.h"

namespace dgrisk {

// Rounding of the least-squares solution once it is inside [0, x2_tilde].
enum class RoundingRule { kHalfAwayFromZero, kHalfToEven };

absl::StatusOr<RoundingRule> ParseRoundingRule(std::string_view name);
std::string_view RoundingRuleName(RoundingRule rule);

// A block count post-processed so that it and its d siblings add up to a
// fixed second-level count x2_tilde. The adversary knows the true second-level
// count x2, so the sibling total is x2 - k1 under hypothesis k1.
struct PostProcessScenario {
  FlatScenario flat;
  std::int64_t d = 27;
  std::int64_t x2 = 1;
  std::int64_t x2_tilde = 1;
  RoundingRule rounding = RoundingRule::kHalfAwayFromZero;
};

absl::Status ValidatePostProcessScenario(const PostProcessScenario& s);

// Least-squares block value (d x1* + x2_tilde - y1*) / (d + 1), clamped to
// [0, x2_tilde] and rounded. Evaluated in exact integer arithmetic.
std::int64_t PostprocessBlock(
    std::int64_t x1_star, std::int64_t y1_star, std::int64_t x2_tilde,
    std::int64_t d, RoundingRule rounding = RoundingRule::kHalfAwayFromZero);

// P[post-processed block = v | X1 = k1] for v = 0..x2_tilde, using the single
// discrete Gaussian DG(x2 - k1, d / (2 rho1)) for the sibling noise.
absl::StatusOr<std::vector<double>> PostprocessedLikelihoodTable(
    const PostProcessScenario& s, std::int64_t k1);

absl::StatusOr<double> PostprocessedLikelihood(const PostProcessScenario& s,
                                               std::int64_t x1_tilde,
                                               std::int64_t k1);

// Expected posterior of the true hypothesis given only the post-processed
// block value.
absl::StatusOr<double> PostprocessedMarginalPosterior(
    const PostProcessScenario& s);

// PostprocessedMarginalPosterior over the prior of the true hypothesis.
absl::StatusOr<double> PostprocessedMarginalRisk(const PostProcessScenario& s);

}  // namespace dgrisk

#endif  // DGRISK_POSTPROCESS_H_
