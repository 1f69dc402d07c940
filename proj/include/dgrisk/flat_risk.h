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

#ifndef DGRISK_FLAT_RISK_H_
#define DGRISK_FLAT_RISK_H_

#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/status.h"

namespace dgrisk {

// One-level attack: the adversary knows the count of everyone but the target
// (known_count) and weighs whether the target adds one more.
struct FlatScenario {
  std::int64_t known_count = 0;
  // Prior probability that the count is known_count + 1.
  double prior_p = 0.5;
  double rho1 = 0.099;
  // Must be known_count or known_count + 1.
  std::int64_t true_count = 1;
  // Metadata only.
  std::string target_label;
  std::optional<std::int64_t> block_population;
};

absl::Status ValidateFlatScenario(const FlatScenario& s);

struct RiskReport {
  double posterior = 0;
  double risk_ratio = 0;
  std::optional<double> decision_prob;
  std::optional<std::int64_t> released_value;
};

// The functions below assume a scenario that passed ValidateFlatScenario.

// log P[x* | known + 1] - log P[x* | known] = rho (2 (x* - known) - 1).
double LogLikelihoodRatio(double rho, std::int64_t known_count,
                          std::int64_t x_star);

// Posterior log-odds of known_count + 1 after observing x1_star.
double PosteriorLogOdds(const FlatScenario& s, std::int64_t x1_star);

// P[X1 = known_count + 1 | X1* = x1_star].
double PosteriorGivenRelease(const FlatScenario& s, std::int64_t x1_star);

// PosteriorGivenRelease / prior_p.
double RiskRatioGivenRelease(const FlatScenario& s, std::int64_t x1_star);

// P[X1* = x1_star | X1 = count].
double ReleaseMass(const FlatScenario& s, std::int64_t count,
                   std::int64_t x1_star);

// Expected posterior probability of the true hypothesis, averaging over
// releases drawn around true_count.
double MarginalPosterior(const FlatScenario& s);

// MarginalPosterior divided by the prior of the true hypothesis (prior_p when
// true_count = known_count + 1).
double MarginalRisk(const FlatScenario& s);

// Smallest release whose posterior exceeds 1/2. Ties go to known_count.
std::int64_t DecisionThreshold(const FlatScenario& s);

// Probability that the 0-1 loss decision equals true_count.
double CorrectDecisionProb(const FlatScenario& s);

RiskReport ReportForRelease(const FlatScenario& s, std::int64_t x1_star);
RiskReport MarginalReport(const FlatScenario& s);

}  // namespace dgrisk

#endif  // DGRISK_FLAT_RISK_H_
