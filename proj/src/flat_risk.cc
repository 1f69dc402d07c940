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

#include "dgrisk/flat_risk.h"

#include <cmath>
#include <cstdint>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/internal/lattice.h"

namespace dgrisk {
namespace {

using internal::Logistic;
using internal::Logit;

DiscreteGaussian ReleaseDist(const FlatScenario& s, std::int64_t count) {
  return DiscreteGaussian::FromRho(count, s.rho1).value();
}

}  // namespace

absl::Status ValidateFlatScenario(const FlatScenario& s) {
  if (s.known_count < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "known_count must be non-negative, got %d", s.known_count));
  }
  if (!(s.prior_p > 0 && s.prior_p < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("prior_p must lie in (0, 1), got %g", s.prior_p));
  }
  if (!std::isfinite(s.rho1) || s.rho1 <= 0 || 0.5 / s.rho1 > 1e18) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rho1 must be positive, got %g", s.rho1));
  }
  if (s.true_count != s.known_count && s.true_count != s.known_count + 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "true_count must be known_count or known_count + 1, got %d with "
        "known_count %d",
        s.true_count, s.known_count));
  }
  if (s.block_population.has_value() && *s.block_population < 0) {
    return absl::InvalidArgumentError("block_population must be non-negative");
  }
  return absl::OkStatus();
}

double LogLikelihoodRatio(double rho, std::int64_t known_count,
                          std::int64_t x_star) {
  const double offset = static_cast<double>(x_star - known_count);
  return rho * (2 * offset - 1);
}

double PosteriorLogOdds(const FlatScenario& s, std::int64_t x1_star) {
  return Logit(s.prior_p) + LogLikelihoodRatio(s.rho1, s.known_count, x1_star);
}

double PosteriorGivenRelease(const FlatScenario& s, std::int64_t x1_star) {
  return Logistic(PosteriorLogOdds(s, x1_star));
}

double RiskRatioGivenRelease(const FlatScenario& s, std::int64_t x1_star) {
  return PosteriorGivenRelease(s, x1_star) / s.prior_p;
}

double ReleaseMass(const FlatScenario& s, std::int64_t count,
                   std::int64_t x1_star) {
  return ReleaseDist(s, count).Pmf(x1_star);
}

double MarginalPosterior(const FlatScenario& s) {
  const DiscreteGaussian dist = ReleaseDist(s, s.true_count);
  const bool present = s.true_count == s.known_count + 1;
  return internal::SumWindow(
      s.true_count, dist.Radius(), [&](std::int64_t x) {
        const double l = PosteriorLogOdds(s, x);
        const double post_true = present ? Logistic(l) : Logistic(-l);
        return post_true * dist.Pmf(x);
      });
}

double MarginalRisk(const FlatScenario& s) {
  const bool present = s.true_count == s.known_count + 1;
  return MarginalPosterior(s) / (present ? s.prior_p : 1 - s.prior_p);
}

std::int64_t DecisionThreshold(const FlatScenario& s) {
  // Log-odds are linear in the release: positive iff
  // x* > known + 1/2 - logit(p) / (2 rho). Start from the closed form and
  // settle rounding at the boundary with the posterior itself.
  const long double offset =
      0.5L - static_cast<long double>(Logit(s.prior_p)) / (2.0L * s.rho1);
  constexpr long double kLimit = 4e18L;
  const long double guess = static_cast<long double>(s.known_count) +
                            std::floor(offset) + 1;
  std::int64_t c = static_cast<std::int64_t>(
      std::fmax(-kLimit, std::fmin(kLimit, guess)));
  while (PosteriorGivenRelease(s, c - 1) > 0.5) --c;
  while (!(PosteriorGivenRelease(s, c) > 0.5)) ++c;
  return c;
}

double CorrectDecisionProb(const FlatScenario& s) {
  const std::int64_t threshold = DecisionThreshold(s);
  const DiscreteGaussian dist = ReleaseDist(s, s.true_count);
  if (s.true_count == s.known_count + 1) return dist.TailAtLeast(threshold);
  return dist.CdfAtMost(threshold - 1);
}

RiskReport ReportForRelease(const FlatScenario& s, std::int64_t x1_star) {
  RiskReport report;
  report.posterior = PosteriorGivenRelease(s, x1_star);
  report.risk_ratio = report.posterior / s.prior_p;
  report.released_value = x1_star;
  return report;
}

RiskReport MarginalReport(const FlatScenario& s) {
  RiskReport report;
  report.posterior = MarginalPosterior(s);
  report.risk_ratio = MarginalRisk(s);
  report.decision_prob = CorrectDecisionProb(s);
  return report;
}

}  // namespace dgrisk
