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

#include "dgrisk/composition.h"

#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/internal/lattice.h"
#include "dgrisk/status_macros.h"

namespace dgrisk {

absl::Status ValidateReleaseTrace(const ReleaseTrace& trace) {
  RETURN_IF_ERROR(ValidateFlatScenario(trace.scenario));
  if (trace.releases.empty()) {
    return absl::InvalidArgumentError("release trace is empty");
  }
  for (size_t i = 0; i < trace.releases.size(); ++i) {
    const double rho = trace.releases[i].rho;
    if (!std::isfinite(rho) || rho <= 0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "release %d: rho must be positive, got %g", i + 1, rho));
    }
  }
  return absl::OkStatus();
}

std::vector<double> SequentialPosterior(const ReleaseTrace& trace) {
  // Bayes' rule in odds form: the previous posterior odds are this step's
  // prior odds, and the mechanisms are independent given the count.
  std::vector<double> posteriors;
  posteriors.reserve(trace.releases.size());
  double log_odds = internal::Logit(trace.scenario.prior_p);
  for (const Release& r : trace.releases) {
    log_odds +=
        LogLikelihoodRatio(r.rho, trace.scenario.known_count, r.x1_star);
    posteriors.push_back(internal::Logistic(log_odds));
  }
  return posteriors;
}

ComposedRisk ComposeRisk(const ReleaseTrace& trace) {
  ComposedRisk out;
  double prior = trace.scenario.prior_p;
  for (double posterior : SequentialPosterior(trace)) {
    const double step = posterior / prior;
    out.per_step_risks.push_back(step);
    out.total_risk *= step;
    prior = posterior;
  }
  return out;
}

}  // namespace dgrisk
