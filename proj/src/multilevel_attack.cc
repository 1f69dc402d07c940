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

#include "dgrisk/multilevel_attack.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "absl/types/span.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/internal/lattice.h"
#include "dgrisk/parallel.h"
#include "dgrisk/random.h"
#include "dgrisk/status_macros.h"

namespace dgrisk {
namespace {

using internal::Logistic;
using internal::Logit;

constexpr std::int64_t kDrawsPerChunk = 1 << 14;

absl::Status ValidateRhos(absl::Span<const double> rhos) {
  if (rhos.empty()) return absl::InvalidArgumentError("no levels given");
  for (size_t i = 0; i < rhos.size(); ++i) {
    if (!std::isfinite(rhos[i]) || rhos[i] <= 0 || 0.5 / rhos[i] > 1e18) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "rho for level %d must be positive, got %g", i + 1, rhos[i]));
    }
  }
  return absl::OkStatus();
}

// Posterior log-odds from the first levels.size() releases.
double LogOdds(const FlatScenario& base, absl::Span<const double> rhos,
               absl::Span<const std::int64_t> releases) {
  double l = Logit(base.prior_p);
  for (size_t i = 0; i < rhos.size(); ++i) {
    l += LogLikelihoodRatio(rhos[i], base.known_count, releases[i]);
  }
  return l;
}

double PosteriorOfTruth(const FlatScenario& base, double log_odds) {
  return base.true_count == base.known_count + 1 ? Logistic(log_odds)
                                                 : Logistic(-log_odds);
}

struct Moments {
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

}  // namespace

absl::Status ValidateMultiLevelScenario(const MultiLevelScenario& s) {
  RETURN_IF_ERROR(ValidateFlatScenario(s.flat));
  RETURN_IF_ERROR(ValidateRhos(s.level_rhos));
  if (s.level_rhos.front() != s.flat.rho1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "level 1 rho %g differs from the scenario's rho1 %g",
        s.level_rhos.front(), s.flat.rho1));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> MultilevelPosterior(
    const MultiLevelScenario& s, absl::Span<const std::int64_t> releases) {
  RETURN_IF_ERROR(ValidateMultiLevelScenario(s));
  if (releases.size() != s.level_rhos.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected %d releases, one per level, got %d", s.level_rhos.size(),
        releases.size()));
  }
  return Logistic(LogOdds(s.flat, s.level_rhos, releases));
}

absl::StatusOr<std::vector<MultilevelPoint>> MultilevelMarginalCurve(
    const FlatScenario& base, absl::Span<const double> level_rhos,
    int ell_max, const MultilevelOptions& options) {
  RETURN_IF_ERROR(ValidateFlatScenario(base));
  RETURN_IF_ERROR(ValidateRhos(level_rhos));
  if (ell_max < 1 || static_cast<size_t>(ell_max) > level_rhos.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "ell_max must lie in [1, %d], got %d", level_rhos.size(), ell_max));
  }
  if (ell_max >= 3 && options.mc_draws < 2) {
    return absl::InvalidArgumentError("mc_draws must be at least 2");
  }
  FlatScenario level1 = base;
  level1.rho1 = level_rhos[0];
  const double prior_true = base.true_count == base.known_count + 1
                                ? base.prior_p
                                : 1 - base.prior_p;

  std::vector<MultilevelPoint> curve;
  {
    MultilevelPoint point;
    point.levels = 1;
    point.marginal_posterior = MarginalPosterior(level1);
    point.risk = point.marginal_posterior / prior_true;
    curve.push_back(point);
  }
  if (ell_max >= 2) {
    const DiscreteGaussian d1 =
        DiscreteGaussian::FromRho(base.true_count, level_rhos[0]).value();
    const DiscreteGaussian d2 =
        DiscreteGaussian::FromRho(base.true_count, level_rhos[1]).value();
    const double prior_logit = Logit(base.prior_p);
    const double total = internal::SumWindow(
        base.true_count, d1.Radius(), [&](std::int64_t x1) {
          const double l1 = prior_logit + LogLikelihoodRatio(
                                              level_rhos[0], base.known_count,
                                              x1);
          const double inner = internal::SumWindow(
              base.true_count, d2.Radius(), [&](std::int64_t x2) {
                const double l = l1 + LogLikelihoodRatio(level_rhos[1],
                                                         base.known_count, x2);
                return PosteriorOfTruth(base, l) * d2.Pmf(x2);
              });
          return inner * d1.Pmf(x1);
        });
    MultilevelPoint point;
    point.levels = 2;
    point.marginal_posterior = total;
    point.risk = total / prior_true;
    curve.push_back(point);
  }
  if (ell_max >= 3) {
    std::vector<exact::DiscreteGaussianNoise> noise;
    for (int i = 0; i < ell_max; ++i) noise.emplace_back(0.5 / level_rhos[i]);
    const std::int64_t n = options.mc_draws;
    const std::int64_t chunks = (n + kDrawsPerChunk - 1) / kDrawsPerChunk;
    std::vector<Moments> parts(chunks);
    ParallelFor(chunks, options.workers, [&](std::int64_t c) {
      BitGen gen = MakeBitGen(options.seed, static_cast<std::uint64_t>(c));
      Moments& m = parts[c];
      m.sum.assign(ell_max + 1, 0);
      m.sum_sq.assign(ell_max + 1, 0);
      const std::int64_t begin = c * kDrawsPerChunk;
      const std::int64_t end = std::min(n, begin + kDrawsPerChunk);
      for (std::int64_t draw = begin; draw < end; ++draw) {
        double l = Logit(base.prior_p);
        for (int i = 0; i < ell_max; ++i) {
          const std::int64_t x = base.true_count + noise[i].Sample(gen);
          l += LogLikelihoodRatio(level_rhos[i], base.known_count, x);
          if (i + 1 >= 3) {
            const double post = PosteriorOfTruth(base, l);
            m.sum[i + 1] += post;
            m.sum_sq[i + 1] += post * post;
          }
        }
      }
    });
    for (int ell = 3; ell <= ell_max; ++ell) {
      double sum = 0, sum_sq = 0;
      for (const Moments& m : parts) {
        sum += m.sum[ell];
        sum_sq += m.sum_sq[ell];
      }
      const double nd = static_cast<double>(n);
      const double mean = sum / nd;
      const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1));
      MultilevelPoint point;
      point.levels = ell;
      point.marginal_posterior = mean;
      point.marginal_posterior_se = std::sqrt(var / nd);
      point.risk = mean / prior_true;
      point.risk_se = point.marginal_posterior_se / prior_true;
      point.exact = false;
      curve.push_back(point);
    }
  }
  return curve;
}

}  // namespace dgrisk
