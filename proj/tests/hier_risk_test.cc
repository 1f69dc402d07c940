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

#include "dgrisk/hier_risk.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include "absl/status/status.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/exact_sampling.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/random.h"
#include "test_util.h"

namespace dgrisk {
namespace {

using ::dgrisk::testing::StatusIs;

constexpr double kRho1 = 0.099;
constexpr double kRho2 = 0.2465;
const NoisyData kTableData{2, 1, -1};

HierScenario Census(X1Update rule = X1Update::kKernelOnly) {
  HierScenario s;
  s.flat.known_count = 0;
  s.flat.prior_p = 0.5;
  s.flat.rho1 = kRho1;
  s.flat.true_count = 1;
  s.true_x2 = 1;
  s.true_y1 = 0;
  s.d = 27;
  s.rho2 = kRho2;
  s.x1_update = rule;
  return s;
}

// Support of X2 | X1 = k1 under the prior; hi = -1 marks "unbounded".
bool InPriorSupport(const PriorX2& prior, std::int64_t k1, std::int64_t k2) {
  if (k2 < k1) return false;
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) return k2 <= t->max;
  if (const auto* pm = std::get_if<PointMass>(&prior)) return k2 == pm->value;
  return true;
}

long double LogPriorX2Given(const PriorX2& prior, std::int64_t k1) {
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) {
    return -std::log(static_cast<long double>(t->max - k1 + 1));
  }
  return 0;
}

bool Feasible(const PriorX2& prior, std::int64_t k1) {
  for (std::int64_t k2 = k1; k2 <= k1 + 1000; ++k2) {
    if (InPriorSupport(prior, k1, k2)) return true;
  }
  return false;
}

// Generous k2 window for brute-force sums.
std::array<std::int64_t, 2> Window(const HierScenario& s, const NoisyData& d) {
  const std::int64_t lo =
      std::min({d.x2_star, d.y1_star + s.flat.known_count}) - 400;
  const std::int64_t hi =
      std::max({d.x2_star, d.y1_star + s.flat.known_count + 1}) + 400;
  return {std::max(lo, s.flat.known_count), hi};
}

struct Oracle {
  long double p_x1;
  std::map<std::int64_t, long double> x2;
};

// Brute-force enumeration of the joint density of (X1, X2) given D.
Oracle JointOracle(const HierScenario& s, const NoisyData& d) {
  const std::int64_t k0 = s.flat.known_count;
  const long double r1 = s.flat.rho1, r2 = s.rho2,
                    sib = r1 / static_cast<long double>(s.d);
  const auto [lo, hi] = Window(s, d);
  std::vector<std::array<long double, 3>> cells;
  long double max_log = -INFINITY;
  for (std::int64_t k1 = k0; k1 <= k0 + 1; ++k1) {
    const long double prior =
        k1 == k0 + 1 ? s.flat.prior_p : 1.0L - s.flat.prior_p;
    for (std::int64_t k2 = std::max(lo, k1); k2 <= hi; ++k2) {
      if (!InPriorSupport(s.prior_x2, k1, k2)) continue;
      const long double a = d.x1_star - k1, b = d.x2_star - k2,
                        c = d.y1_star - (k2 - k1);
      const long double lw = std::log(prior) + LogPriorX2Given(s.prior_x2, k1) -
                             r1 * a * a - r2 * b * b - sib * c * c;
      cells.push_back({static_cast<long double>(k1),
                       static_cast<long double>(k2), lw});
      max_log = std::max(max_log, lw);
    }
  }
  Oracle out{0, {}};
  long double total = 0;
  for (const auto& c : cells) {
    const long double w = std::exp(c[2] - max_log);
    total += w;
    if (c[0] == k0 + 1) out.p_x1 += w;
    out.x2[static_cast<std::int64_t>(c[1])] += w;
  }
  out.p_x1 /= total;
  for (auto& [k, w] : out.x2) w /= total;
  return out;
}

// The kernel-only X1 step, written from the product of the x1* and y1*
// likelihood terms rather than from the completed square.
long double KernelOnlyX1(const HierScenario& s, const NoisyData& d,
                         std::int64_t k2) {
  const std::int64_t k0 = s.flat.known_count;
  long double lw[2];
  for (int i = 0; i < 2; ++i) {
    const std::int64_t k1 = k0 + i;
    if (!Feasible(s.prior_x2, k1)) {
      lw[i] = -INFINITY;
      continue;
    }
    const long double prior =
        i == 1 ? s.flat.prior_p : 1.0L - s.flat.prior_p;
    const long double a = d.x1_star - k1, c = d.y1_star - (k2 - k1);
    lw[i] = std::log(prior) - s.flat.rho1 * a * a -
            s.flat.rho1 / s.d * c * c;
  }
  if (lw[1] == -INFINITY) return 0;
  if (lw[0] == -INFINITY) return 1;
  return 1 / (1 + std::exp(lw[0] - lw[1]));
}

// X2 | X1 = k1, D as a normalized vector on the window.
std::map<std::int64_t, long double> X2Conditional(const HierScenario& s,
                                                  const NoisyData& d,
                                                  std::int64_t k1) {
  const auto [lo, hi] = Window(s, d);
  std::map<std::int64_t, long double> out;
  long double max_log = -INFINITY;
  for (std::int64_t k2 = std::max(lo, k1); k2 <= hi; ++k2) {
    if (!InPriorSupport(s.prior_x2, k1, k2)) continue;
    const long double b = d.x2_star - k2, c = d.y1_star - (k2 - k1);
    const long double lw =
        -s.rho2 * b * b - s.flat.rho1 / s.d * c * c;
    out[k2] = lw;
    max_log = std::max(max_log, lw);
  }
  long double total = 0;
  for (auto& [k, w] : out) total += (w = std::exp(w - max_log));
  for (auto& [k, w] : out) w /= total;
  return out;
}

// Stationary law of the kernel-only Gibbs chain: build the 2x2 transition
// matrix of its X1 component and iterate it to convergence.
Oracle KernelOnlyOracle(const HierScenario& s, const NoisyData& d) {
  const std::int64_t k0 = s.flat.known_count;
  std::map<std::int64_t, long double> cond[2];
  long double move[2][2] = {{1, 0}, {0, 1}};
  for (int i = 0; i < 2; ++i) {
    if (!Feasible(s.prior_x2, k0 + i)) continue;
    cond[i] = X2Conditional(s, d, k0 + i);
    long double to_one = 0;
    for (const auto& [k2, w] : cond[i]) to_one += w * KernelOnlyX1(s, d, k2);
    move[i][1] = to_one;
    move[i][0] = 1 - to_one;
  }
  long double pi[2] = {0.5, 0.5};
  if (!Feasible(s.prior_x2, k0)) pi[0] = 0, pi[1] = 1;
  if (!Feasible(s.prior_x2, k0 + 1)) pi[0] = 1, pi[1] = 0;
  for (int it = 0; it < 200000; ++it) {
    const long double n0 = pi[0] * move[0][0] + pi[1] * move[1][0];
    const long double n1 = pi[0] * move[0][1] + pi[1] * move[1][1];
    const bool done = std::fabs(n1 - pi[1]) < 1e-19L;
    pi[0] = n0, pi[1] = n1;
    if (done) break;
  }
  Oracle out{pi[1], {}};
  for (int i = 0; i < 2; ++i) {
    for (const auto& [k2, w] : cond[i]) out.x2[k2] += pi[i] * w;
  }
  return out;
}

double X2Prob(const ExactPosterior& post, std::int64_t k2) {
  const auto it = post.x2_marginal.find(k2);
  return it == post.x2_marginal.end() ? 0 : it->second;
}

TEST(HierRiskTest, ValidationErrors) {
  EXPECT_OK(ValidateHierScenario(Census()));
  HierScenario s = Census();
  s.true_x2 = 3;
  EXPECT_THAT(ValidateHierScenario(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
  s = Census();
  s.d = 0;
  EXPECT_THAT(ValidateHierScenario(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
  s = Census();
  s.rho2 = 0;
  EXPECT_THAT(ValidateHierScenario(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
  s = Census();
  s.prior_x2 = PointMass{-1};
  EXPECT_THAT(ValidateHierScenario(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
  s = Census();
  s.flat.known_count = 5;
  s.flat.true_count = 5;
  s.true_x2 = 5;
  s.prior_x2 = TruncatedUniform{4};
  EXPECT_THAT(ValidateHierScenario(s),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(HierRiskTest, DescribePrior) {
  EXPECT_EQ(DescribePrior(UnboundedUniform{}), "UnboundedUniform");
  EXPECT_EQ(DescribePrior(TruncatedUniform{10}), "TruncatedUniform(max=10)");
  EXPECT_EQ(DescribePrior(PointMass{25}), "PointMass(25)");
}

TEST(HierRiskTest, TableReleaseIsReachable) {
  const HierScenario s = Census();
  // Every release has positive probability; check this one is not vanishing.
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian d1,
                       DiscreteGaussian::FromRho(1, kRho1));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian d2,
                       DiscreteGaussian::FromRho(1, kRho2));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dy,
                       DiscreteGaussian::FromScale(0, 27 * 0.5 / kRho1));
  EXPECT_GT(d1.Pmf(2) * d2.Pmf(1) * dy.Pmf(-1), 1e-3);
  // And the generator actually produces it.
  const ReleaseGenerator gen_release(s, SiblingNoise::kApproximate);
  BitGen gen = MakeBitGen(2);
  bool seen = false;
  for (int i = 0; i < 200000 && !seen; ++i) {
    seen = gen_release(gen) == kTableData;
  }
  EXPECT_TRUE(seen);
}

TEST(HierRiskTest, VanishingNoiseReleasesTruth) {
  HierScenario s = Census();
  s.flat.rho1 = 1e6;
  s.rho2 = 1e6;
  s.true_x2 = 4;
  s.true_y1 = 3;
  BitGen gen = MakeBitGen(3);
  int exact = 0;
  for (int i = 0; i < 10000; ++i) {
    exact += GenerateRelease(s, gen) == NoisyData{1, 4, 3};
  }
  EXPECT_GT(exact, 9990);
}

TEST(HierRiskTest, SiblingNoiseModesAgree) {
  const HierScenario s = Census();
  const double unit = 0.5 / kRho1;
  // Oracle: exact 27-fold convolution of DG(0, unit) pmfs.
  std::vector<long double> one;
  constexpr int kR = 40;
  for (int k = -kR; k <= kR; ++k) one.push_back(testing::ReferencePmf(0, unit, k));
  std::vector<long double> conv = {1.0L};
  for (int i = 0; i < s.d; ++i) {
    std::vector<long double> next(conv.size() + one.size() - 1, 0);
    for (size_t a = 0; a < conv.size(); ++a) {
      for (size_t b = 0; b < one.size(); ++b) next[a + b] += conv[a] * one[b];
    }
    conv = std::move(next);
  }
  const std::int64_t offset = static_cast<std::int64_t>(s.d) * kR;
  auto conv_pmf = [&](std::int64_t y) -> long double {
    const std::int64_t i = y + offset;
    return i < 0 || i >= static_cast<std::int64_t>(conv.size()) ? 0 : conv[i];
  };
  // Approximation error of the single wide draw.
  long double tv = 0;
  for (std::int64_t y = -offset; y <= offset; ++y) {
    tv += std::fabs(conv_pmf(y) - testing::ReferencePmf(0, s.d * unit, y));
  }
  EXPECT_LT(tv / 2, 0.01);

  constexpr int kDraws = 1'000'000;
  for (SiblingNoise mode : {SiblingNoise::kApproximate, SiblingNoise::kExact}) {
    const ReleaseGenerator gen_release(s, mode);
    BitGen gen = MakeBitGen(mode == SiblingNoise::kExact ? 10 : 11);
    std::map<std::int64_t, int> counts;
    for (int i = 0; i < kDraws; ++i) ++counts[gen_release(gen).y1_star];
    long double etv = 0, covered = 0;
    for (const auto& [y, c] : counts) {
      etv += std::fabs(static_cast<long double>(c) / kDraws - conv_pmf(y));
      covered += conv_pmf(y);
    }
    etv += 1 - covered;
    EXPECT_LT(etv / 2, 0.01) << static_cast<int>(mode);
  }
}

TEST(HierRiskTest, X1ConditionalKernelMatchesOracle) {
  const HierScenario s = Census();
  for (std::int64_t k2 = 0; k2 <= 12; ++k2) {
    EXPECT_NEAR(X1FullConditional(s, kTableData, k2),
                static_cast<double>(KernelOnlyX1(s, kTableData, k2)), 1e-14)
        << k2;
  }
  // The table's k2 = 1 cell, from the completed square in long double.
  const long double d = 27, center = (d * 2 + (1 - -1)) / (d + 1);
  const long double w1 = -((d + 1) / d) * kRho1 * (1 - center) * (1 - center);
  const long double w0 = -((d + 1) / d) * kRho1 * center * center;
  EXPECT_NEAR(X1FullConditional(s, kTableData, 1),
              static_cast<double>(1 / (1 + std::exp(w0 - w1))), 1e-14);
}

TEST(HierRiskTest, X1ConditionalRandomScenarios) {
  BitGen gen = MakeBitGen(21);
  std::uniform_real_distribution<double> p(0.05, 0.95), log_rho(-4, 1);
  std::uniform_int_distribution<std::int64_t> dd(1, 60), off(-15, 15),
      k2_off(0, 20);
  for (int i = 0; i < 300; ++i) {
    HierScenario s = Census();
    s.flat.prior_p = p(gen);
    s.flat.rho1 = std::exp(log_rho(gen));
    s.d = dd(gen);
    const NoisyData data{off(gen), off(gen), off(gen)};
    const std::int64_t k2 = k2_off(gen);
    EXPECT_NEAR(X1FullConditional(s, data, k2),
                static_cast<double>(KernelOnlyX1(s, data, k2)), 1e-12);
  }
}

TEST(HierRiskTest, X1ConditionalReducesToFlat) {
  HierScenario s = Census();
  s.d = 1'000'000;
  for (std::int64_t x1 = -4; x1 <= 6; ++x1) {
    const NoisyData data{x1, 3, 2};
    EXPECT_NEAR(X1FullConditional(s, data, 3),
                PosteriorGivenRelease(s.flat, x1), 1e-6);
  }
}

TEST(HierRiskTest, JointRuleForcesAbsenceAtKnownCount) {
  const HierScenario s = Census(X1Update::kJointDensity);
  EXPECT_EQ(X1FullConditional(s, kTableData, 0), 0.0);
  EXPECT_GT(X1FullConditional(s, kTableData, 1), 0.0);
}

TEST(HierRiskTest, X2SamplerPointMass) {
  HierScenario s = Census();
  s.prior_x2 = PointMass{4};
  BitGen gen = MakeBitGen(1);
  for (int i = 0; i < 100; ++i) {
    ASSERT_OK_AND_ASSIGN(const std::int64_t k2,
                         SampleX2FullConditional(s, kTableData, 1, gen));
    EXPECT_EQ(k2, 4);
  }
  s.prior_x2 = PointMass{0};
  EXPECT_THAT(SampleX2FullConditional(s, kTableData, 1, gen),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(SampleX2FullConditional(s, kTableData, 5, gen),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(HierRiskTest, X2SamplerConcentrates) {
  HierScenario s = Census();
  s.rho2 = 1e6;
  const NoisyData data{2, 7, -1};
  BitGen gen = MakeBitGen(8);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    ASSERT_OK_AND_ASSIGN(const std::int64_t k2,
                         SampleX2FullConditional(s, data, 1, gen));
    hits += k2 == 7;
  }
  EXPECT_GT(hits, 9990);
}

TEST(HierRiskTest, X2SamplerMatchesConditional) {
  HierScenario s = Census();
  s.prior_x2 = TruncatedUniform{6};
  const auto oracle = X2Conditional(s, kTableData, 1);
  BitGen gen = MakeBitGen(13);
  constexpr int kDraws = 200000;
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < kDraws; ++i) {
    ASSERT_OK_AND_ASSIGN(const std::int64_t k2,
                         SampleX2FullConditional(s, kTableData, 1, gen));
    ASSERT_GE(k2, 1);
    ASSERT_LE(k2, 6);
    ++counts[k2];
  }
  for (const auto& [k2, p] : oracle) {
    const double se = std::sqrt(static_cast<double>(p * (1 - p)) / kDraws);
    EXPECT_NEAR(static_cast<double>(counts[k2]) / kDraws,
                static_cast<double>(p), 4 * se + 1e-9)
        << k2;
  }
}

TEST(HierRiskTest, TableSecondLevelMarginal) {
  ASSERT_OK_AND_ASSIGN(const ExactPosterior post,
                       ComputeExactPosterior(Census(), kTableData));
  EXPECT_NEAR(X2Prob(post, 1), 0.40, 0.01);
  EXPECT_NEAR(X2Prob(post, 2), 0.30, 0.01);
}

TEST(HierRiskTest, TableGibbsEstimate) {
  ASSERT_OK_AND_ASSIGN(
      const PosteriorSamples draws,
      GibbsPosterior(Census(), kTableData, 10000, DefaultBurnIn(10000), 7));
  EXPECT_EQ(draws.draws.size(), 10000u);
  EXPECT_NEAR(draws.X1Marginal(), 0.570, 0.015);
}

TEST(HierRiskTest, GibbsIsDeterministicAndInSupport) {
  const HierScenario s = Census();
  ASSERT_OK_AND_ASSIGN(const PosteriorSamples a,
                       GibbsPosterior(s, kTableData, 5000, 100, 99));
  ASSERT_OK_AND_ASSIGN(const PosteriorSamples b,
                       GibbsPosterior(s, kTableData, 5000, 100, 99));
  EXPECT_EQ(a.draws, b.draws);
  for (const auto& [k1, k2] : a.draws) {
    EXPECT_TRUE(k1 == 0 || k1 == 1);
    EXPECT_GE(k2, k1);
  }
  EXPECT_THAT(GibbsPosterior(s, kTableData, 0, 0, 1),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(GibbsPosterior(s, kTableData, 10, -1, 1),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(HierRiskTest, DefaultBurnInIsTenPercent) {
  EXPECT_EQ(DefaultBurnIn(10000), 1000);
  EXPECT_EQ(DefaultBurnIn(5), 0);
}

TEST(HierRiskTest, PointMassChainIsConstant) {
  HierScenario s = Census();
  s.prior_x2 = PointMass{1};
  s.rho2 = 3.7;
  ASSERT_OK_AND_ASSIGN(const PosteriorSamples draws,
                       GibbsPosterior(s, kTableData, 10000, 1000, 5));
  for (const auto& [k1, k2] : draws.draws) ASSERT_EQ(k2, 1);
  ASSERT_OK_AND_ASSIGN(const ExactPosterior exact,
                       ComputeExactPosterior(s, kTableData));
  EXPECT_NEAR(draws.X1Marginal(), exact.p_x1,
              3 * draws.X1MarginalStandardError());
  EXPECT_NEAR(exact.p_x1, static_cast<double>(KernelOnlyOracle(s, kTableData).p_x1),
              1e-12);
}

TEST(HierRiskTest, InfeasibleHypothesisIsExcluded) {
  HierScenario s = Census();
  s.prior_x2 = PointMass{0};
  ASSERT_OK_AND_ASSIGN(const ExactPosterior exact,
                       ComputeExactPosterior(s, kTableData));
  EXPECT_EQ(exact.p_x1, 0.0);
  ASSERT_OK_AND_ASSIGN(const PosteriorSamples draws,
                       GibbsPosterior(s, kTableData, 1000, 0, 5));
  EXPECT_EQ(draws.X1Marginal(), 0.0);
}

HierScenario RandomScenario(BitGen& gen, X1Update rule) {
  std::uniform_real_distribution<double> p(0.1, 0.9), log_rho(-3.5, 0.5);
  std::uniform_int_distribution<std::int64_t> dd(1, 40), known(0, 3),
      y1(0, 6), prior_kind(0, 2), extra(3, 12);
  HierScenario s = Census(rule);
  s.flat.known_count = known(gen);
  s.flat.true_count = s.flat.known_count + (p(gen) < 0.5 ? 1 : 0);
  s.flat.prior_p = p(gen);
  s.flat.rho1 = std::exp(log_rho(gen));
  s.rho2 = std::exp(log_rho(gen));
  s.d = dd(gen);
  s.true_y1 = y1(gen);
  s.true_x2 = s.flat.true_count + s.true_y1;
  switch (prior_kind(gen)) {
    case 1:
      s.prior_x2 = TruncatedUniform{s.true_x2 + extra(gen)};
      break;
    case 2:
      s.prior_x2 = PointMass{s.true_x2};
      break;
    default:
      s.prior_x2 = UnboundedUniform{};
  }
  return s;
}

TEST(HierRiskTest, ExactPosteriorMatchesIndependentOracles) {
  BitGen gen = MakeBitGen(44);
  for (X1Update rule : {X1Update::kKernelOnly, X1Update::kJointDensity}) {
    for (int i = 0; i < 60; ++i) {
      const HierScenario s = RandomScenario(gen, rule);
      const NoisyData data = GenerateRelease(s, gen);
      ASSERT_OK_AND_ASSIGN(const ExactPosterior post,
                           ComputeExactPosterior(s, data));
      const Oracle oracle = rule == X1Update::kJointDensity
                                ? JointOracle(s, data)
                                : KernelOnlyOracle(s, data);
      EXPECT_NEAR(post.p_x1, static_cast<double>(oracle.p_x1), 1e-10)
          << i << " " << DescribePrior(s.prior_x2);
      double total = 0;
      for (const auto& [k2, w] : post.x2_marginal) {
        EXPECT_GE(k2, s.flat.known_count);
        total += w;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      for (const auto& [k2, w] : oracle.x2) {
        if (w > 1e-9) {
          EXPECT_NEAR(X2Prob(post, k2), static_cast<double>(w), 1e-9);
        }
      }
    }
  }
}

TEST(HierRiskTest, JointRuleOnTableData) {
  ASSERT_OK_AND_ASSIGN(
      const ExactPosterior post,
      ComputeExactPosterior(Census(X1Update::kJointDensity), kTableData));
  EXPECT_NEAR(post.p_x1,
              static_cast<double>(JointOracle(Census(), kTableData).p_x1),
              1e-12);
}

TEST(HierRiskTest, GibbsMatchesExactOnRandomScenarios) {
  BitGen gen = MakeBitGen(45);
  int checked = 0;
  for (X1Update rule : {X1Update::kKernelOnly, X1Update::kJointDensity}) {
    for (int i = 0; i < 15; ++i) {
      const HierScenario s = RandomScenario(gen, rule);
      const NoisyData data = GenerateRelease(s, gen);
      ASSERT_OK_AND_ASSIGN(const ExactPosterior exact,
                           ComputeExactPosterior(s, data));
      ASSERT_OK_AND_ASSIGN(const PosteriorSamples draws,
                           GibbsPosterior(s, data, 10000, 1000, 1000 + i));
      const double se = draws.X1MarginalStandardError();
      EXPECT_NEAR(draws.X1Marginal(), exact.p_x1, 3 * se)
          << i << " rule=" << static_cast<int>(rule);
      ++checked;
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(HierRiskTest, ExactPosteriorReducesToFlat) {
  for (X1Update rule : {X1Update::kKernelOnly, X1Update::kJointDensity}) {
    HierScenario s = Census(rule);
    s.d = 1'000'000;
    // Under the joint rule the Y1 >= 0 constraint still carries information
    // when x2* sits near the boundary, so keep x2* far above it there.
    const std::int64_t x2 = rule == X1Update::kJointDensity ? 60 : 2;
    for (std::int64_t x1 = -3; x1 <= 5; ++x1) {
      const NoisyData data{x1, x2, x2 - 1};
      ASSERT_OK_AND_ASSIGN(const ExactPosterior post,
                           ComputeExactPosterior(s, data));
      EXPECT_NEAR(post.p_x1, PosteriorGivenRelease(s.flat, x1), 1e-6)
          << x1 << " rule=" << static_cast<int>(rule);
    }
  }
}

TEST(HierRiskTest, PreciseSecondLevelGivesConstantInX2) {
  HierScenario s = Census();
  s.rho2 = 1e6;
  for (std::int64_t noise : {-9, 0, 4}) {
    std::vector<double> values;
    for (std::int64_t x2 : {1, 10, 100}) {
      const NoisyData data{2, x2, x2 - 1 + noise};
      ASSERT_OK_AND_ASSIGN(const ExactPosterior post,
                           ComputeExactPosterior(s, data));
      values.push_back(post.p_x1);
    }
    EXPECT_NEAR(values[0], values[1], 1e-9);
    EXPECT_NEAR(values[0], values[2], 1e-9);
    EXPECT_LT(values[0], 0.99);
    EXPECT_GT(values[0], 0.01);
  }
}

TEST(HierRiskTest, DecisionMapFlatColumnAndMasses) {
  const HierScenario s = Census();
  ASSERT_OK_AND_ASSIGN(
      const DecisionMap map,
      ComputeDecisionMap(s, {-3, 4}, {-1, 3}, {-8, 8}, true, 2));
  ASSERT_EQ(map.cells.size(), 8u * 5 * 17);
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian d1,
                       DiscreteGaussian::FromRho(1, kRho1));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian d2,
                       DiscreteGaussian::FromRho(1, kRho2));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dy,
                       DiscreteGaussian::FromScale(0, 27 * 0.5 / kRho1));
  double corrects = 0, harms = 0, grid = 0;
  for (const DecisionCell& c : map.cells) {
    EXPECT_EQ(c.flat_decides_present, c.data.x1_star >= 1);
    const double mass =
        d1.Pmf(c.data.x1_star) * d2.Pmf(c.data.x2_star) * dy.Pmf(c.data.y1_star);
    EXPECT_NEAR(c.release_prob, mass, 1e-15);
    grid += mass;
    if (c.hier_decides_present != c.flat_decides_present) {
      (c.hier_decides_present ? corrects : harms) += mass;
    }
  }
  EXPECT_NEAR(map.grid_mass, grid, 1e-12);
  EXPECT_NEAR(map.hierarchy_corrects_mass, corrects, 1e-12);
  EXPECT_NEAR(map.hierarchy_harms_mass, harms, 1e-12);
  EXPECT_NEAR(map.net_gain(), corrects - harms, 1e-12);
}

TEST(HierRiskTest, DecisionMapSingleCell) {
  const HierScenario s = Census();
  ASSERT_OK_AND_ASSIGN(const DecisionMap map,
                       ComputeDecisionMap(s, {2, 2}, {1, 1}, {-1, -1}));
  ASSERT_EQ(map.cells.size(), 1u);
  ASSERT_OK_AND_ASSIGN(const ExactPosterior post,
                       ComputeExactPosterior(s, kTableData));
  EXPECT_EQ(map.cells[0].hier_decides_present, post.p_x1 > 0.5);
  ASSERT_OK_AND_ASSIGN(const bool decision, HierDecision(s, kTableData));
  EXPECT_EQ(decision, post.p_x1 > 0.5);
  EXPECT_THAT(ComputeDecisionMap(s, {2, 1}, {1, 1}, {0, 0}),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(HierRiskTest, McDecisionIsIndependentOfWorkers) {
  McOptions options;
  options.n_trials = 20000;
  options.seed = 17;
  ASSERT_OK_AND_ASSIGN(const McEstimate one,
                       McCorrectDecisionProb(Census(), options));
  options.workers = 3;
  ASSERT_OK_AND_ASSIGN(const McEstimate three,
                       McCorrectDecisionProb(Census(), options));
  EXPECT_EQ(one.successes, three.successes);
  EXPECT_EQ(one.trials, 20000);
  EXPECT_NEAR(one.standard_error,
              std::sqrt(one.estimate * (1 - one.estimate) / 20000), 1e-12);
}

TEST(HierRiskTest, McDecisionWithRevealingBlock) {
  HierScenario s = Census();
  s.flat.rho1 = 1e6;
  McOptions options;
  options.n_trials = 5000;
  for (double rho2 : {0.01, 1.0, 100.0}) {
    s.rho2 = rho2;
    ASSERT_OK_AND_ASSIGN(const McEstimate est, McCorrectDecisionProb(s, options));
    EXPECT_GT(est.estimate, 0.999) << rho2;
  }
}

TEST(HierRiskTest, McDecisionGibbsAgreesWithExact) {
  McOptions options;
  options.n_trials = 4000;
  options.seed = 23;
  ASSERT_OK_AND_ASSIGN(const McEstimate exact,
                       McCorrectDecisionProb(Census(), options));
  options.inference.method = InferenceMethod::kGibbs;
  options.inference.n_draws = 2000;
  ASSERT_OK_AND_ASSIGN(const McEstimate gibbs,
                       McCorrectDecisionProb(Census(), options));
  // Same releases; only near-tie decisions can differ.
  EXPECT_NEAR(gibbs.estimate, exact.estimate, 0.02);
}

// Prior sensitivity with truth (1, 1, 0) or the absent counterfactual.
double PriorSensitivity(PriorX2 prior, bool present) {
  HierScenario s = Census();
  s.prior_x2 = prior;
  if (!present) {
    s.flat.true_count = 0;
    s.true_x2 = 0;
  }
  McOptions options;
  options.n_trials = 200000;
  options.seed = 404;
  const double estimate = McCorrectDecisionProb(s, options).value().estimate;
  ::testing::Test::RecordProperty(DescribePrior(prior) + (present ? "" : " absent"),
                 std::to_string(estimate));
  return estimate;
}

TEST(HierRiskPropertyTest, WellSpecifiedPriorsGiveFiftyNinePercent) {
  EXPECT_NEAR(PriorSensitivity(UnboundedUniform{}, true), 0.59, 0.01);
  EXPECT_NEAR(PriorSensitivity(TruncatedUniform{10}, true), 0.59, 0.01);
  EXPECT_NEAR(PriorSensitivity(PointMass{1}, true), 0.59, 0.01);
}

TEST(HierRiskPropertyTest, MisspecifiedPointMassPrior) {
  EXPECT_NEAR(PriorSensitivity(PointMass{25}, true), 0.74, 0.01);
  EXPECT_NEAR(PriorSensitivity(PointMass{25}, false), 0.42, 0.01);
}

TEST(HierRiskPropertyTest, SecondLevelBudgetSaturates) {
  McOptions options;
  options.n_trials = 40000;
  options.seed = 606;
  double lo = 1, hi = 0;
  for (double rho2 : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    HierScenario s = Census();
    s.rho2 = rho2;
    ASSERT_OK_AND_ASSIGN(const McEstimate est, McCorrectDecisionProb(s, options));
    RecordProperty("rho2=" + std::to_string(rho2), std::to_string(est.estimate));
    lo = std::min(lo, est.estimate);
    hi = std::max(hi, est.estimate);
  }
  EXPECT_LE(hi - lo, 0.01);
}

}  // namespace
}  // namespace dgrisk
