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

#include "dgrisk/discrete_gaussian.h"

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include "absl/status/status.h"
#include "boost/math/distributions/chi_squared.hpp"
#include "dgrisk/exact_sampling.h"
#include "dgrisk/random.h"
#include "test_util.h"

namespace dgrisk {
namespace {

using ::dgrisk::testing::ReferenceLogNormalizer;
using ::dgrisk::testing::ReferencePmf;
using ::dgrisk::testing::StatusIs;
using ::dgrisk::testing::TotalVariation;

constexpr double kCensusBlockRho = 0.099;

std::map<std::int64_t, std::int64_t> Histogram(const DiscreteGaussian& dg,
                                               std::int64_t n,
                                               std::uint64_t seed) {
  BitGen gen = MakeBitGen(seed);
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t i = 0; i < n; ++i) ++counts[dg.Sample(gen)];
  return counts;
}

TEST(DiscreteGaussianTest, RejectsNonPositiveScale) {
  EXPECT_THAT(DiscreteGaussian::FromScale(0, 0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DiscreteGaussian::FromScale(0, -2.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DiscreteGaussian::FromRho(0, 0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DiscreteGaussian::FromScale(0, std::nan("")),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DiscreteGaussianTest, RhoAndScaleAreInterchangeable) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian a,
                       DiscreteGaussian::FromRho(3, kCensusBlockRho));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian b,
                       DiscreteGaussian::FromScale(3, 1 / (2 * kCensusBlockRho)));
  EXPECT_DOUBLE_EQ(a.scale(), b.scale());
  EXPECT_DOUBLE_EQ(a.rho(), kCensusBlockRho);
  EXPECT_EQ(a.Pmf(7), b.Pmf(7));
}

// Reference release masses at x* = 1..5 under a true count of 0.
TEST(DiscreteGaussianTest, PmfMatchesReferenceMasses) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromRho(0, kCensusBlockRho));
  const double printed[] = {0.161, 0.119, 0.073, 0.036, 0.015};
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(dg.Pmf(k), printed[k - 1], 0.0005) << "k=" << k;
  }
}

// The same masses centered at 1 are those of the shifted argument.
TEST(DiscreteGaussianTest, PmfCenteredAtOne) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromRho(1, kCensusBlockRho));
  EXPECT_NEAR(dg.Pmf(1), 0.1775, 0.00005);
  EXPECT_NEAR(dg.Pmf(5), 0.0364, 0.00005);
  EXPECT_NEAR(dg.Pmf(6), 0.015, 0.0005);
}

TEST(DiscreteGaussianTest, PmfAgreesWithLongDoubleReference) {
  for (double s : {0.1, 0.51, 1.0, 5.0505, 27.0, 136.36, 200.0, 1e4}) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(-4, s));
    EXPECT_NEAR(dg.LogNormalizer(), ReferenceLogNormalizer(s),
                1e-13 * std::max(1.0, dg.LogNormalizer()))
        << "s=" << s;
    for (std::int64_t k : {-4, -3, 0, 5, 30}) {
      const double ref = ReferencePmf(-4, s, k);
      EXPECT_NEAR(dg.Pmf(k), ref, 1e-12 * ref + 1e-300)
          << "s=" << s << " k=" << k;
    }
  }
}

TEST(DiscreteGaussianTest, LargeScaleNormalizerMatchesContinuousLimit) {
  // For huge s the lattice sum equals sqrt(2 pi s) to double precision.
  for (double s : {1e9, 1e12, 1e16}) {
    EXPECT_NEAR(DiscreteGaussianLogNormalizer(s),
                0.5 * std::log(2 * M_PI * s), 1e-12);
  }
}

TEST(DiscreteGaussianTest, PmfIsSymmetricExactly) {
  for (double rho : {0.01, kCensusBlockRho, 0.5, 3.0}) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromRho(0, rho));
    for (int k = 1; k <= 10; ++k) EXPECT_EQ(dg.Pmf(k), dg.Pmf(-k));
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian shifted,
                         DiscreteGaussian::FromRho(17, rho));
    for (int k = 1; k <= 10; ++k) {
      EXPECT_EQ(shifted.Pmf(17 + k), shifted.Pmf(17 - k));
    }
  }
}

TEST(DiscreteGaussianTest, PmfNormalizesOverRandomParameters) {
  BitGen gen = MakeBitGen(20260101);
  std::uniform_real_distribution<double> log_s(std::log(0.1), std::log(200.0));
  std::uniform_int_distribution<std::int64_t> loc(-1000, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = std::exp(log_s(gen));
    const std::int64_t location = loc(gen);
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(location, s));
    long double total = 0;
    const std::int64_t r = dg.Radius() * 2;
    for (std::int64_t k = location - r; k <= location + r; ++k) {
      total += dg.Pmf(k);
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12) << "s=" << s;
  }
}

TEST(DiscreteGaussianTest, TailsAndCdfAreComplementary) {
  for (double s : {0.3, 5.0505, 136.36}) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(2, s));
    for (std::int64_t k = -40; k <= 40; k += 7) {
      EXPECT_NEAR(dg.TailAtLeast(k) + dg.CdfAtMost(k - 1), 1.0, 1e-12);
      long double direct = 0;
      for (std::int64_t j = k; j <= k + 4000; ++j) direct += ReferencePmf(2, s, j);
      EXPECT_NEAR(dg.TailAtLeast(k), static_cast<double>(direct),
                  1e-12 + 1e-10 * static_cast<double>(direct));
    }
  }
}

TEST(DiscreteGaussianTest, VarianceApproachesScale) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian a,
                       DiscreteGaussian::FromScale(0, 0.6));
  EXPECT_LT(std::fabs(a.Variance() - 0.6), 0.002);
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian b,
                       DiscreteGaussian::FromScale(0, 2.0));
  EXPECT_LT(std::fabs(b.Variance() - 2.0), 1e-6);
  for (double s = 0.51; s < 1.0; s += 0.01) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(0, s));
    EXPECT_LT(std::fabs(dg.Variance() - s), 0.002) << "s=" << s;
  }
  for (double s = 1.01; s < 20; s *= 1.3) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(0, s));
    EXPECT_LT(std::fabs(dg.Variance() - s), 1e-6) << "s=" << s;
  }
}

TEST(DiscreteGaussianTest, VarianceMatchesReferenceMoment) {
  const long double s = 1.0L / (2.0L * 0.099L);
  long double moment = 0;
  for (std::int64_t k = -400; k <= 400; ++k) {
    moment += static_cast<long double>(k) * k * ReferencePmf(0, s, k);
  }
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromRho(11, 0.099));
  EXPECT_NEAR(dg.Variance(), static_cast<double>(moment), 1e-12);
}

TEST(DiscreteGaussianTest, SamplerIsReproducibleForFixedSeed) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromRho(0, kCensusBlockRho));
  BitGen a = MakeBitGen(7, 3);
  BitGen b = MakeBitGen(7, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(dg.Sample(a), dg.Sample(b));
}

TEST(DiscreteGaussianTest, SamplerIsShiftEquivariantUnderMatchedSeeds) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian centered,
                       DiscreteGaussian::FromScale(0, 3.7));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian shifted,
                       DiscreteGaussian::FromScale(-12, 3.7));
  BitGen a = MakeBitGen(99);
  BitGen b = MakeBitGen(99);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(shifted.Sample(b), -12 + centered.Sample(a));
  }
}

TEST(DiscreteGaussianTest, SampleMomentsAtBlockBudget) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromRho(0, kCensusBlockRho));
  constexpr std::int64_t kDraws = 1'000'000;
  BitGen gen = MakeBitGen(2024);
  long double sum = 0, sum_sq = 0;
  for (std::int64_t i = 0; i < kDraws; ++i) {
    const double x = dg.Sample(gen);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = static_cast<double>(sum / kDraws);
  const double var = static_cast<double>(sum_sq / kDraws) - mean * mean;
  EXPECT_LT(std::fabs(mean), 3 * std::sqrt(dg.scale() / kDraws));
  EXPECT_LT(std::fabs(var / dg.Variance() - 1), 0.01);
}

TEST(DiscreteGaussianTest, SampleFrequenciesCloseInTotalVariation) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                       DiscreteGaussian::FromScale(5, 10.0));
  constexpr std::int64_t kDraws = 1'000'000;
  const auto counts = Histogram(dg, kDraws, 55);
  EXPECT_LT(TotalVariation(counts, kDraws, -60, 70,
                           [&](std::int64_t k) { return dg.Pmf(k); }),
            0.005);
}

// Pearson chi-square with bins of expected count below 5 pooled into the
// tails.
double ChiSquarePValue(const DiscreteGaussian& dg,
                       const std::map<std::int64_t, std::int64_t>& counts,
                       std::int64_t n) {
  std::int64_t lo = dg.location(), hi = dg.location();
  while (dg.Pmf(lo - 1) * n >= 5) --lo;
  while (dg.Pmf(hi + 1) * n >= 5) ++hi;
  double stat = 0;
  auto add = [&](double observed, double expected) {
    stat += (observed - expected) * (observed - expected) / expected;
  };
  double low_obs = 0, high_obs = 0;
  for (const auto& [k, c] : counts) {
    if (k < lo) low_obs += c;
    if (k > hi) high_obs += c;
  }
  add(low_obs, dg.CdfAtMost(lo - 1) * n);
  add(high_obs, dg.TailAtLeast(hi + 1) * n);
  for (std::int64_t k = lo; k <= hi; ++k) {
    const auto it = counts.find(k);
    add(it == counts.end() ? 0.0 : static_cast<double>(it->second),
        dg.Pmf(k) * n);
  }
  const boost::math::chi_squared chi(static_cast<double>(hi - lo + 2));
  return boost::math::cdf(boost::math::complement(chi, stat));
}

TEST(DiscreteGaussianTest, SamplerPassesChiSquareGoodnessOfFit) {
  constexpr std::int64_t kDraws = 1'000'000;
  std::uint64_t seed = 1;
  for (double s : {0.3, 1.0 / (2 * kCensusBlockRho), 27.0 / (2 * 0.099), 2.5}) {
    ASSERT_OK_AND_ASSIGN(const DiscreteGaussian dg,
                         DiscreteGaussian::FromScale(0, s));
    const auto counts = Histogram(dg, kDraws, seed++);
    EXPECT_GT(ChiSquarePValue(dg, counts, kDraws), 1e-3) << "s=" << s;
  }
}

TEST(DiscreteGaussianTest, ApproxSumDistScale) {
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian one, ApproxSumDist(1, 0.099));
  EXPECT_DOUBLE_EQ(one.scale(), 1 / (2 * 0.099));
  EXPECT_EQ(one.location(), 0);
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian many, ApproxSumDist(27, 0.099));
  EXPECT_NEAR(many.scale(), 136.36, 0.005);
  EXPECT_THAT(ApproxSumDist(0, 0.099),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(ApproxSumDist(3, -1),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DiscreteGaussianTest, ApproxSumDistCloseToConvolution) {
  constexpr std::int64_t kDraws = 1'000'000;
  constexpr int kN = 5;
  constexpr double kRho = 1.0;
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian base,
                       DiscreteGaussian::FromRho(0, kRho));
  ASSERT_OK_AND_ASSIGN(const DiscreteGaussian approx, ApproxSumDist(kN, kRho));
  BitGen gen = MakeBitGen(8);
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t i = 0; i < kDraws; ++i) {
    std::int64_t total = 0;
    for (int j = 0; j < kN; ++j) total += base.Sample(gen);
    ++counts[total];
  }
  EXPECT_LT(TotalVariation(counts, kDraws, -60, 60,
                           [&](std::int64_t k) { return approx.Pmf(k); }),
            0.01);
}

namespace exact_test {

using exact::BernoulliExpNeg;
using exact::DiscreteLaplace;
using exact::Ratio;

TEST(ExactSamplingTest, ApproximateRatioRecoversSimpleFractions) {
  const Ratio r = exact::ApproximateRatio(0.75, 1 << 20);
  EXPECT_EQ(static_cast<std::uint64_t>(r.num), 3u);
  EXPECT_EQ(static_cast<std::uint64_t>(r.den), 4u);
  const Ratio s = exact::ApproximateRatio(1 / (2 * 0.099), 1 << 20);
  EXPECT_NEAR(static_cast<double>(s.num) / static_cast<double>(s.den),
              1 / (2 * 0.099), 1e-12);
}

TEST(ExactSamplingTest, UniformBelowIsUniform) {
  BitGen gen = MakeBitGen(3);
  std::vector<int> counts(7);
  constexpr int kDraws = 700000;
  for (int i = 0; i < kDraws; ++i) {
    ++counts[static_cast<int>(exact::UniformBelow(7, gen))];
  }
  for (int c : counts) EXPECT_NEAR(c, kDraws / 7.0, 5 * std::sqrt(kDraws / 7.0));
}

TEST(ExactSamplingTest, BernoulliExpNegFrequency) {
  BitGen gen = MakeBitGen(4);
  constexpr int kDraws = 400000;
  for (const Ratio gamma : {Ratio{0, 1}, Ratio{1, 3}, Ratio{1, 1}, Ratio{7, 2}}) {
    int hits = 0;
    for (int i = 0; i < kDraws; ++i) hits += BernoulliExpNeg(gamma, gen);
    const double p = std::exp(-static_cast<double>(gamma.num) /
                              static_cast<double>(gamma.den));
    EXPECT_NEAR(static_cast<double>(hits) / kDraws, p,
                5 * std::sqrt(p * (1 - p) / kDraws) + 1e-12);
  }
}

TEST(ExactSamplingTest, DiscreteLaplaceMatchesGeometricPmf) {
  BitGen gen = MakeBitGen(5);
  constexpr std::int64_t kDraws = 500000;
  constexpr std::uint64_t kT = 3;
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t i = 0; i < kDraws; ++i) ++counts[DiscreteLaplace(kT, gen)];
  const double q = std::exp(-1.0 / kT);
  auto pmf = [&](std::int64_t k) {
    return (1 - q) / (1 + q) * std::pow(q, std::abs(static_cast<double>(k)));
  };
  EXPECT_LT(TotalVariation(counts, kDraws, -80, 80, pmf), 0.005);
}

}  // namespace exact_test
}  // namespace
}  // namespace dgrisk
