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
#include <numbers>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"

namespace dgrisk {
namespace {

// Terms are added until they fall below this fraction of the running sum.
constexpr double kRelativeCutoff = 1e-18;

// Above this scale the lattice sums are replaced by their Poisson duals, whose
// correction terms exp(-2 pi^2 s m^2) are zero in double precision.
constexpr double kDualScale = 1e8;

// Beyond this scale the rational sampler would overflow 128-bit products.
constexpr double kMaxScale = 1e18;

// P[eta >= m] for centered noise and m >= 1.
double UpperTail(double scale, double log_normalizer, std::int64_t m) {
  if (scale > kDualScale) {
    return 0.5 * std::erfc((static_cast<double>(m) - 0.5) /
                           std::sqrt(2 * scale));
  }
  double sum = 0;
  for (std::int64_t j = m;; ++j) {
    const double jd = static_cast<double>(j);
    const double term = std::exp(-jd * jd / (2 * scale) - log_normalizer);
    sum += term;
    if (term <= kRelativeCutoff * sum || term == 0) break;
  }
  return sum;
}

}  // namespace

double DiscreteGaussianLogNormalizer(double scale) {
  if (scale > kDualScale) {
    return 0.5 * std::log(2 * std::numbers::pi * scale);
  }
  double sum = 1;
  for (std::int64_t j = 1;; ++j) {
    const double jd = static_cast<double>(j);
    const double term = 2 * std::exp(-jd * jd / (2 * scale));
    sum += term;
    if (term < kRelativeCutoff * sum) break;
  }
  return std::log(sum);
}

DiscreteGaussian::DiscreteGaussian(std::int64_t location, double scale)
    : location_(location),
      scale_(scale),
      log_normalizer_(DiscreteGaussianLogNormalizer(scale)),
      noise_(scale) {}

absl::StatusOr<DiscreteGaussian> DiscreteGaussian::FromScale(
    std::int64_t location, double scale) {
  if (!std::isfinite(scale) || scale <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("discrete Gaussian scale must be positive, got %g",
                        scale));
  }
  if (scale > kMaxScale) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "discrete Gaussian scale %g exceeds the supported maximum %g", scale,
        kMaxScale));
  }
  return DiscreteGaussian(location, scale);
}

absl::StatusOr<DiscreteGaussian> DiscreteGaussian::FromRho(
    std::int64_t location, double rho) {
  if (!std::isfinite(rho) || rho <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rho must be positive, got %g", rho));
  }
  return FromScale(location, 0.5 / rho);
}

double DiscreteGaussian::LogPmf(std::int64_t k) const {
  const double d = static_cast<double>(k - location_);
  return -(d * d) / (2 * scale_) - log_normalizer_;
}

double DiscreteGaussian::Pmf(std::int64_t k) const {
  return std::exp(LogPmf(k));
}

double DiscreteGaussian::Variance() const {
  if (scale_ > kDualScale) return scale_;
  double sum = 0;
  for (std::int64_t j = 1;; ++j) {
    const double jd = static_cast<double>(j);
    const double term =
        2 * jd * jd * std::exp(-jd * jd / (2 * scale_) - log_normalizer_);
    sum += term;
    if (jd * jd > scale_ && term < kRelativeCutoff * sum) break;
    if (term == 0 && jd * jd > scale_) break;
  }
  return sum;
}

double DiscreteGaussian::TailAtLeast(std::int64_t k) const {
  const std::int64_t m = k - location_;
  if (m >= 1) return UpperTail(scale_, log_normalizer_, m);
  return 1 - UpperTail(scale_, log_normalizer_, 1 - m);
}

double DiscreteGaussian::CdfAtMost(std::int64_t k) const {
  // P[X <= location + m] = P[eta >= -m] by symmetry.
  const std::int64_t m = k - location_;
  return TailAtLeast(location_ - m);
}

std::int64_t DiscreteGaussian::Radius() const {
  const auto r = static_cast<std::int64_t>(std::ceil(10 * std::sqrt(scale_)));
  return r < 20 ? 20 : r;
}

std::int64_t DiscreteGaussian::Sample(BitGen& gen) const {
  return location_ + noise_.Sample(gen);
}

absl::StatusOr<DiscreteGaussian> ApproxSumDist(int n, double rho) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("number of summed draws must be >= 1, got %d", n));
  }
  if (!std::isfinite(rho) || rho <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rho must be positive, got %g", rho));
  }
  return DiscreteGaussian::FromScale(0, n / (2 * rho));
}

}  // namespace dgrisk
