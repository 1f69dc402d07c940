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

#ifndef DGRISK_DISCRETE_GAUSSIAN_H_
#define DGRISK_DISCRETE_GAUSSIAN_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dgrisk/exact_sampling.h"
#include "dgrisk/random.h"

namespace dgrisk {

// Discrete Gaussian on the integers with pmf proportional to
// exp(-(k - location)^2 / (2 s)). The privacy parameter is rho = 1 / (2 s).
// Immutable; safe to share across threads.
class DiscreteGaussian {
 public:
  static absl::StatusOr<DiscreteGaussian> FromScale(std::int64_t location,
                                                    double scale);
  static absl::StatusOr<DiscreteGaussian> FromRho(std::int64_t location,
                                                  double rho);

  std::int64_t location() const { return location_; }
  double scale() const { return scale_; }
  double rho() const { return 0.5 / scale_; }

  double Pmf(std::int64_t k) const;
  double LogPmf(std::int64_t k) const;
  // log of sum_k exp(-k^2 / (2 s)).
  double LogNormalizer() const { return log_normalizer_; }

  // sum_k k^2 pmf(location + k).
  double Variance() const;

  // P[X >= k].
  double TailAtLeast(std::int64_t k) const;
  // P[X <= k].
  double CdfAtMost(std::int64_t k) const;

  // Half-width around the location outside of which the mass is negligible:
  // max(10 sqrt(s), 20).
  std::int64_t Radius() const;

  // Exact sample (location plus exact noise).
  std::int64_t Sample(BitGen& gen) const;
  const exact::DiscreteGaussianNoise& noise() const { return noise_; }

 private:
  DiscreteGaussian(std::int64_t location, double scale);

  std::int64_t location_;
  double scale_;
  double log_normalizer_;
  exact::DiscreteGaussianNoise noise_;
};

// Log normalizing constant of the centered kernel exp(-k^2 / (2 s)).
double DiscreteGaussianLogNormalizer(double scale);

// Single discrete Gaussian standing in for the sum of n independent
// DG(0, 1 / (2 rho)) draws: DG(0, n / (2 rho)).
absl::StatusOr<DiscreteGaussian> ApproxSumDist(int n, double rho);

}  // namespace dgrisk

#endif  // DGRISK_DISCRETE_GAUSSIAN_H_
