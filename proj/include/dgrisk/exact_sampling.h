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

#ifndef DGRISK_EXACT_SAMPLING_H_
#define DGRISK_EXACT_SAMPLING_H_

#include <cstdint>

#include "dgrisk/random.h"

// Exact rejection samplers built only from uniform integer draws and rational
// arithmetic: Bernoulli(exp(-gamma)), discrete Laplace and discrete Gaussian
// (Canonne, Kamath and Steinke, 2020).
namespace dgrisk::exact {

using u128 = unsigned __int128;

// Non-negative rational num/den with den > 0.
struct Ratio {
  u128 num;
  u128 den;
};

// Best rational approximation of `value` > 0 from its continued fraction,
// stopping once the convergent is within a few ulps or its denominator would
// exceed `max_den`.
Ratio ApproximateRatio(double value, std::uint64_t max_den);

// Uniform integer in [0, n), n >= 1.
u128 UniformBelow(u128 n, BitGen& gen);

// Bernoulli(num / den), num <= den.
bool BernoulliRatio(u128 num, u128 den, BitGen& gen);

// Bernoulli(exp(-gamma)) for rational gamma >= 0.
bool BernoulliExpNeg(Ratio gamma, BitGen& gen);

// Discrete Laplace with pmf proportional to exp(-|x| / t), t >= 1.
std::int64_t DiscreteLaplace(std::uint64_t t, BitGen& gen);

// Sampler for centered discrete Gaussian noise with pmf proportional to
// exp(-x^2 / (2 * sigma2)); sigma2 is held exactly as a rational.
class DiscreteGaussianNoise {
 public:
  // `scale` is the variance-like parameter s > 0. Scales are rationalized
  // with a denominator no larger than max(1, 2^44 / s) capped at 2^24, which
  // keeps every intermediate product inside 128 bits.
  explicit DiscreteGaussianNoise(double scale);

  std::int64_t Sample(BitGen& gen) const;

  Ratio sigma2() const { return sigma2_; }
  std::uint64_t laplace_scale() const { return t_; }

 private:
  Ratio sigma2_;
  std::uint64_t t_;
};

}  // namespace dgrisk::exact

#endif  // DGRISK_EXACT_SAMPLING_H_
