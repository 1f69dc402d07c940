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

#include "dgrisk/exact_sampling.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dgrisk::exact {
namespace {

int BitWidth(u128 v) {
  const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 64 + std::bit_width(hi);
  return std::bit_width(static_cast<std::uint64_t>(v));
}

bool MulOverflows(u128 a, u128 b, u128* out) {
  return __builtin_mul_overflow(a, b, out);
}

// Integer square root floor(sqrt(v)).
u128 ISqrt(u128 v) {
  if (v < 2) return v;
  u128 x = static_cast<u128>(std::sqrt(static_cast<long double>(v)));
  while (x * x > v) --x;
  while ((x + 1) * (x + 1) <= v) ++x;
  return x;
}

}  // namespace

Ratio ApproximateRatio(double value, std::uint64_t max_den) {
  max_den = std::max<std::uint64_t>(max_den, 1);
  const long double target = value;
  // Convergents h/k of the continued fraction of `value`.
  u128 h_prev = 1, h = static_cast<u128>(std::floor(target));
  u128 k_prev = 0, k = 1;
  long double frac = target - std::floor(target);
  const long double tol =
      4 * std::numeric_limits<double>::epsilon() * target;
  for (int iter = 0; iter < 64; ++iter) {
    const long double approx =
        static_cast<long double>(h) / static_cast<long double>(k);
    if (std::fabs(approx - target) <= tol || frac <= 0) break;
    const long double inv = 1 / frac;
    const long double a_ld = std::floor(inv);
    frac = inv - a_ld;
    if (a_ld > 1e30L) break;
    const u128 a = static_cast<u128>(a_ld);
    const u128 k_next = a * k + k_prev;
    if (k_next > max_den) break;
    const u128 h_next = a * h + h_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  // Keep the scale strictly positive.
  if (h == 0) return Ratio{1, max_den};
  return Ratio{h, k};
}

u128 UniformBelow(u128 n, BitGen& gen) {
  if (n <= 1) return 0;
  if (n <= std::numeric_limits<std::uint64_t>::max()) {
    std::uniform_int_distribution<std::uint64_t> dist(
        0, static_cast<std::uint64_t>(n - 1));
    return dist(gen);
  }
  const int bits = BitWidth(n - 1);
  const u128 mask = bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1);
  while (true) {
    const u128 draw = ((static_cast<u128>(gen()) << 64) | gen()) & mask;
    if (draw < n) return draw;
  }
}

bool BernoulliRatio(u128 num, u128 den, BitGen& gen) {
  if (num >= den) return true;
  if (num == 0) return false;
  return UniformBelow(den, gen) < num;
}

bool BernoulliExpNeg(Ratio gamma, BitGen& gen) {
  if (gamma.num <= gamma.den) {
    // Draw Bernoulli(gamma / k) for k = 1, 2, ... until one fails; the index
    // of the failure is odd with probability exp(-gamma).
    u128 k = 1;
    while (true) {
      u128 den;
      if (MulOverflows(gamma.den, k, &den)) return (k & 1) == 1;
      if (!BernoulliRatio(gamma.num, den, gen)) break;
      ++k;
    }
    return (k & 1) == 1;
  }
  const u128 whole = gamma.num / gamma.den;
  for (u128 i = 0; i < whole; ++i) {
    if (!BernoulliExpNeg(Ratio{1, 1}, gen)) return false;
  }
  return BernoulliExpNeg(Ratio{gamma.num - whole * gamma.den, gamma.den},
                         gen);
}

std::int64_t DiscreteLaplace(std::uint64_t t, BitGen& gen) {
  t = std::max<std::uint64_t>(t, 1);
  while (true) {
    const u128 u = UniformBelow(t, gen);
    if (!BernoulliExpNeg(Ratio{u, t}, gen)) continue;
    std::uint64_t v = 0;
    while (BernoulliExpNeg(Ratio{1, 1}, gen)) ++v;
    const u128 x = u + static_cast<u128>(t) * v;
    const bool negative = BernoulliRatio(1, 2, gen);
    if (negative && x == 0) continue;
    if (x > static_cast<u128>(std::numeric_limits<std::int64_t>::max())) {
      continue;
    }
    const auto magnitude = static_cast<std::int64_t>(x);
    return negative ? -magnitude : magnitude;
  }
}

DiscreteGaussianNoise::DiscreteGaussianNoise(double scale) {
  const double budget = std::ldexp(1.0, 44) / std::max(scale, 1.0);
  const auto max_den = static_cast<std::uint64_t>(
      std::clamp(budget, 1.0, std::ldexp(1.0, 24)));
  sigma2_ = ApproximateRatio(scale, max_den);
  // t = floor(sigma) + 1.
  t_ = static_cast<std::uint64_t>(ISqrt(sigma2_.num / sigma2_.den)) + 1;
}

std::int64_t DiscreteGaussianNoise::Sample(BitGen& gen) const {
  const u128 a = sigma2_.num;
  const u128 b = sigma2_.den;
  const u128 t = t_;
  // Accept Y ~ DLap(t) with probability exp(-(|Y| - sigma2/t)^2 / (2 sigma2))
  // = exp(-(|Y| b t - a)^2 / (2 a b t^2)).
  u128 bt, two_a, two_ab, den;
  if (MulOverflows(b, t, &bt) || MulOverflows(a, 2, &two_a) ||
      MulOverflows(two_a, b, &two_ab) || MulOverflows(two_ab, t * t, &den)) {
    // Unreachable for the documented scale range.
    return 0;
  }
  while (true) {
    const std::int64_t y = DiscreteLaplace(t_, gen);
    const u128 abs_y =
        y < 0 ? static_cast<u128>(-static_cast<__int128>(y)) : u128(y);
    u128 ybt;
    if (MulOverflows(abs_y, bt, &ybt)) continue;
    const u128 diff = ybt >= a ? ybt - a : a - ybt;
    u128 num;
    // Candidates this far out are accepted with probability below 2^-60.
    if (MulOverflows(diff, diff, &num)) continue;
    if (BernoulliExpNeg(Ratio{num, den}, gen)) return y;
  }
}

}  // namespace dgrisk::exact
