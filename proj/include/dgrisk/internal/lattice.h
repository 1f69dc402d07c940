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

#ifndef DGRISK_INTERNAL_LATTICE_H_
#define DGRISK_INTERNAL_LATTICE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace dgrisk::internal {

// Windows wider than this are summed on a coarser sub-lattice.
inline constexpr std::int64_t kMaxLatticePoints = std::int64_t{1} << 21;

inline double LogSumExp(double a, double b) {
  const double m = std::max(a, b);
  if (std::isinf(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// exp(l) / (1 + exp(l)) without overflow.
inline double Logistic(double l) {
  if (l >= 0) return 1 / (1 + std::exp(-l));
  const double e = std::exp(l);
  return e / (1 + e);
}

inline double Logit(double p) { return std::log(p) - std::log1p(-p); }

// Sums f(k) over integers k in [center - radius, center + radius]. For very
// wide windows (scales around 1e10 and above) the sum is evaluated on every
// h-th point and multiplied by h; f is then a smooth product of a Gaussian of
// width ~radius/10 and a slowly varying factor, so the trapezoid rule is
// accurate to far below double precision.
template <typename F>
double SumWindow(std::int64_t center, std::int64_t radius, F&& f) {
  const std::int64_t stride =
      std::max<std::int64_t>(1, (2 * radius + 1) / kMaxLatticePoints);
  const std::int64_t steps = radius / stride;
  double sum = 0;
  for (std::int64_t j = -steps; j <= steps; ++j) {
    sum += f(center + j * stride);
  }
  return sum * static_cast<double>(stride);
}

}  // namespace dgrisk::internal

#endif  // DGRISK_INTERNAL_LATTICE_H_
