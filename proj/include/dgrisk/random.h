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

#ifndef DGRISK_RANDOM_H_
#define DGRISK_RANDOM_H_

#include <cstdint>
#include <random>

namespace dgrisk {

// All stochastic code takes this engine explicitly.
using BitGen = std::mt19937_64;

// Returns an engine for stream `stream` of master seed `seed`. Distinct
// (seed, stream) pairs give statistically independent sequences, so a worker,
// sweep point or trial chunk can own a stream without coordination.
BitGen MakeBitGen(std::uint64_t seed, std::uint64_t stream = 0);

// Derives a child seed, used when a sweep point hands a seed to a module that
// splits it further.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) with 53 random bits.
double UniformUnit(BitGen& gen);

}  // namespace dgrisk

#endif  // DGRISK_RANDOM_H_
