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

#include "dgrisk/random.h"

#include <cstdint>
#include <random>

namespace dgrisk {
namespace {

constexpr std::uint32_t kDomainTag = 0x64677273;  // "dgrs"

std::uint32_t Low(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t High(std::uint64_t v) {
  return static_cast<std::uint32_t>(v >> 32);
}

}  // namespace

BitGen MakeBitGen(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{kDomainTag, Low(seed), High(seed), Low(stream),
                    High(stream)};
  return BitGen(seq);
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  BitGen gen = MakeBitGen(seed, stream);
  gen.discard(1);
  return gen();
}

double UniformUnit(BitGen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace dgrisk
