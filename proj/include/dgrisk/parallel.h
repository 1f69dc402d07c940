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

#ifndef DGRISK_PARALLEL_H_
#define DGRISK_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace dgrisk {

// Number of hardware threads, at least 1.
int DefaultWorkers();

// Calls fn(i) for every i in [0, n) on up to `workers` threads. Tasks are
// handed out dynamically; callers make results independent of scheduling by
// writing task i's output to slot i.
void ParallelFor(std::int64_t n, int workers,
                 const std::function<void(std::int64_t)>& fn);

}  // namespace dgrisk

#endif  // DGRISK_PARALLEL_H_
