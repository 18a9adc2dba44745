// Copyright 2026 The beliefplay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BELIEFPLAY_RANDOM_H_
#define BELIEFPLAY_RANDOM_H_

#include <cstdint>
#include <random>

namespace beliefplay {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Seed of run `index` under `master`. Stable across platforms.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index);

// Uniform in [0, 1) and standard normal. Written out rather than using the
// std distributions so draws do not depend on the standard library.
double Uniform01(Rng& rng);
double StandardNormal(Rng& rng);

}  // namespace beliefplay

#endif  // BELIEFPLAY_RANDOM_H_
