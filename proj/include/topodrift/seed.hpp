// Copyright 2026 The topodrift Authors.
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

#ifndef TOPODRIFT_SEED_HPP_
#define TOPODRIFT_SEED_HPP_

#include <cstdint>

namespace topodrift {

// Purpose tags for seed derivation. Each consumer of randomness draws from
// its own child stream so adding draws in one place never shifts another.
enum class SeedPurpose : std::uint64_t {
  kInit = 1,
  kTrain = 2,
  kContinual = 3,
  kStream = 4,
  kPca = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for (purpose, counter) under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, SeedPurpose purpose,
                                 std::uint64_t counter = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(purpose))) +
                    counter);
}

}  // namespace topodrift

#endif  // TOPODRIFT_SEED_HPP_
