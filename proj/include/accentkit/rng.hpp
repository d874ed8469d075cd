// include/accentkit/rng.hpp
//
// Copyright 2026 The accentkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Portable seeded randomness. std::mt19937_64's output sequence is fixed by
// the standard; the distributions in <random> are not, so bounded draws are
// done here by hand.

#ifndef ACCENTKIT_RNG_HPP_
#define ACCENTKIT_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace accentkit {

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Engine seeded from (seed, key); independent of any other key's draws.
inline std::mt19937_64 KeyedEngine(uint64_t seed, std::string_view key) {
  return std::mt19937_64(SplitMix64(seed ^ SplitMix64(Fnv1a(key))));
}

// Uniform integer in [0, n), n >= 1, by rejection.
inline uint64_t UniformIndex(std::mt19937_64 &eng, uint64_t n) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(std::mt19937_64 &eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <class T>
void SeededShuffle(std::vector<T> &v, std::mt19937_64 &eng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(UniformIndex(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace accentkit

#endif  // ACCENTKIT_RNG_HPP_
