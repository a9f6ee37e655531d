//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_RANDOM_H_
#define MSAN_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace msan {

// std::mt19937_64 output is fixed by the standard but the std::*_distribution
// adaptors are not, so all draws go through the helpers below to keep
// seeded runs bit-identical across standard libraries.
using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

inline bool bernoulli(Rng &rng, double p) {
  return uniform01(rng) < p;
}

// Box-Muller; one normal per call.
double standard_normal(Rng &rng);

template <class T, std::size_t Extent>
void shuffle(std::span<T, Extent> items, Rng &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Derives an independent stream from a root seed and a purpose tag.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace msan

#endif  // MSAN_RANDOM_H_
