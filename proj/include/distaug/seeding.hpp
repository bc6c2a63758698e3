// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_SEEDING_HPP_
#define DISTAUG_SEEDING_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace distaug {

// FNV-1a over the tag folded into the seed. Stable across platforms and
// standard libraries, unlike std::hash; every derived stream in the
// toolkit goes through this so outputs do not depend on worker count or
// record order.
inline uint64_t stable_hash64(uint64_t seed, std::string_view tag) {
  uint64_t h = 14695981039346656037ull ^ seed;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform double in [0, 1) from the top 53 bits of the generator output;
// identical sequences on every standard library.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace distaug

#endif  // DISTAUG_SEEDING_HPP_
