#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace fleet {

using Rng = std::mt19937_64;

/// Uniform index in [0, n) by rejection, identical on every platform
/// (std::uniform_int_distribution is not).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace fleet
