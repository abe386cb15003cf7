#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cloudsort {

// Unbiased draw in [0, n). Uses the raw standardized mt19937 stream instead of
// std::uniform_int_distribution, whose output differs between standard library
// implementations; seeded results are therefore reproducible everywhere.
inline std::uint32_t uniform_index(std::mt19937& rng, std::uint32_t n) {
  const std::uint32_t limit = std::mt19937::max() - std::mt19937::max() % n;
  std::uint32_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

// Uniform double in [0, 1) with 32 bits of randomness.
inline double uniform_real01(std::mt19937& rng) {
  return rng() * 0x1.0p-32;
}

inline double uniform_real(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real01(rng);
}

// Fisher-Yates shuffle driven by uniform_index, for the same portability
// reason as above.
template <class T>
void seeded_shuffle(std::vector<T>& items, std::mt19937& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, static_cast<std::uint32_t>(i))]);
  }
}

}  // namespace cloudsort
