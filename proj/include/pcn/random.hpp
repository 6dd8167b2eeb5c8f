#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pcn {

using Rng = std::mt19937_64;

// Independent stream for (seed, tags...). Used to give every round / batch
// its own reproducible generator.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (auto t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq full(words.begin(), words.end());
  return Rng(full);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  for (;;) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u > 0.0) return u;
  }
}

}  // namespace pcn
