#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mfgame {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, for turning stream labels into seed components.
constexpr std::uint64_t tag(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t base) { return base; }

// Child seed for a labelled sub-stream. Order of components matters.
template <class... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t component, Rest... rest) {
  return derive_seed(mix64(base ^ mix64(component)), static_cast<std::uint64_t>(rest)...);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace mfgame
