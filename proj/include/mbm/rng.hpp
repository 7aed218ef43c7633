// Seed derivation and engine construction. Every stochastic routine takes an
// explicit 64-bit seed; replication streams are derived by counter-based
// mixing so that parallel execution order cannot change results.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mbm::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, for folding scenario names and the like into a seed.
inline std::uint64_t hash64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(derive(seed, a), b);
}
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
  return derive(derive(seed, a, b), c);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace mbm::rng
