#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace arith {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <class T>
std::uint64_t hash_tokens(std::uint64_t seed, std::span<const T> tokens) {
  std::uint64_t h = mix64(seed);
  for (const auto& t : tokens) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(t)));
  return mix64(h ^ tokens.size());
}

// Independent stream seed for the index-th repetition of a seeded run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0,1) with 53 random bits.
constexpr double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Uniform double in (0,1).
constexpr double open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline double uniform01(std::mt19937_64& rng) { return unit_from_bits(rng()); }

}  // namespace arith
