#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ddlab {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used to turn purpose tags into integers.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Combine a parent seed with one more word:
///   mix(a, b) = splitmix64(a ^ splitmix64(b))
/// Every derived stream in the library is a left fold of `mix` over
/// (master seed, fnv1a(tag), index...), so streams never depend on the
/// order in which workers run.
constexpr Seed mix(Seed a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

constexpr Seed derive(Seed master, std::string_view tag) { return mix(master, fnv1a(tag)); }

constexpr Seed derive(Seed master, std::string_view tag, std::uint64_t i) {
  return mix(derive(master, tag), i);
}

constexpr Seed derive(Seed master, std::string_view tag, std::uint64_t i, std::uint64_t j) {
  return mix(derive(master, tag, i), j);
}

inline Engine make_engine(Seed seed) { return Engine(seed); }

}  // namespace ddlab
