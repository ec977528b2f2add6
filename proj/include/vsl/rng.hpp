#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vsl::rng {

// splitmix64 finalizer. Bijective, so distinct inputs stay distinct.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Derives the seed of a named child stream. Every random draw in the
// library comes from a stream named this way off one root seed, so runs
// are reproducible and adding a new consumer never shifts an old one.
inline std::uint64_t derive(std::uint64_t root, std::string_view label,
                            std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix(root ^ mix(hash_label(label)));
  h = mix(h ^ mix(a + 0x9e3779b97f4a7c15ull));
  h = mix(h ^ mix(b + 0xd1b54a32d192ed03ull));
  return h;
}

inline std::mt19937_64 stream(std::uint64_t root, std::string_view label,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive(root, label, a, b));
}

}  // namespace vsl::rng
