#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace mcma {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for a named component. The tag is hashed with FNV-1a, then the
// parent seed, tag hash and each index are folded through splitmix64 in turn:
//   s = mix64(parent ^ fnv1a(tag)); for i in indices: s = mix64(s ^ i)
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag,
                                    std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = mix64(parent ^ h);
  for (std::uint64_t i : indices) s = mix64(s ^ i);
  return s;
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
constexpr double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace mcma
