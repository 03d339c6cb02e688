#pragma once

#include <cstdint>
#include <string_view>

namespace adrec::util {

/// FNV-1a; stable across platforms and standard libraries, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// splitmix64 finalizer; used to derive independent per-key decisions from a
/// seed without constructing an engine.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double unit_from_hash(std::uint64_t h) { return (h >> 11) * 0x1.0p-53; }

}  // namespace adrec::util
