#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stvsr {

// Counter-based seed derivation: every consumer of randomness derives its own
// stream from (master seed, purpose tag, counters). Results are independent of
// thread count and evaluation order, which is what makes fixed-seed runs
// reproducible bit for bit.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash_str(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (char ch : s) {
    h ^= uint64_t(uint8_t(ch));
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = splitmix64(seed ^ 0x517cc1b727220a95ull);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t b = 0, uint64_t c = 0) {
  return derive_seed(seed, hash_str(tag), b, c);
}

inline std::mt19937_64 make_rng(uint64_t derived) { return std::mt19937_64(derived); }

}  // namespace stvsr
