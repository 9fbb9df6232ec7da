#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cobble {

inline constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a64(std::string_view data, uint64_t h = kFnvOffset) {
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Folds one 64-bit word as eight little-endian bytes.
inline uint64_t fnv1a64_word(uint64_t word, uint64_t h) {
  for (int i = 0; i < 8; i++) {
    h ^= (word >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

// 16 lowercase hex digits, zero padded.
inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; i--, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

}  // namespace cobble
