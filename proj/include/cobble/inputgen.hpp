#pragma once

#include <cstdint>
#include <vector>

#include "cobble/types.hpp"

namespace cobble {

// Tiny deterministic generator with identical output on every platform;
// all randomized choices in the pipeline flow through it.
struct SplitMix64 {
  uint64_t state = 0;
  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, n), n >= 1. Modulo bias is irrelevant at our scales
  // and keeping it branch-free keeps streams reproducible.
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
  // Uniform in [0, 1).
  double unit() { return (next() >> 11) * 0x1.0p-53; }
};

// Stirs extra words into a seed so derived streams are independent.
uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0);

// One argument: a scalar, or a buffer a pointer parameter points at.
struct InputValue {
  bool is_buffer = false;
  ScalarValue scalar;                 // when !is_buffer
  Scalar elem = Scalar::I32;          // buffer element type
  std::vector<ScalarValue> elements;  // length 1..8
};

using InputVector = std::vector<InputValue>;

// Flattened signature shape: enough to generate inputs and emit drivers.
struct ParamShape {
  bool is_buffer = false;
  Scalar scalar = Scalar::I32;  // the scalar itself, or the pointee type
};

struct FnShape {
  std::vector<ParamShape> params;
  Scalar ret = Scalar::I32;
};

// Derives the shape from analyzed parameter/return types. Requires the
// signature to be numeric-aligned (scalars and pointers to scalars).
FnShape shape_of(const std::vector<const TypeDesc*>& params,
                 const TypeDesc* ret);

// Value mixture classes, rotated across attempts and positions so that
// early attempts exercise the best-behaved inputs first.
enum class ValueClass : int { Unit = 0, Zero, Small, Boundary, Uniform };
inline constexpr int kValueClassCount = 5;

// One draw from a mixture class. Floats are kept integer-valued within
// float-exact range so profiles replay bit-identically.
ScalarValue mixture_value(Scalar t, ValueClass cls, SplitMix64& rng);

// Deterministic given (seed, attempt). Scalar parameter i draws from
// class (attempt + i) mod 5; buffers get length 1..8 with elements
// rotating the class by element index.
InputVector generate_input(const FnShape& sig, uint64_t seed, int attempt);

}  // namespace cobble
