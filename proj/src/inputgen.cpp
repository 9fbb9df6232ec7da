#include "cobble/inputgen.hpp"

#include <cmath>
#include <stdexcept>

namespace cobble {

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  SplitMix64 s(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^
               (b * 0xd1b54a32d192ed03ULL));
  return s.next();
}

FnShape shape_of(const std::vector<const TypeDesc*>& params,
                 const TypeDesc* ret) {
  FnShape shape;
  for (const TypeDesc* p : params) {
    ParamShape ps;
    if (p->is_pointer()) {
      ps.is_buffer = true;
      ps.scalar = p->elem->scalar;
    } else {
      ps.scalar = p->scalar;
    }
    shape.params.push_back(ps);
  }
  shape.ret = ret->scalar;
  return shape;
}

static ScalarValue unit_value(Scalar t, SplitMix64& rng) {
  bool flip = rng.next() & 1;
  if (scalar_is_float(t)) return ScalarValue::of_float(t, flip ? -1.0 : 1.0);
  if (scalar_is_signed(t)) return ScalarValue::of_int(t, flip ? -1 : 1);
  return ScalarValue::of_int(t, flip ? scalar_max(t) : 1);
}

static ScalarValue small_value(Scalar t, SplitMix64& rng) {
  if (scalar_is_float(t)) {
    long long v = (long long)rng.below(33) - 16;
    return ScalarValue::of_float(t, (double)v);
  }
  if (scalar_is_signed(t)) {
    return ScalarValue::of_int(t, (int128)((long long)rng.below(33) - 16));
  }
  return ScalarValue::of_int(t, (int128)rng.below(17));
}

static ScalarValue boundary_value(Scalar t, SplitMix64& rng) {
  if (scalar_is_float(t)) {
    static const double vals[] = {0.0, 1.0, -1.0, 0.5, -0.5, 1048576.0,
                                  -1048576.0};
    return ScalarValue::of_float(t, vals[rng.below(7)]);
  }
  int128 lo = scalar_min(t), hi = scalar_max(t);
  int128 opts[4] = {lo, hi, lo + 1, hi - 1};
  return ScalarValue::of_int(t, opts[rng.below(4)]);
}

static ScalarValue uniform_value(Scalar t, SplitMix64& rng) {
  if (scalar_is_float(t)) {
    // Integer-valued within +/-2^20: exact in float and double, so the
    // observed bit patterns are free of rounding noise.
    long long v = (long long)rng.below(2097153) - 1048576;
    return ScalarValue::of_float(t, (double)v);
  }
  uint64_t bits = rng.next();
  int w = scalar_bit_width(t);
  if (w < 64) bits &= (1ULL << w) - 1;
  if (scalar_is_signed(t)) {
    // Reinterpret the masked bits as two's complement of width w.
    int128 v = (int128)bits;
    if (w < 64 && (bits >> (w - 1)) & 1) v -= (int128)1 << w;
    if (w == 64) v = (int128)(int64_t)bits;
    return ScalarValue::of_int(t, v);
  }
  return ScalarValue::of_int(t, (int128)bits);
}

ScalarValue mixture_value(Scalar t, ValueClass cls, SplitMix64& rng) {
  switch (cls) {
    case ValueClass::Unit: return unit_value(t, rng);
    case ValueClass::Zero:
      return scalar_is_float(t) ? ScalarValue::of_float(t, 0.0)
                                : ScalarValue::of_int(t, 0);
    case ValueClass::Small: return small_value(t, rng);
    case ValueClass::Boundary: return boundary_value(t, rng);
    case ValueClass::Uniform: return uniform_value(t, rng);
  }
  return ScalarValue::of_int(Scalar::I32, 0);
}

static ValueClass rotate(int attempt, int slot) {
  return (ValueClass)(((attempt % kValueClassCount) + slot) %
                      kValueClassCount);
}

InputVector generate_input(const FnShape& sig, uint64_t seed, int attempt) {
  SplitMix64 rng(mix_seed(seed, (uint64_t)attempt, 0x1e9e));
  InputVector out;
  for (size_t i = 0; i < sig.params.size(); i++) {
    const ParamShape& p = sig.params[i];
    InputValue v;
    if (p.is_buffer) {
      v.is_buffer = true;
      v.elem = p.scalar;
      size_t len = 1 + rng.below(8);
      for (size_t j = 0; j < len; j++) {
        v.elements.push_back(
            mixture_value(p.scalar, rotate(attempt, (int)(i + j)), rng));
      }
    } else {
      v.scalar = mixture_value(p.scalar, rotate(attempt, (int)i), rng);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace cobble
