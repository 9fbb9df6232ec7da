#include "cobble/types.hpp"

#include <cassert>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace cobble {

bool scalar_is_integer(Scalar s) {
  switch (s) {
    case Scalar::I8: case Scalar::I16: case Scalar::I32: case Scalar::I64:
    case Scalar::U8: case Scalar::U16: case Scalar::U32: case Scalar::U64:
      return true;
    default:
      return false;
  }
}

bool scalar_is_signed(Scalar s) {
  switch (s) {
    case Scalar::I8: case Scalar::I16: case Scalar::I32: case Scalar::I64:
      return true;
    default:
      return false;
  }
}

bool scalar_is_float(Scalar s) { return s == Scalar::F32 || s == Scalar::F64; }

int scalar_bit_width(Scalar s) {
  switch (s) {
    case Scalar::I8: case Scalar::U8: return 8;
    case Scalar::I16: case Scalar::U16: return 16;
    case Scalar::I32: case Scalar::U32: case Scalar::F32: return 32;
    case Scalar::I64: case Scalar::U64: case Scalar::F64: return 64;
    case Scalar::Void: return 0;
  }
  return 0;
}

const char* scalar_tag(Scalar s) {
  switch (s) {
    case Scalar::I8: return "i8";
    case Scalar::I16: return "i16";
    case Scalar::I32: return "i32";
    case Scalar::I64: return "i64";
    case Scalar::U8: return "u8";
    case Scalar::U16: return "u16";
    case Scalar::U32: return "u32";
    case Scalar::U64: return "u64";
    case Scalar::F32: return "f32";
    case Scalar::F64: return "f64";
    case Scalar::Void: return "void";
  }
  return "?";
}

std::optional<Scalar> scalar_from_tag(std::string_view tag) {
  static const std::pair<const char*, Scalar> table[] = {
      {"i8", Scalar::I8},   {"i16", Scalar::I16}, {"i32", Scalar::I32},
      {"i64", Scalar::I64}, {"u8", Scalar::U8},   {"u16", Scalar::U16},
      {"u32", Scalar::U32}, {"u64", Scalar::U64}, {"f32", Scalar::F32},
      {"f64", Scalar::F64}, {"void", Scalar::Void},
  };
  for (const auto& [name, s] : table)
    if (tag == name) return s;
  return std::nullopt;
}

// Plain char is signed on every target this project drives (x86-64
// gcc/clang), so i8 renders as "char"; that keeps string-literal inits
// and char-pointer flows warning-clean under -Wall.
std::string scalar_c_type(Scalar s) {
  switch (s) {
    case Scalar::I8: return "char";
    case Scalar::I16: return "short";
    case Scalar::I32: return "int";
    case Scalar::I64: return "long long";
    case Scalar::U8: return "unsigned char";
    case Scalar::U16: return "unsigned short";
    case Scalar::U32: return "unsigned int";
    case Scalar::U64: return "unsigned long long";
    case Scalar::F32: return "float";
    case Scalar::F64: return "double";
    case Scalar::Void: return "void";
  }
  return "?";
}

int128 scalar_min(Scalar s) {
  if (!scalar_is_signed(s)) return 0;
  return -(int128(1) << (scalar_bit_width(s) - 1));
}

int128 scalar_max(Scalar s) {
  assert(scalar_is_integer(s));
  if (scalar_is_signed(s)) return (int128(1) << (scalar_bit_width(s) - 1)) - 1;
  return (int128(1) << scalar_bit_width(s)) - 1;
}

bool value_fits(Scalar s, int128 v) {
  return v >= scalar_min(s) && v <= scalar_max(s);
}

int128 wrap_unsigned(Scalar s, int128 v) {
  assert(scalar_is_integer(s) && !scalar_is_signed(s));
  uint128 mod = uint128(1) << scalar_bit_width(s);
  uint128 uv = uint128(v);  // two's complement wrap for negatives
  return int128(uv % mod);
}

Scalar scalar_promote(Scalar s) {
  if (scalar_is_float(s)) return s;
  if (scalar_bit_width(s) < 32) return Scalar::I32;  // all narrow types fit int
  return s;
}

Scalar scalar_usual_arith(Scalar a, Scalar b) {
  if (a == Scalar::F64 || b == Scalar::F64) return Scalar::F64;
  if (a == Scalar::F32 || b == Scalar::F32) {
    if (scalar_is_float(a) && scalar_is_float(b)) return Scalar::F32;
    return Scalar::F32;
  }
  a = scalar_promote(a);
  b = scalar_promote(b);
  if (a == b) return a;
  bool sa = scalar_is_signed(a), sb = scalar_is_signed(b);
  int wa = scalar_bit_width(a), wb = scalar_bit_width(b);
  if (sa == sb) return wa >= wb ? a : b;
  Scalar uns = sa ? b : a;
  Scalar sig = sa ? a : b;
  if (scalar_bit_width(uns) >= scalar_bit_width(sig)) return uns;
  // Signed type is strictly wider: it represents all unsigned values.
  return sig;
}

bool TypeDesc::is_numeric_or_ptr() const {
  if (is_arith()) return true;
  if (is_pointer()) return elem && elem->is_arith();
  return false;
}

const RecordField* RecordType::find(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

const TypeDesc* TypePool::scalar(Scalar s) {
  for (const auto& t : types_)
    if (t.kind == TypeDesc::Kind::Scalar && t.scalar == s) return &t;
  TypeDesc t;
  t.kind = TypeDesc::Kind::Scalar;
  t.scalar = s;
  types_.push_back(t);
  return &types_.back();
}

const TypeDesc* TypePool::pointer(const TypeDesc* elem) {
  for (const auto& t : types_)
    if (t.kind == TypeDesc::Kind::Pointer && t.elem == elem) return &t;
  TypeDesc t;
  t.kind = TypeDesc::Kind::Pointer;
  t.elem = elem;
  types_.push_back(t);
  return &types_.back();
}

const TypeDesc* TypePool::array(const TypeDesc* elem, long long n) {
  for (const auto& t : types_)
    if (t.kind == TypeDesc::Kind::Array && t.elem == elem && t.array_len == n)
      return &t;
  TypeDesc t;
  t.kind = TypeDesc::Kind::Array;
  t.elem = elem;
  t.array_len = n;
  types_.push_back(t);
  return &types_.back();
}

const TypeDesc* TypePool::record(const RecordType* r) {
  for (const auto& t : types_)
    if (t.kind == TypeDesc::Kind::Record && t.record == r) return &t;
  TypeDesc t;
  t.kind = TypeDesc::Kind::Record;
  t.record = r;
  types_.push_back(t);
  return &types_.back();
}

RecordType* TypePool::make_record(std::string tag) {
  records_.emplace_back();
  records_.back().tag = std::move(tag);
  return &records_.back();
}

std::string type_c_text(const TypeDesc* t, const std::string& declarator) {
  // Peel arrays from the outside, pointers accumulate stars.
  std::string suffix;
  while (t->is_array()) {
    suffix += "[" + std::to_string(t->array_len) + "]";
    t = t->elem;
  }
  std::string stars;
  while (t->is_pointer()) {
    stars += "*";
    t = t->elem;
  }
  std::string base;
  if (t->is_record())
    base = "struct " + t->record->tag;
  else
    base = scalar_c_type(t->scalar);
  std::string out = base;
  if (!stars.empty() || !declarator.empty() || !suffix.empty()) {
    out += " " + stars + declarator + suffix;
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

ScalarValue ScalarValue::of_int(Scalar t, int128 v) {
  assert(scalar_is_integer(t) && value_fits(t, v));
  ScalarValue sv;
  sv.type = t;
  if (scalar_is_signed(t))
    sv.i = (long long)v;
  else
    sv.u = (unsigned long long)v;
  return sv;
}

ScalarValue ScalarValue::of_float(Scalar t, double v) {
  assert(scalar_is_float(t));
  ScalarValue sv;
  sv.type = t;
  sv.f = (t == Scalar::F32) ? (double)(float)v : v;
  return sv;
}

int128 ScalarValue::exact() const {
  assert(scalar_is_integer(type));
  return scalar_is_signed(type) ? int128(i) : int128(u);
}

std::string ScalarValue::decimal() const {
  char buf[64];
  if (scalar_is_float(type)) {
    if (type == Scalar::F32)
      snprintf(buf, sizeof buf, "%.9g", f);
    else
      snprintf(buf, sizeof buf, "%.17g", f);
  } else if (scalar_is_signed(type)) {
    snprintf(buf, sizeof buf, "%lld", i);
  } else {
    snprintf(buf, sizeof buf, "%llu", u);
  }
  return buf;
}

std::string ScalarValue::bits_hex() const {
  char buf[32];
  if (type == Scalar::F32) {
    float g = (float)f;
    uint32_t b;
    memcpy(&b, &g, 4);
    snprintf(buf, sizeof buf, "%08" PRIx32, b);
    return buf;
  }
  if (type == Scalar::F64) {
    uint64_t b;
    memcpy(&b, &f, 8);
    snprintf(buf, sizeof buf, "%016" PRIx64, b);
    return buf;
  }
  return "";
}

bool ScalarValue::same_value(const ScalarValue& o) const {
  if (type != o.type) return false;
  if (scalar_is_float(type)) return bits_hex() == o.bits_hex();
  return exact() == o.exact();
}

std::optional<ScalarValue> parse_scalar_value(Scalar t, std::string_view decimal,
                                              std::string_view bits_hex) {
  std::string s(decimal);
  if (scalar_is_float(t)) {
    // Bit pattern is authoritative when present; decimal is advisory.
    if (!bits_hex.empty()) {
      uint64_t b = strtoull(std::string(bits_hex).c_str(), nullptr, 16);
      ScalarValue sv;
      sv.type = t;
      if (t == Scalar::F32) {
        uint32_t b32 = (uint32_t)b;
        float g;
        memcpy(&g, &b32, 4);
        sv.f = g;
      } else {
        memcpy(&sv.f, &b, 8);
      }
      return sv;
    }
    errno = 0;
    char* end = nullptr;
    double v = strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return ScalarValue::of_float(t, v);
  }
  errno = 0;
  char* end = nullptr;
  if (scalar_is_signed(t)) {
    long long v = strtoll(s.c_str(), &end, 10);
    if (errno || end != s.c_str() + s.size() || !value_fits(t, v)) return std::nullopt;
    return ScalarValue::of_int(t, v);
  }
  if (!s.empty() && s[0] == '-') return std::nullopt;
  unsigned long long v = strtoull(s.c_str(), &end, 10);
  if (errno || end != s.c_str() + s.size() || !value_fits(t, int128(v))) return std::nullopt;
  return ScalarValue::of_int(t, int128(v));
}

std::string int128_to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  uint128 uv = neg ? uint128(-(v + 1)) + 1 : uint128(v);
  std::string out;
  while (uv) {
    out.insert(out.begin(), char('0' + int(uv % 10)));
    uv /= 10;
  }
  return neg ? "-" + out : out;
}

std::string c_literal(const ScalarValue& v) {
  if (scalar_is_float(v.type)) {
    std::string d = v.decimal();
    if (d.find_first_of(".eE") == std::string::npos) d += ".0";
    if (v.type == Scalar::F32) d += "f";
    return d;
  }
  if (!scalar_is_signed(v.type)) return v.decimal() + "ULL";
  long long x = v.i;
  if (x == -9223372036854775807LL - 1) return "(-9223372036854775807LL - 1)";
  if (x == -2147483648LL) return "(-2147483647 - 1)";
  bool wide = x > 2147483647LL || x < -2147483648LL;
  std::string d = v.decimal() + (wide ? "LL" : "");
  return x < 0 ? "(" + d + ")" : d;
}

}  // namespace cobble
