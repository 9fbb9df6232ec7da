#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cobble {

// Scalar kinds of the supported C subset, LP64 mapping (long == 64 bit).
enum class Scalar : uint8_t { I8, I16, I32, I64, U8, U16, U32, U64, F32, F64, Void };

using int128 = __int128;
using uint128 = unsigned __int128;

bool scalar_is_integer(Scalar s);
bool scalar_is_signed(Scalar s);   // true only for signed integers
bool scalar_is_float(Scalar s);
int scalar_bit_width(Scalar s);
const char* scalar_tag(Scalar s);  // "i32", "u8", "f64", "void"
std::optional<Scalar> scalar_from_tag(std::string_view tag);
std::string scalar_c_type(Scalar s);  // "int", "unsigned char", ...

int128 scalar_min(Scalar s);  // integer scalars only
int128 scalar_max(Scalar s);
bool value_fits(Scalar s, int128 v);
// Wraps v into the value range of unsigned scalar s (mod 2^width).
int128 wrap_unsigned(Scalar s, int128 v);

// C integer promotion: types narrower than int widen to int.
Scalar scalar_promote(Scalar s);
// Usual arithmetic conversions over promoted integer operands (LP64).
Scalar scalar_usual_arith(Scalar a, Scalar b);

struct RecordType;

// Structural type descriptor. Instances live in a TypePool and are
// compared by pointer within one pool.
struct TypeDesc {
  enum class Kind : uint8_t { Scalar, Pointer, Array, Record };
  Kind kind = Kind::Scalar;
  Scalar scalar = Scalar::Void;    // Kind::Scalar
  const TypeDesc* elem = nullptr;  // Pointer / Array element
  long long array_len = 0;         // Array
  const RecordType* record = nullptr;

  bool is_scalar() const { return kind == Kind::Scalar; }
  bool is_void() const { return is_scalar() && scalar == Scalar::Void; }
  bool is_integer() const { return is_scalar() && scalar_is_integer(scalar); }
  bool is_float() const { return is_scalar() && scalar_is_float(scalar); }
  bool is_arith() const { return is_integer() || is_float(); }
  bool is_pointer() const { return kind == Kind::Pointer; }
  bool is_array() const { return kind == Kind::Array; }
  bool is_record() const { return kind == Kind::Record; }
  // Numeric, or pointer to numeric: the admissible signature types.
  bool is_numeric_or_ptr() const;
};

struct RecordField {
  std::string name;
  const TypeDesc* type = nullptr;
};

struct RecordType {
  std::string tag;  // may be empty for typedef'd anonymous structs
  std::vector<RecordField> fields;
  const RecordField* find(std::string_view name) const;
};

// Owns all TypeDesc/RecordType instances of one parsed unit.
class TypePool {
 public:
  const TypeDesc* scalar(Scalar s);
  const TypeDesc* pointer(const TypeDesc* elem);
  const TypeDesc* array(const TypeDesc* elem, long long n);
  const TypeDesc* record(const RecordType* r);
  RecordType* make_record(std::string tag);

 private:
  std::deque<TypeDesc> types_;
  std::deque<RecordType> records_;
};

// Renders a C declaration: type_c_text(int*, "p") == "int *p",
// type_c_text(int[3], "a") == "int a[3]". Empty declarator gives the
// abstract type as used in casts.
std::string type_c_text(const TypeDesc* t, const std::string& declarator = "");

// A concrete runtime value of scalar type. Integers are held exactly;
// floats keep the double payload (f32 stored widened, bit pattern taken
// from the float value).
struct ScalarValue {
  Scalar type = Scalar::I32;
  long long i = 0;
  unsigned long long u = 0;
  double f = 0.0;

  static ScalarValue of_int(Scalar t, int128 v);  // must fit t
  static ScalarValue of_float(Scalar t, double v);

  int128 exact() const;        // integer scalars only
  std::string decimal() const; // canonical decimal text
  std::string bits_hex() const;  // float bit pattern, "" for integers
  bool same_value(const ScalarValue& o) const;  // bit-exact for floats
};

std::optional<ScalarValue> parse_scalar_value(Scalar t, std::string_view decimal,
                                              std::string_view bits_hex = {});

// Renders a 128-bit integer in decimal (used for values outside 64-bit
// printf range during exact arithmetic checks).
std::string int128_to_string(int128 v);

// C source literal reproducing the value exactly. Signed values stay in
// int/long long territory (INT_MIN forms spelled as "(-max - 1)"),
// unsigned values carry ULL, floats keep a decimal point (F32 suffixed
// f). Negative literals come parenthesized so they can be spliced into
// any expression context.
std::string c_literal(const ScalarValue& v);

}  // namespace cobble
