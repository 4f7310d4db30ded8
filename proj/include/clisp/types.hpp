#pragma once

#include <memory>
#include <optional>
#include <string>

#include "clisp/sexpr.hpp"

namespace clisp {

/// A C-Lisp type: void, int8, int (32-bit), int64, float32, float64,
/// pointer to T, or a struct referenced by name. Equality is structural
/// except for structs, which compare by name.
class Type {
 public:
  enum class Kind { Void, Int8, Int, Int64, Float32, Float64, Ptr, Struct };

  Type() = default;

  static Type void_type() { return Type(Kind::Void); }
  static Type int8() { return Type(Kind::Int8); }
  static Type int32() { return Type(Kind::Int); }
  static Type int64() { return Type(Kind::Int64); }
  static Type float32() { return Type(Kind::Float32); }
  static Type float64() { return Type(Kind::Float64); }
  static Type ptr(Type pointee);
  static Type named_struct(std::string name);

  Kind kind() const { return kind_; }
  bool is_void() const { return kind_ == Kind::Void; }
  bool is_integer() const { return kind_ == Kind::Int8 || kind_ == Kind::Int || kind_ == Kind::Int64; }
  bool is_float() const { return kind_ == Kind::Float32 || kind_ == Kind::Float64; }
  bool is_ptr() const { return kind_ == Kind::Ptr; }
  bool is_struct() const { return kind_ == Kind::Struct; }

  // Bit width of an integer or float type, 0 otherwise.
  int bit_width() const;
  const Type& pointee() const;
  const std::string& struct_name() const;

  bool operator==(const Type& other) const;

 private:
  explicit Type(Kind kind) : kind_(kind) {}

  Kind kind_ = Kind::Void;
  std::shared_ptr<const Type> pointee_;
  std::string name_;
};

// Surface syntax: `int64`, `(ptr int8)`, `MyStruct`.
std::string to_string(const Type& type);
SExpr to_sexpr(const Type& type);

// Reads the surface syntax. Unknown bare names are taken as struct names;
// whether such a struct exists is checked later. Returns nullopt on a form
// that cannot be a type.
std::optional<Type> type_from_sexpr(const SExpr& expr);

}  // namespace clisp
