#include "clisp/types.hpp"

namespace clisp {

Type Type::ptr(Type pointee) {
  Type t(Kind::Ptr);
  t.pointee_ = std::make_shared<const Type>(std::move(pointee));
  return t;
}

Type Type::named_struct(std::string name) {
  Type t(Kind::Struct);
  t.name_ = std::move(name);
  return t;
}

int Type::bit_width() const {
  switch (kind_) {
    case Kind::Int8: return 8;
    case Kind::Int: return 32;
    case Kind::Int64: return 64;
    case Kind::Float32: return 32;
    case Kind::Float64: return 64;
    default: return 0;
  }
}

const Type& Type::pointee() const {
  if (!pointee_) throw InternalError("pointee() on non-pointer type " + to_string(*this));
  return *pointee_;
}

const std::string& Type::struct_name() const {
  if (kind_ != Kind::Struct) throw InternalError("struct_name() on " + to_string(*this));
  return name_;
}

bool Type::operator==(const Type& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ == Kind::Ptr) return *pointee_ == *other.pointee_;
  if (kind_ == Kind::Struct) return name_ == other.name_;
  return true;
}

std::string to_string(const Type& type) { return print_sexpr(to_sexpr(type)); }

SExpr to_sexpr(const Type& type) {
  switch (type.kind()) {
    case Type::Kind::Void: return SExpr::symbol("void");
    case Type::Kind::Int8: return SExpr::symbol("int8");
    case Type::Kind::Int: return SExpr::symbol("int");
    case Type::Kind::Int64: return SExpr::symbol("int64");
    case Type::Kind::Float32: return SExpr::symbol("float32");
    case Type::Kind::Float64: return SExpr::symbol("float64");
    case Type::Kind::Ptr: return SExpr::list({SExpr::symbol("ptr"), to_sexpr(type.pointee())});
    case Type::Kind::Struct: return SExpr::symbol(type.struct_name());
  }
  throw InternalError("unreachable");
}

std::optional<Type> type_from_sexpr(const SExpr& expr) {
  if (expr.is_symbol()) {
    const std::string& name = expr.text();
    if (name == "void") return Type::void_type();
    if (name == "int8") return Type::int8();
    if (name == "int") return Type::int32();
    if (name == "int64") return Type::int64();
    if (name == "float32") return Type::float32();
    if (name == "float64") return Type::float64();
    if (name == "ptr") return std::nullopt;
    return Type::named_struct(name);
  }
  if (expr.is_form("ptr") && expr.items().size() == 2) {
    auto pointee = type_from_sexpr(expr.items()[1]);
    if (!pointee) return std::nullopt;
    return Type::ptr(std::move(*pointee));
  }
  return std::nullopt;
}

}  // namespace clisp
