#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clisp/sexpr.hpp"
#include "clisp/types.hpp"

namespace clisp {

// Expression opcodes that map one-to-one onto an LLVM instruction.
enum class Opcode {
  Add, Sub, Mul, SDiv,
  FAdd, FSub, FMul, FDiv,
  Eq, Ne, Slt, Sgt, Sle, Sge,
  Sext, Trunc, SIToFP, FPToSI,
};

const char* opcode_name(Opcode op);
bool is_integer_arith(Opcode op);
bool is_float_arith(Opcode op);
bool is_comparison(Opcode op);
bool is_cast(Opcode op);

struct Expr {
  enum class Kind { IntLiteral, FloatLiteral, StringLiteral, Variable, Binary, Compare, Cast, Load, Call, AddressOf };

  Kind kind = Kind::IntLiteral;
  Opcode op = Opcode::Add;     // Binary, Compare, Cast
  std::int64_t int_value = 0;  // IntLiteral
  double float_value = 0;      // FloatLiteral
  std::string name;            // Variable, AddressOf, Call callee, StringLiteral text
  std::vector<Expr> operands;
  std::optional<Type> cast_to;  // Cast
  std::optional<Type> type;     // set by typecheck
  std::optional<SourcePosition> pos;
};

struct Stmt {
  enum class Kind { Declare, Set, Store, Call, Return, If, While, Block };

  Kind kind = Kind::Block;
  std::string name;               // Declare, Set
  std::optional<Type> declared;   // Declare
  // Set: {value}; Store: {pointer, value}; Call: {call}; Return: {} or
  // {value}; If/While: {condition}.
  std::vector<Expr> exprs;
  std::vector<Stmt> body;         // If then-branch, While body, Block
  std::vector<Stmt> else_body;    // If
  bool has_else = false;
  std::optional<SourcePosition> pos;
};

struct Param {
  std::string name;
  Type type;
  bool operator==(const Param&) const = default;
};

struct FunctionSig {
  std::string name;
  Type return_type;
  std::vector<Param> params;
  bool variadic = false;
  std::optional<SourcePosition> pos;

  // Same name, return type and parameter types; parameter names may differ.
  bool same_signature(const FunctionSig& other) const;
};

struct FunctionDef {
  FunctionSig sig;
  std::vector<Stmt> body;
};

struct StructDef {
  std::string name;
  std::vector<Param> fields;
  std::optional<SourcePosition> pos;
};

struct Module {
  std::vector<StructDef> structs;
  std::vector<FunctionSig> externs;
  std::vector<FunctionDef> functions;
};

// A module that passed typecheck: every Expr carries its type.
struct TypedModule {
  Module module;

  const FunctionSig* find_signature(const std::string& name) const;
};

struct TypeError {
  std::optional<SourcePosition> pos;
  std::string function;
  std::string message;
  std::optional<Type> expected;
  std::optional<Type> actual;

  std::string to_string() const;
};

struct CheckResult {
  std::optional<TypedModule> module;
  std::vector<TypeError> errors;

  bool ok() const { return errors.empty(); }
};

/// Builds the module AST from fully expanded forms. Throws ParseError on an
/// unknown head, wrong arity, a non-symbol in name position, or a leftover
/// macro node.
Module parse_module(std::span<const SExpr> forms);

/// Infers a type for every expression under C-modelled rules with no
/// implicit conversions. Errors are collected, not thrown.
CheckResult typecheck(Module module);

// (declare-fn name ((p type)...) ret)
SExpr to_sexpr(const FunctionSig& sig);
// (struct Name (field type)...)
SExpr to_sexpr(const StructDef& def);

}  // namespace clisp
