#include <algorithm>
#include <array>
#include <utility>

#include "clisp/frontend.hpp"

namespace clisp {

namespace {

struct OpcodeInfo {
  Opcode op;
  std::string_view name;
};

constexpr std::array kOpcodes{
    OpcodeInfo{Opcode::Add, "add"},       OpcodeInfo{Opcode::Sub, "sub"},
    OpcodeInfo{Opcode::Mul, "mul"},       OpcodeInfo{Opcode::SDiv, "sdiv"},
    OpcodeInfo{Opcode::FAdd, "fadd"},     OpcodeInfo{Opcode::FSub, "fsub"},
    OpcodeInfo{Opcode::FMul, "fmul"},     OpcodeInfo{Opcode::FDiv, "fdiv"},
    OpcodeInfo{Opcode::Eq, "eq"},         OpcodeInfo{Opcode::Ne, "ne"},
    OpcodeInfo{Opcode::Slt, "slt"},       OpcodeInfo{Opcode::Sgt, "sgt"},
    OpcodeInfo{Opcode::Sle, "sle"},       OpcodeInfo{Opcode::Sge, "sge"},
    OpcodeInfo{Opcode::Sext, "sext"},     OpcodeInfo{Opcode::Trunc, "trunc"},
    OpcodeInfo{Opcode::SIToFP, "sitofp"}, OpcodeInfo{Opcode::FPToSI, "fptosi"},
};

std::optional<Opcode> find_opcode(std::string_view name) {
  for (const auto& info : kOpcodes)
    if (info.name == name) return info.op;
  return std::nullopt;
}

[[noreturn]] void fail(const SExpr& at, const std::string& message) { throw ParseError(at.position(), message); }

void expect_arity(const SExpr& form, std::size_t operands, const std::string& shape) {
  if (form.items().size() != operands + 1)
    fail(form, "'" + form.items().front().text() + "' takes " + std::to_string(operands) + " operand" +
                   (operands == 1 ? "" : "s") + ": " + shape);
}

const std::string& expect_name(const SExpr& expr, const std::string& what) {
  if (!expr.is_symbol()) fail(expr, what + " must be a symbol, got " + kind_name(expr.kind()) + " " + print_sexpr(expr));
  return expr.text();
}

Type expect_type(const SExpr& expr) {
  auto type = type_from_sexpr(expr);
  if (!type) fail(expr, "malformed type " + print_sexpr(expr));
  return *type;
}

void reject_macro_node(const SExpr& expr) {
  if (expr.is_form("unquote") || expr.is_form("unquote-splicing"))
    fail(expr, "unexpanded macro node " + print_sexpr(expr) + " (run the macro expander first)");
}

Expr parse_expr(const SExpr& sx);

Expr parse_call(const SExpr& sx) {
  const auto& items = sx.items();
  if (items.size() < 2) fail(sx, "'call' needs a function name: (call name args...)");
  Expr e;
  e.kind = Expr::Kind::Call;
  e.pos = sx.position();
  e.name = expect_name(items[1], "callee");
  for (std::size_t i = 2; i < items.size(); ++i) e.operands.push_back(parse_expr(items[i]));
  return e;
}

Expr parse_expr(const SExpr& sx) {
  Expr e;
  e.pos = sx.position();
  switch (sx.kind()) {
    case SExpr::Kind::Integer:
      e.kind = Expr::Kind::IntLiteral;
      e.int_value = sx.as_integer();
      return e;
    case SExpr::Kind::Float:
      e.kind = Expr::Kind::FloatLiteral;
      e.float_value = sx.as_float();
      return e;
    case SExpr::Kind::String:
      e.kind = Expr::Kind::StringLiteral;
      e.name = sx.text();
      return e;
    case SExpr::Kind::Symbol:
      e.kind = Expr::Kind::Variable;
      e.name = sx.text();
      return e;
    case SExpr::Kind::List:
      break;
  }

  reject_macro_node(sx);
  const auto& items = sx.items();
  if (items.empty()) fail(sx, "empty list is not an expression");
  const std::string& head = expect_name(items.front(), "expression opcode");

  if (head == "call") return parse_call(sx);
  if (head == "load") {
    expect_arity(sx, 1, "(load pointer)");
    e.kind = Expr::Kind::Load;
    e.operands.push_back(parse_expr(items[1]));
    return e;
  }
  if (head == "ptr-to") {
    expect_arity(sx, 1, "(ptr-to variable)");
    e.kind = Expr::Kind::AddressOf;
    e.name = expect_name(items[1], "ptr-to operand");
    return e;
  }
  auto op = find_opcode(head);
  if (!op) fail(items.front(), "unknown expression opcode '" + head + "'");
  e.op = *op;
  if (is_cast(*op)) {
    expect_arity(sx, 2, "(" + head + " value type)");
    e.kind = Expr::Kind::Cast;
    e.operands.push_back(parse_expr(items[1]));
    e.cast_to = expect_type(items[2]);
    return e;
  }
  expect_arity(sx, 2, "(" + head + " lhs rhs)");
  e.kind = is_comparison(*op) ? Expr::Kind::Compare : Expr::Kind::Binary;
  e.operands.push_back(parse_expr(items[1]));
  e.operands.push_back(parse_expr(items[2]));
  return e;
}

Stmt parse_stmt(const SExpr& sx);

std::vector<Stmt> parse_stmts(const SExpr::List& items, std::size_t from) {
  std::vector<Stmt> out;
  for (std::size_t i = from; i < items.size(); ++i) out.push_back(parse_stmt(items[i]));
  return out;
}

Stmt parse_stmt(const SExpr& sx) {
  if (!sx.is_list()) fail(sx, "expected a statement, got " + std::string(kind_name(sx.kind())) + " " + print_sexpr(sx));
  reject_macro_node(sx);
  const auto& items = sx.items();
  if (items.empty()) fail(sx, "empty list is not a statement");
  const std::string& head = expect_name(items.front(), "statement head");

  Stmt s;
  s.pos = sx.position();
  if (head == "declare") {
    expect_arity(sx, 2, "(declare name type)");
    s.kind = Stmt::Kind::Declare;
    s.name = expect_name(items[1], "declared name");
    s.declared = expect_type(items[2]);
  } else if (head == "set") {
    expect_arity(sx, 2, "(set name value)");
    s.kind = Stmt::Kind::Set;
    s.name = expect_name(items[1], "assigned name");
    s.exprs.push_back(parse_expr(items[2]));
  } else if (head == "store") {
    expect_arity(sx, 2, "(store pointer value)");
    s.kind = Stmt::Kind::Store;
    s.exprs.push_back(parse_expr(items[1]));
    s.exprs.push_back(parse_expr(items[2]));
  } else if (head == "call") {
    s.kind = Stmt::Kind::Call;
    s.exprs.push_back(parse_call(sx));
  } else if (head == "ret") {
    if (items.size() > 2) fail(sx, "'ret' takes at most one operand: (ret [value])");
    s.kind = Stmt::Kind::Return;
    if (items.size() == 2) s.exprs.push_back(parse_expr(items[1]));
  } else if (head == "if") {
    if (items.size() != 3 && items.size() != 4) fail(sx, "'if' takes a condition and one or two statements: (if cond then [else])");
    s.kind = Stmt::Kind::If;
    s.exprs.push_back(parse_expr(items[1]));
    s.body.push_back(parse_stmt(items[2]));
    if (items.size() == 4) {
      s.has_else = true;
      s.else_body.push_back(parse_stmt(items[3]));
    }
  } else if (head == "while") {
    if (items.size() < 2) fail(sx, "'while' needs a condition: (while cond stmts...)");
    s.kind = Stmt::Kind::While;
    s.exprs.push_back(parse_expr(items[1]));
    s.body = parse_stmts(items, 2);
  } else if (head == "block") {
    s.kind = Stmt::Kind::Block;
    s.body = parse_stmts(items, 1);
  } else {
    fail(items.front(), "unknown statement '" + head + "'");
  }
  return s;
}

Param parse_binding(const SExpr& sx, const std::string& what) {
  if (!sx.is_list() || sx.items().size() != 2) fail(sx, what + " must be (name type), got " + print_sexpr(sx));
  return Param{expect_name(sx.items()[0], what + " name"), expect_type(sx.items()[1])};
}

FunctionDef parse_define(const SExpr& sx) {
  const auto& items = sx.items();
  if (items.size() < 2 || !items[1].is_list() || items[1].items().empty())
    fail(sx, "malformed define: expected (define ((name ret) (param type)...) body...)");
  const auto& head = items[1].items();
  const SExpr& name_ret = head.front();
  if (!name_ret.is_list() || name_ret.items().size() != 2)
    fail(name_ret, "function head must be (name return-type), got " + print_sexpr(name_ret));

  FunctionDef def;
  def.sig.pos = sx.position();
  def.sig.name = expect_name(name_ret.items()[0], "function name");
  def.sig.return_type = expect_type(name_ret.items()[1]);
  for (std::size_t i = 1; i < head.size(); ++i) def.sig.params.push_back(parse_binding(head[i], "parameter"));
  def.body = parse_stmts(items, 2);
  return def;
}

FunctionSig parse_declare_fn(const SExpr& sx) {
  expect_arity(sx, 3, "(declare-fn name ((param type)...) return-type)");
  const auto& items = sx.items();
  FunctionSig sig;
  sig.pos = sx.position();
  sig.name = expect_name(items[1], "function name");
  if (!items[2].is_list()) fail(items[2], "parameter list must be a list, got " + print_sexpr(items[2]));
  for (const SExpr& p : items[2].items()) sig.params.push_back(parse_binding(p, "parameter"));
  sig.return_type = expect_type(items[3]);
  return sig;
}

StructDef parse_struct(const SExpr& sx) {
  const auto& items = sx.items();
  if (items.size() < 2) fail(sx, "malformed struct: expected (struct Name (field type)...)");
  StructDef def;
  def.pos = sx.position();
  def.name = expect_name(items[1], "struct name");
  for (std::size_t i = 2; i < items.size(); ++i) def.fields.push_back(parse_binding(items[i], "field"));
  return def;
}

}  // namespace

const char* opcode_name(Opcode op) {
  for (const auto& info : kOpcodes)
    if (info.op == op) return info.name.data();
  return "?";
}

bool is_integer_arith(Opcode op) {
  return op == Opcode::Add || op == Opcode::Sub || op == Opcode::Mul || op == Opcode::SDiv;
}
bool is_float_arith(Opcode op) {
  return op == Opcode::FAdd || op == Opcode::FSub || op == Opcode::FMul || op == Opcode::FDiv;
}
bool is_comparison(Opcode op) {
  return op == Opcode::Eq || op == Opcode::Ne || op == Opcode::Slt || op == Opcode::Sgt || op == Opcode::Sle ||
         op == Opcode::Sge;
}
bool is_cast(Opcode op) {
  return op == Opcode::Sext || op == Opcode::Trunc || op == Opcode::SIToFP || op == Opcode::FPToSI;
}

bool FunctionSig::same_signature(const FunctionSig& other) const {
  if (name != other.name || !(return_type == other.return_type) || params.size() != other.params.size() ||
      variadic != other.variadic)
    return false;
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!(params[i].type == other.params[i].type)) return false;
  return true;
}

const FunctionSig* TypedModule::find_signature(const std::string& name) const {
  for (const auto& fn : module.functions)
    if (fn.sig.name == name) return &fn.sig;
  for (const auto& sig : module.externs)
    if (sig.name == name) return &sig;
  return nullptr;
}

Module parse_module(std::span<const SExpr> forms) {
  Module module;
  for (const SExpr& form : forms) {
    if (!form.is_list() || form.items().empty())
      fail(form, "expected a top-level form (define, declare-fn or struct), got " + print_sexpr(form));
    reject_macro_node(form);
    const std::string& head = expect_name(form.items().front(), "top-level head");
    if (head == "define") {
      module.functions.push_back(parse_define(form));
    } else if (head == "declare-fn") {
      module.externs.push_back(parse_declare_fn(form));
    } else if (head == "struct") {
      module.structs.push_back(parse_struct(form));
    } else {
      fail(form.items().front(), "unknown top-level form '" + head + "'");
    }
  }
  return module;
}

SExpr to_sexpr(const FunctionSig& sig) {
  SExpr::List params;
  for (const Param& p : sig.params) params.push_back(SExpr::list({SExpr::symbol(p.name), to_sexpr(p.type)}));
  return SExpr::list({SExpr::symbol("declare-fn"), SExpr::symbol(sig.name), SExpr::list(std::move(params)),
                      to_sexpr(sig.return_type)});
}

SExpr to_sexpr(const StructDef& def) {
  SExpr::List items{SExpr::symbol("struct"), SExpr::symbol(def.name)};
  for (const Param& f : def.fields) items.push_back(SExpr::list({SExpr::symbol(f.name), to_sexpr(f.type)}));
  return SExpr::list(std::move(items));
}

}  // namespace clisp
