#include <limits>
#include <map>
#include <set>

#include "clisp/frontend.hpp"

namespace clisp {

std::string TypeError::to_string() const {
  std::string out;
  if (pos) out += clisp::to_string(*pos) + ": ";
  if (!function.empty()) out += "in function " + function + ": ";
  out += message;
  return out;
}

namespace {

class Checker {
 public:
  CheckResult run(Module module) {
    collect_structs(module);
    collect_functions(module);
    for (auto& fn : module.functions) check_function(fn);

    CheckResult result;
    result.errors = std::move(errors_);
    if (result.errors.empty()) result.module = TypedModule{std::move(module)};
    return result;
  }

 private:
  void error(const std::optional<SourcePosition>& pos, std::string message,
             std::optional<Type> expected = std::nullopt, std::optional<Type> actual = std::nullopt) {
    TypeError err;
    err.pos = pos ? pos : fn_pos_;
    err.function = fn_name_;
    err.message = std::move(message);
    err.expected = std::move(expected);
    err.actual = std::move(actual);
    errors_.push_back(std::move(err));
  }

  void mismatch(const std::optional<SourcePosition>& pos, const std::string& what, const Type& expected,
                const Type& actual) {
    error(pos, what + ": expected " + to_string(expected) + ", got " + to_string(actual), expected, actual);
  }

  // Void is only valid as a return type or behind a pointer.
  bool valid_type(const Type& type, const std::optional<SourcePosition>& pos, const std::string& what,
                  bool allow_void) {
    if (type.is_void()) {
      if (!allow_void) error(pos, what + " cannot have type void");
      return allow_void;
    }
    if (type.is_ptr()) return valid_type(type.pointee(), pos, what, true);
    if (type.is_struct() && !structs_.count(type.struct_name())) {
      error(pos, what + " has unknown type " + type.struct_name());
      return false;
    }
    return true;
  }

  void collect_structs(const Module& module) {
    for (const auto& def : module.structs) {
      if (!structs_.emplace(def.name, &def).second) {
        fn_pos_ = def.pos;
        error(def.pos, "struct " + def.name + " is defined more than once");
      }
    }
    for (const auto& def : module.structs) {
      fn_pos_ = def.pos;
      std::set<std::string> seen;
      for (const auto& field : def.fields) {
        if (!seen.insert(field.name).second) error(def.pos, "struct " + def.name + " repeats field " + field.name);
        valid_type(field.type, def.pos, "field " + def.name + "." + field.name, false);
      }
      std::set<std::string> visiting;
      if (contains_by_value(def.name, visiting))
        error(def.pos, "struct " + def.name + " contains itself by value");
    }
    fn_pos_.reset();
  }

  bool contains_by_value(const std::string& name, std::set<std::string>& visiting) {
    if (!visiting.insert(name).second) return true;
    auto it = structs_.find(name);
    if (it != structs_.end()) {
      for (const auto& field : it->second->fields)
        if (field.type.is_struct() && contains_by_value(field.type.struct_name(), visiting)) return true;
    }
    visiting.erase(name);
    return false;
  }

  void check_signature(const FunctionSig& sig) {
    fn_pos_ = sig.pos;
    fn_name_ = sig.name;
    valid_type(sig.return_type, sig.pos, "return value", true);
    std::set<std::string> seen;
    for (const auto& p : sig.params) {
      if (!seen.insert(p.name).second) error(sig.pos, "parameter " + p.name + " is declared more than once");
      valid_type(p.type, sig.pos, "parameter " + p.name, false);
    }
    fn_name_.clear();
  }

  void collect_functions(const Module& module) {
    std::set<std::string> defined;
    auto add = [&](const FunctionSig& sig) {
      check_signature(sig);
      auto [it, inserted] = functions_.emplace(sig.name, sig);
      if (!inserted && !it->second.same_signature(sig)) {
        fn_pos_ = sig.pos;
        error(sig.pos, "conflicting signatures for function " + sig.name);
      }
    };
    for (const auto& sig : module.externs) add(sig);
    for (const auto& fn : module.functions) {
      if (!defined.insert(fn.sig.name).second) {
        fn_pos_ = fn.sig.pos;
        error(fn.sig.pos, "function " + fn.sig.name + " is defined more than once");
      }
      add(fn.sig);
    }
    fn_pos_.reset();
  }

  void check_function(FunctionDef& fn) {
    fn_name_ = fn.sig.name;
    fn_pos_ = fn.sig.pos;
    return_type_ = fn.sig.return_type;
    scopes_.assign(1, {});
    for (const auto& p : fn.sig.params) scopes_.back().emplace(p.name, p.type);
    for (auto& stmt : fn.body) check_stmt(stmt);
    scopes_.clear();
    fn_name_.clear();
    fn_pos_.reset();
  }

  const Type* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  void check_body(std::vector<Stmt>& body) {
    scopes_.emplace_back();
    for (auto& stmt : body) check_stmt(stmt);
    scopes_.pop_back();
  }

  void check_condition(Expr& cond, const std::string& what) {
    auto t = check_expr(cond);
    if (t && !(*t == Type::int8())) mismatch(cond.pos, what + " condition", Type::int8(), *t);
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Declare: {
        if (lookup(s.name)) {
          error(s.pos, "declaration of " + s.name + " shadows an existing variable");
          return;
        }
        if (valid_type(*s.declared, s.pos, "variable " + s.name, false)) scopes_.back().emplace(s.name, *s.declared);
        return;
      }
      case Stmt::Kind::Set: {
        const Type* target = lookup(s.name);
        auto t = check_expr(s.exprs[0]);
        if (!target) {
          error(s.pos, "assignment to undeclared variable " + s.name);
          return;
        }
        if (t && !(*t == *target)) mismatch(s.exprs[0].pos ? s.exprs[0].pos : s.pos, "value assigned to " + s.name, *target, *t);
        return;
      }
      case Stmt::Kind::Store: {
        auto ptr = check_expr(s.exprs[0]);
        auto value = check_expr(s.exprs[1]);
        if (!ptr) return;
        if (!ptr->is_ptr()) {
          error(s.exprs[0].pos, "store target must be a pointer, got " + to_string(*ptr), std::nullopt, *ptr);
          return;
        }
        if (ptr->pointee().is_void()) {
          error(s.exprs[0].pos, "cannot store through (ptr void)", std::nullopt, *ptr);
          return;
        }
        if (value && !(*value == ptr->pointee()))
          mismatch(s.exprs[1].pos ? s.exprs[1].pos : s.pos, "stored value", ptr->pointee(), *value);
        return;
      }
      case Stmt::Kind::Call:
        check_expr(s.exprs[0], /*as_operand=*/false);
        return;
      case Stmt::Kind::Return: {
        if (s.exprs.empty()) {
          if (!return_type_.is_void())
            error(s.pos, "bare ret in function returning " + to_string(return_type_), return_type_, Type::void_type());
          return;
        }
        auto t = check_expr(s.exprs[0]);
        if (return_type_.is_void()) {
          error(s.pos, "void function cannot return a value", Type::void_type(), t);
          return;
        }
        if (t && !(*t == return_type_)) mismatch(s.exprs[0].pos ? s.exprs[0].pos : s.pos, "returned value", return_type_, *t);
        return;
      }
      case Stmt::Kind::If:
        check_condition(s.exprs[0], "if");
        check_body(s.body);
        if (s.has_else) check_body(s.else_body);
        return;
      case Stmt::Kind::While:
        check_condition(s.exprs[0], "while");
        check_body(s.body);
        return;
      case Stmt::Kind::Block:
        check_body(s.body);
        return;
    }
  }

  // Returns nullopt after reporting, so errors do not cascade.
  std::optional<Type> check_expr(Expr& e, bool as_operand = true) {
    auto t = infer(e, as_operand);
    if (t) e.type = *t;
    return t;
  }

  std::optional<Type> infer(Expr& e, bool as_operand) {
    switch (e.kind) {
      case Expr::Kind::IntLiteral:
        // Literals outside the 32-bit range cannot be an int; they are int64.
        if (e.int_value < std::numeric_limits<std::int32_t>::min() ||
            e.int_value > std::numeric_limits<std::int32_t>::max())
          return Type::int64();
        return Type::int32();
      case Expr::Kind::FloatLiteral:
        return Type::float64();
      case Expr::Kind::StringLiteral:
        return Type::ptr(Type::int8());
      case Expr::Kind::Variable: {
        const Type* t = lookup(e.name);
        if (!t) {
          error(e.pos, "use of undeclared variable " + e.name);
          return std::nullopt;
        }
        return *t;
      }
      case Expr::Kind::AddressOf: {
        const Type* t = lookup(e.name);
        if (!t) {
          error(e.pos, "ptr-to of undeclared variable " + e.name);
          return std::nullopt;
        }
        return Type::ptr(*t);
      }
      case Expr::Kind::Load: {
        auto p = check_expr(e.operands[0]);
        if (!p) return std::nullopt;
        if (!p->is_ptr()) {
          error(e.pos, "load operand must be a pointer, got " + to_string(*p), std::nullopt, *p);
          return std::nullopt;
        }
        if (p->pointee().is_void()) {
          error(e.pos, "cannot load through (ptr void)", std::nullopt, *p);
          return std::nullopt;
        }
        return p->pointee();
      }
      case Expr::Kind::Binary:
      case Expr::Kind::Compare:
        return infer_binary(e);
      case Expr::Kind::Cast:
        return infer_cast(e);
      case Expr::Kind::Call:
        return infer_call(e, as_operand);
    }
    return std::nullopt;
  }

  std::optional<Type> infer_binary(Expr& e) {
    const std::string op = opcode_name(e.op);
    auto lhs = check_expr(e.operands[0]);
    auto rhs = check_expr(e.operands[1]);
    if (!lhs || !rhs) return std::nullopt;
    const bool wants_float = is_float_arith(e.op);
    auto acceptable = [&](const Type& t) { return wants_float ? t.is_float() : t.is_integer(); };
    const char* family = wants_float ? "a float type (float32 or float64)" : "an integer type (int8, int or int64)";
    bool ok = true;
    if (!acceptable(*lhs)) {
      error(e.operands[0].pos ? e.operands[0].pos : e.pos,
            "operand of " + op + " must have " + family + ", got " + to_string(*lhs), std::nullopt, *lhs);
      ok = false;
    }
    // Same bad type on both sides is one mistake, reported once.
    if (!acceptable(*rhs) && (ok || !(*lhs == *rhs))) {
      error(e.operands[1].pos ? e.operands[1].pos : e.pos,
            "operand of " + op + " must have " + family + ", got " + to_string(*rhs), std::nullopt, *rhs);
      ok = false;
    }
    if (!ok) return std::nullopt;
    if (!(*lhs == *rhs)) {
      mismatch(e.operands[1].pos ? e.operands[1].pos : e.pos, "operands of " + op + " must have identical types",
               *lhs, *rhs);
      return std::nullopt;
    }
    return is_comparison(e.op) ? Type::int8() : *lhs;
  }

  std::optional<Type> infer_cast(Expr& e) {
    const std::string op = opcode_name(e.op);
    auto from = check_expr(e.operands[0]);
    const Type& to = *e.cast_to;
    if (!valid_type(to, e.pos, op + " target", false) || !from) return std::nullopt;
    auto bad = [&](const std::string& why) -> std::optional<Type> {
      error(e.pos, op + " from " + to_string(*from) + " to " + to_string(to) + ": " + why, to, *from);
      return std::nullopt;
    };
    switch (e.op) {
      case Opcode::Sext:
        if (!from->is_integer() || !to.is_integer()) return bad("operands must be integer types");
        if (from->bit_width() >= to.bit_width()) return bad("sext must widen");
        return to;
      case Opcode::Trunc:
        if (!from->is_integer() || !to.is_integer()) return bad("operands must be integer types");
        if (from->bit_width() <= to.bit_width()) return bad("trunc must narrow");
        return to;
      case Opcode::SIToFP:
        if (!from->is_integer() || !to.is_float()) return bad("sitofp converts an integer to a float type");
        return to;
      case Opcode::FPToSI:
        if (!from->is_float() || !to.is_integer()) return bad("fptosi converts a float to an integer type");
        return to;
      default:
        throw InternalError("non-cast opcode in cast node");
    }
  }

  std::optional<Type> infer_call(Expr& e, bool as_operand) {
    std::vector<std::optional<Type>> args;
    for (auto& arg : e.operands) args.push_back(check_expr(arg));
    auto it = functions_.find(e.name);
    if (it == functions_.end()) {
      error(e.pos, "call to undeclared function " + e.name);
      return std::nullopt;
    }
    const FunctionSig& sig = it->second;
    if (args.size() != sig.params.size()) {
      error(e.pos, "function " + e.name + " takes " + std::to_string(sig.params.size()) + " argument" +
                       (sig.params.size() == 1 ? "" : "s") + ", got " + std::to_string(args.size()));
      return std::nullopt;
    }
    bool ok = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!args[i]) {
        ok = false;
        continue;
      }
      if (!(*args[i] == sig.params[i].type)) {
        mismatch(e.operands[i].pos ? e.operands[i].pos : e.pos,
                 "argument " + std::to_string(i + 1) + " (" + sig.params[i].name + ") of " + e.name,
                 sig.params[i].type, *args[i]);
        ok = false;
      }
    }
    if (as_operand && sig.return_type.is_void()) {
      error(e.pos, "void result of " + e.name + " used as a value", std::nullopt, Type::void_type());
      return std::nullopt;
    }
    if (!ok) return std::nullopt;
    return sig.return_type;
  }

  std::map<std::string, const StructDef*> structs_;
  std::map<std::string, FunctionSig> functions_;
  std::vector<TypeError> errors_;

  std::string fn_name_;
  std::optional<SourcePosition> fn_pos_;
  Type return_type_;
  std::vector<std::map<std::string, Type>> scopes_;
};

}  // namespace

CheckResult typecheck(Module module) { return Checker().run(std::move(module)); }

}  // namespace clisp
