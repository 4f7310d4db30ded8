#include "clisp/emitter.hpp"

#include <bit>
#include <cstdio>
#include <map>
#include <set>

namespace clisp {

namespace {

bool is_plain_ident(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
              c == '$' || c == '-';
    if (!ok) return false;
  }
  return !(name[0] >= '0' && name[0] <= '9');
}

// `%name` / `@name`, quoted when the name has characters LLVM identifiers
// cannot carry bare.
std::string ident(char sigil, std::string_view name) {
  if (is_plain_ident(name)) return sigil + std::string(name);
  std::string out(1, sigil);
  out += '"';
  for (char c : name) {
    if (c == '"' || c == '\\' || static_cast<unsigned char>(c) < 0x20) {
      char buf[4];
      std::snprintf(buf, sizeof buf, "\\%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::string double_constant(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016llX", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(value)));
  return buf;
}

std::string byte_array_literal(const std::string& text) {
  std::string out = "c\"";
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x20 && c < 0x7F && c != '"' && c != '\\') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "\\%02X", c);
      out += buf;
    }
  }
  out += "\\00\"";
  return out;
}

const char* instruction_for(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::SDiv: return "sdiv";
    case Opcode::FAdd: return "fadd";
    case Opcode::FSub: return "fsub";
    case Opcode::FMul: return "fmul";
    case Opcode::FDiv: return "fdiv";
    case Opcode::Eq: return "icmp eq";
    case Opcode::Ne: return "icmp ne";
    case Opcode::Slt: return "icmp slt";
    case Opcode::Sgt: return "icmp sgt";
    case Opcode::Sle: return "icmp sle";
    case Opcode::Sge: return "icmp sge";
    case Opcode::Sext: return "sext";
    case Opcode::Trunc: return "trunc";
    case Opcode::SIToFP: return "sitofp";
    case Opcode::FPToSI: return "fptosi";
  }
  return "?";
}

// String constants shared by every function of a module.
class StringPool {
 public:
  std::string intern(const std::string& text) {
    auto it = names_.find(text);
    if (it != names_.end()) return it->second;
    std::string name = "@.str." + std::to_string(order_.size());
    names_.emplace(text, name);
    order_.push_back(text);
    return name;
  }

  void render(std::string& out) const {
    for (const auto& text : order_) {
      out += names_.at(text) + " = private unnamed_addr constant [" + std::to_string(text.size() + 1) +
             " x i8] " + byte_array_literal(text) + "\n";
    }
  }

  bool empty() const { return order_.empty(); }

 private:
  std::map<std::string, std::string> names_;
  std::vector<std::string> order_;
};

class FunctionEmitter {
 public:
  FunctionEmitter(const TypedModule& module, StringPool& strings, std::set<std::string>& called)
      : module_(module), strings_(strings), called_(called) {}

  std::string emit(const FunctionDef& fn) {
    fn_ = &fn;
    used_.insert("entry");
    std::string header = "define " + llvm_type(fn.sig.return_type) + " " + ident('@', fn.sig.name) + "(";
    std::vector<std::pair<std::string, std::string>> param_values;
    for (std::size_t i = 0; i < fn.sig.params.size(); ++i) {
      const Param& p = fn.sig.params[i];
      std::string value = ident('%', unique(p.name));
      param_values.emplace_back(p.name, value);
      if (i) header += ", ";
      header += llvm_type(p.type) + " " + value;
    }
    header += ") {\n";

    scopes_.assign(1, {});
    for (std::size_t i = 0; i < fn.sig.params.size(); ++i) {
      const Param& p = fn.sig.params[i];
      std::string slot = declare_slot(p.name, p.type);
      line("store " + llvm_type(p.type) + " " + param_values[i].second + ", ptr " + slot);
    }
    for (const auto& stmt : fn.body) emit_stmt(stmt);
    if (!terminated_) line(fn.sig.return_type.is_void() ? "ret void" : "unreachable");

    return header + "entry:\n" + allocas_ + body_ + "}\n";
  }

 private:
  [[noreturn]] void internal(const std::string& what) const {
    throw InternalError("emitter invariant violated in function " + fn_->sig.name + ": " + what);
  }

  const Type& type_of(const Expr& e) const {
    if (!e.type) internal("expression without a type annotation");
    return *e.type;
  }

  std::string unique(const std::string& base) {
    std::string name = base;
    for (int n = 1; !used_.insert(name).second; ++n) name = base + "." + std::to_string(n);
    return name;
  }

  std::string temp() { return "%" + std::to_string(next_temp_++); }

  std::string label(const std::string& base) { return unique(base + "." + std::to_string(next_label_++)); }

  void line(const std::string& text) {
    if (terminated_) start_block(label("dead"));
    body_ += "  " + text + "\n";
    if (text.rfind("ret", 0) == 0 || text.rfind("br ", 0) == 0 || text == "unreachable") terminated_ = true;
  }

  void start_block(const std::string& name) {
    body_ += name + ":\n";
    terminated_ = false;
  }

  std::string declare_slot(const std::string& name, const Type& type) {
    std::string slot = ident('%', unique(name + ".addr"));
    allocas_ += "  " + slot + " = alloca " + llvm_type(type) + "\n";
    scopes_.back()[name] = slot;
    return slot;
  }

  const std::string& slot_of(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return found->second;
    }
    internal("unresolved variable " + name);
  }

  void emit_body(const std::vector<Stmt>& body) {
    scopes_.emplace_back();
    for (const auto& s : body) emit_stmt(s);
    scopes_.pop_back();
  }

  std::string condition(const Expr& cond) {
    std::string v = emit_expr(cond);
    std::string c = temp();
    line(c + " = icmp ne i8 " + v + ", 0");
    return c;
  }

  void emit_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Declare:
        declare_slot(s.name, *s.declared);
        return;
      case Stmt::Kind::Set: {
        std::string v = emit_expr(s.exprs[0]);
        line("store " + llvm_type(type_of(s.exprs[0])) + " " + v + ", ptr " + slot_of(s.name));
        return;
      }
      case Stmt::Kind::Store: {
        // Value before address, as clang orders `*p = v`.
        std::string v = emit_expr(s.exprs[1]);
        std::string p = emit_expr(s.exprs[0]);
        line("store " + llvm_type(type_of(s.exprs[1])) + " " + v + ", ptr " + p);
        return;
      }
      case Stmt::Kind::Call:
        emit_call(s.exprs[0]);
        return;
      case Stmt::Kind::Return:
        if (s.exprs.empty()) {
          line("ret void");
        } else {
          std::string v = emit_expr(s.exprs[0]);
          line("ret " + llvm_type(type_of(s.exprs[0])) + " " + v);
        }
        return;
      case Stmt::Kind::If: {
        std::string then_label = label("if.then");
        std::string else_label = s.has_else ? label("if.else") : std::string();
        std::string end_label = label("if.end");
        std::string c = condition(s.exprs[0]);
        line("br i1 " + c + ", label " + ident('%', then_label) + ", label " +
             ident('%', s.has_else ? else_label : end_label));
        start_block(then_label);
        emit_body(s.body);
        if (!terminated_) line("br label " + ident('%', end_label));
        if (s.has_else) {
          start_block(else_label);
          emit_body(s.else_body);
          if (!terminated_) line("br label " + ident('%', end_label));
        }
        start_block(end_label);
        return;
      }
      case Stmt::Kind::While: {
        std::string cond_label = label("while.cond");
        std::string body_label = label("while.body");
        std::string end_label = label("while.end");
        line("br label " + ident('%', cond_label));
        start_block(cond_label);
        std::string c = condition(s.exprs[0]);
        line("br i1 " + c + ", label " + ident('%', body_label) + ", label " + ident('%', end_label));
        start_block(body_label);
        emit_body(s.body);
        if (!terminated_) line("br label " + ident('%', cond_label));
        start_block(end_label);
        return;
      }
      case Stmt::Kind::Block:
        emit_body(s.body);
        return;
    }
  }

  std::string emit_call(const Expr& e) {
    const FunctionSig* sig = module_.find_signature(e.name);
    if (!sig) internal("call to unknown function " + e.name);
    std::vector<std::string> args;
    for (const auto& arg : e.operands) args.push_back(llvm_type(type_of(arg)) + " " + emit_expr(arg));
    std::string call = "call " + llvm_type(sig->return_type) + " " + ident('@', e.name) + "(";
    for (std::size_t i = 0; i < args.size(); ++i) call += (i ? ", " : "") + args[i];
    call += ")";
    called_.insert(e.name);
    if (sig->return_type.is_void()) {
      line(call);
      return {};
    }
    std::string result = temp();
    line(result + " = " + call);
    return result;
  }

  std::string emit_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLiteral:
        return std::to_string(e.int_value);
      case Expr::Kind::FloatLiteral:
        return double_constant(e.float_value);
      case Expr::Kind::StringLiteral:
        return strings_.intern(e.name);
      case Expr::Kind::Variable: {
        std::string t = temp();
        line(t + " = load " + llvm_type(type_of(e)) + ", ptr " + slot_of(e.name));
        return t;
      }
      case Expr::Kind::AddressOf:
        return slot_of(e.name);
      case Expr::Kind::Load: {
        std::string p = emit_expr(e.operands[0]);
        std::string t = temp();
        line(t + " = load " + llvm_type(type_of(e)) + ", ptr " + p);
        return t;
      }
      case Expr::Kind::Binary: {
        std::string a = emit_expr(e.operands[0]);
        std::string b = emit_expr(e.operands[1]);
        std::string t = temp();
        line(t + " = " + instruction_for(e.op) + " " + llvm_type(type_of(e)) + " " + a + ", " + b);
        return t;
      }
      case Expr::Kind::Compare: {
        std::string a = emit_expr(e.operands[0]);
        std::string b = emit_expr(e.operands[1]);
        std::string bit = temp();
        line(bit + " = " + instruction_for(e.op) + " " + llvm_type(type_of(e.operands[0])) + " " + a + ", " + b);
        std::string t = temp();
        line(t + " = zext i1 " + bit + " to i8");
        return t;
      }
      case Expr::Kind::Cast: {
        std::string v = emit_expr(e.operands[0]);
        std::string t = temp();
        line(t + " = " + instruction_for(e.op) + " " + llvm_type(type_of(e.operands[0])) + " " + v + " to " +
             llvm_type(type_of(e)));
        return t;
      }
      case Expr::Kind::Call: {
        std::string r = emit_call(e);
        if (r.empty()) internal("void call used as a value");
        return r;
      }
    }
    internal("unknown expression kind");
  }

  const TypedModule& module_;
  StringPool& strings_;
  std::set<std::string>& called_;
  const FunctionDef* fn_ = nullptr;

  std::string allocas_;
  std::string body_;
  bool terminated_ = false;
  int next_temp_ = 0;
  int next_label_ = 0;
  std::set<std::string> used_;
  std::vector<std::map<std::string, std::string>> scopes_;
};

}  // namespace

std::string llvm_type(const Type& type) {
  switch (type.kind()) {
    case Type::Kind::Void: return "void";
    case Type::Kind::Int8: return "i8";
    case Type::Kind::Int: return "i32";
    case Type::Kind::Int64: return "i64";
    case Type::Kind::Float32: return "float";
    case Type::Kind::Float64: return "double";
    case Type::Kind::Ptr: return "ptr";
    case Type::Kind::Struct: return ident('%', type.struct_name());
  }
  throw InternalError("unreachable");
}

IRModuleText emit(const TypedModule& typed) {
  const Module& module = typed.module;
  StringPool strings;
  std::set<std::string> called;
  std::string functions;
  IRModuleText result;

  for (const auto& fn : module.functions) {
    if (!functions.empty()) functions += "\n";
    functions += FunctionEmitter(typed, strings, called).emit(fn);
    result.symbols.push_back(fn.sig.name);
  }

  std::string out;
  for (const auto& def : module.structs) {
    out += ident('%', def.name) + " = type {";
    for (std::size_t i = 0; i < def.fields.size(); ++i) out += (i ? ", " : " ") + llvm_type(def.fields[i].type);
    out += def.fields.empty() ? "}\n" : " }\n";
  }
  if (!module.structs.empty()) out += "\n";
  strings.render(out);
  if (!strings.empty()) out += "\n";
  out += functions;

  std::set<std::string> defined;
  for (const auto& fn : module.functions) defined.insert(fn.sig.name);
  std::set<std::string> declared;
  std::string declares;
  for (const auto& sig : module.externs) {
    if (defined.count(sig.name) || !called.count(sig.name) || !declared.insert(sig.name).second) continue;
    declares += "declare " + llvm_type(sig.return_type) + " " + ident('@', sig.name) + "(";
    for (std::size_t i = 0; i < sig.params.size(); ++i) declares += (i ? ", " : "") + llvm_type(sig.params[i].type);
    declares += ")\n";
    result.symbols.push_back(sig.name);
  }
  if (!declares.empty()) out += (functions.empty() ? "" : "\n") + declares;
  result.text = std::move(out);
  return result;
}

std::string emit_entry_shim(const std::string& main_fn, const TypedModule& module) {
  const FunctionSig* sig = module.find_signature(main_fn);
  if (!sig) throw EntryError("no such function: " + main_fn);
  if (main_fn == "main") throw EntryError("entry function cannot itself be named main");
  if (module.find_signature("main")) throw EntryError("module already defines main");
  if (!(sig->return_type == Type::int32()))
    throw EntryError("entry function must return int, " + main_fn + " returns " + to_string(sig->return_type));
  if (!sig->params.empty()) throw EntryError("entry function must take no parameters, " + main_fn + " takes " +
                                             std::to_string(sig->params.size()));
  return "\ndefine i32 @main() {\nentry:\n  %0 = call i32 " + ident('@', main_fn) + "()\n  ret i32 %0\n}\n";
}

}  // namespace clisp
