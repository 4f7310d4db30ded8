#include <map>
#include <set>
#include <sstream>

#include "clisp/bindgen.hpp"

namespace clisp {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on commas outside (), [], {} and <>.
std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{' || c == '<') ++depth;
    if (c == ')' || c == ']' || c == '}' || c == '>') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

// The type token at the start of a parameter ("ptr noundef %0" -> "ptr").
std::string leading_type(const std::string& param) {
  if (param.empty()) return {};
  char open = param[0];
  if (open == '{' || open == '<' || open == '[') {
    char close = open == '{' ? '}' : open == '<' ? '>' : ']';
    int depth = 0;
    for (std::size_t i = 0; i < param.size(); ++i) {
      if (param[i] == open) ++depth;
      if (param[i] == close && --depth == 0) return param.substr(0, i + 1);
    }
    return param;
  }
  return param.substr(0, param.find(' '));
}

// The type token at the end of a prefix ("declare noundef <4 x float>").
std::string trailing_type(const std::string& prefix) {
  if (prefix.empty()) return {};
  char close = prefix.back();
  if (close == '}' || close == '>' || close == ']') {
    char open = close == '}' ? '{' : close == '>' ? '<' : '[';
    int depth = 0;
    for (std::size_t i = prefix.size(); i-- > 0;) {
      if (prefix[i] == close) ++depth;
      if (prefix[i] == open && --depth == 0) return prefix.substr(i);
    }
  }
  return prefix.substr(prefix.find_last_of(' ') + 1);
}

std::optional<Type> map_ir_type(const std::string& ir) {
  if (ir == "i8") return Type::int8();
  if (ir == "i32") return Type::int32();
  if (ir == "i64") return Type::int64();
  if (ir == "float") return Type::float32();
  if (ir == "double") return Type::float64();
  if (ir == "void") return Type::void_type();
  if (ir == "ptr" || (!ir.empty() && ir.back() == '*')) return Type::ptr(Type::void_type());
  if (ir.rfind("%struct.", 0) == 0) return Type::named_struct(ir.substr(8));
  return std::nullopt;
}

std::string unquote_name(std::string name) {
  if (name.size() >= 2 && name.front() == '"' && name.back() == '"') return name.substr(1, name.size() - 2);
  return name;
}

struct ParsedDecl {
  IrFunction fn;
  std::vector<std::string> params;  // full parameter text
};

// Parses a `declare` or `define` line. Returns nullopt for other lines.
std::optional<ParsedDecl> parse_decl_line(const std::string& line) {
  if (line.rfind("declare ", 0) != 0 && line.rfind("define ", 0) != 0) return std::nullopt;
  std::size_t at = line.find(" @");
  if (at == std::string::npos) return std::nullopt;
  std::size_t name_begin = at + 2;
  std::size_t open;
  if (line[name_begin] == '"') {
    std::size_t q = line.find('"', name_begin + 1);
    if (q == std::string::npos) return std::nullopt;
    open = q + 1;
  } else {
    open = line.find('(', name_begin);
  }
  if (open == std::string::npos || open >= line.size() || line[open] != '(') return std::nullopt;
  int depth = 0;
  std::size_t close = std::string::npos;
  for (std::size_t i = open; i < line.size(); ++i) {
    if (line[i] == '(') ++depth;
    if (line[i] == ')' && --depth == 0) {
      close = i;
      break;
    }
  }
  if (close == std::string::npos) return std::nullopt;

  ParsedDecl decl;
  decl.fn.name = unquote_name(line.substr(name_begin, open - name_begin));
  std::string before = trim(std::string_view(line).substr(0, at));
  decl.fn.return_type = trailing_type(before);
  decl.params = split_top_level(std::string_view(line).substr(open + 1, close - open - 1));
  for (const auto& p : decl.params) decl.fn.param_types.push_back(leading_type(p));
  return decl;
}

}  // namespace

std::string ir_declaration(const IrFunction& fn) {
  std::string out = "declare " + fn.return_type + " @" + fn.name + "(";
  for (std::size_t i = 0; i < fn.param_types.size(); ++i) out += (i ? ", " : "") + fn.param_types[i];
  return out + ")";
}

IrSignatures parse_ir_signatures(std::string_view ir_text, const BindRequest& request) {
  std::map<std::string, ParsedDecl> decls;
  std::map<std::string, std::string> struct_bodies;
  std::istringstream in{std::string(ir_text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto decl = parse_decl_line(line)) {
      decls.emplace(decl->fn.name, std::move(*decl));
      continue;
    }
    if (line.rfind("%struct.", 0) == 0) {
      std::size_t eq = line.find(" = type ");
      if (eq == std::string::npos) continue;
      struct_bodies.emplace(unquote_name(line.substr(8, eq - 8)), trim(line.substr(eq + 8)));
    }
  }

  IrSignatures result;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  auto unmappable = [](const std::string& owner, const std::string& type) {
    return BindgenError(BindgenError::Stage::IR, owner + " uses type '" + type + "' which has no C-Lisp equivalent");
  };

  for (const auto& name : request.functions) {
    if (!seen.insert("fn:" + name).second) continue;
    auto it = decls.find(name);
    if (it == decls.end()) {
      missing.push_back(name);
      continue;
    }
    const ParsedDecl& decl = it->second;
    FunctionSig sig;
    sig.name = name;
    auto ret = map_ir_type(decl.fn.return_type);
    if (!ret || ret->is_struct()) throw unmappable("function " + name + " return", decl.fn.return_type);
    sig.return_type = *ret;
    for (std::size_t i = 0; i < decl.params.size(); ++i) {
      const std::string& text = decl.params[i];
      if (text == "...")
        throw BindgenError(BindgenError::Stage::IR, "function " + name + " is variadic, which is not supported");
      if (text.find("byval(") != std::string::npos || text.find("sret(") != std::string::npos)
        throw BindgenError(BindgenError::Stage::IR,
                           "function " + name + " passes a struct by value, which is not supported");
      auto t = map_ir_type(decl.fn.param_types[i]);
      if (!t || t->is_void() || t->is_struct())
        throw unmappable("function " + name + " parameter " + std::to_string(i), decl.fn.param_types[i]);
      sig.params.push_back(Param{"arg" + std::to_string(i), *t});
    }
    result.functions.push_back(std::move(sig));
    result.raw.push_back(decl.fn);
  }

  for (const auto& name : request.structs) {
    if (!seen.insert("struct:" + name).second) continue;
    auto it = struct_bodies.find(name);
    if (it == struct_bodies.end()) {
      missing.push_back("struct " + name);
      continue;
    }
    StructDef def;
    def.name = name;
    const std::string& body = it->second;
    if (body != "opaque") {
      if (body.size() < 2 || body.front() != '{' || body.back() != '}')
        throw unmappable("struct " + name, body);
      auto fields = split_top_level(std::string_view(body).substr(1, body.size() - 2));
      for (std::size_t i = 0; i < fields.size(); ++i) {
        auto t = map_ir_type(fields[i]);
        if (!t || t->is_void()) throw unmappable("struct " + name + " field " + std::to_string(i), fields[i]);
        def.fields.push_back(Param{"field" + std::to_string(i), *t});
      }
    }
    result.structs.push_back(std::move(def));
  }

  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw BindgenError(BindgenError::Stage::IR, "not found in the probe IR: " + list);
  }
  return result;
}

}  // namespace clisp
