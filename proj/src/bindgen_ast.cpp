#include <algorithm>
#include <set>
#include <sstream>

#include "clisp/bindgen.hpp"

namespace clisp {

namespace {

[[noreturn]] void ast_error(const std::string& message) { throw BindgenError(BindgenError::Stage::AST, message); }

const std::string* string_field(const json& node, const char* key) {
  auto it = node.find(key);
  if (it == node.end() || !it->is_string()) return nullptr;
  return &it->get_ref<const std::string&>();
}

const std::string* qual_type(const json& node) {
  auto it = node.find("type");
  if (it == node.end() || !it->is_object()) return nullptr;
  return string_field(*it, "qualType");
}

/// Resolves C type spellings as printed in the AST's `qualType` fields.
/// Typedef chains are followed by name. A pointer to a struct that was not
/// requested becomes (ptr void), the opaque-handle pattern.
class CTypeTable {
 public:
  CTypeTable(const json& ast, const BindRequest& request)
      : requested_structs_(request.structs.begin(), request.structs.end()) {
    auto inner = ast.find("inner");
    if (inner == ast.end() || !inner->is_array()) return;
    for (const auto& node : *inner) {
      const std::string* kind = string_field(node, "kind");
      if (!kind || *kind != "TypedefDecl") continue;
      const std::string* name = string_field(node, "name");
      const std::string* qual = qual_type(node);
      if (name && qual) typedefs_.emplace(*name, *qual);
    }
  }

  bool has_typedef(const std::string& name) const { return typedefs_.count(name) != 0; }
  const std::string& typedef_spelling(const std::string& name) const { return typedefs_.at(name); }

  Type resolve(const std::string& ctype) const { return resolve(ctype, false, 0); }

  std::optional<Type> try_resolve(const std::string& ctype) const {
    try {
      return resolve(ctype);
    } catch (const BindgenError&) {
      return std::nullopt;
    }
  }

 private:
  Type resolve(const std::string& ctype, bool behind_pointer, int depth) const {
    if (depth > 64) ast_error("typedef chain too deep while resolving '" + ctype + "'");
    if (ctype.find('(') != std::string::npos) ast_error("'" + ctype + "' is a function pointer type");
    if (ctype.find('[') != std::string::npos) ast_error("'" + ctype + "' is an array type");

    std::string spaced;
    for (char c : ctype) spaced += c == '*' ? std::string(" * ") : std::string(1, c);
    std::istringstream in(spaced);
    std::vector<std::string> base;
    int stars = 0;
    for (std::string tok; in >> tok;) {
      static const std::set<std::string> kQualifiers = {"const", "volatile", "restrict", "__restrict",
                                                        "__restrict__", "_Nonnull", "_Nullable"};
      if (tok == "*") {
        ++stars;
      } else if (!kQualifiers.count(tok)) {
        base.push_back(tok);
      }
    }
    if (base.empty()) ast_error("cannot parse C type '" + ctype + "'");

    Type t = resolve_base(base, ctype, behind_pointer || stars > 0, depth);
    for (int i = 0; i < stars; ++i) t = Type::ptr(std::move(t));
    return t;
  }

  Type resolve_base(const std::vector<std::string>& words, const std::string& ctype, bool behind_pointer,
                    int depth) const {
    const std::string& first = words.front();
    if (first == "struct" && words.size() == 2) {
      if (requested_structs_.count(words[1])) return Type::named_struct(words[1]);
      if (behind_pointer) return Type::void_type();
      ast_error("'" + ctype + "' passes struct " + words[1] + " by value but it was not requested");
    }
    if (first == "enum" && words.size() == 2) return Type::int32();
    if (first == "union") ast_error("'" + ctype + "' is a union type");

    static const std::set<std::string> kBuiltinWords = {"signed", "unsigned", "char", "short", "int",
                                                         "long",   "float",    "double", "void", "_Bool"};
    bool builtin = std::all_of(words.begin(), words.end(), [](const std::string& w) { return kBuiltinWords.count(w); });
    if (builtin) {
      auto count = [&](const char* w) { return std::count(words.begin(), words.end(), w); };
      if (count("_Bool")) ast_error("'" + ctype + "' (_Bool) has no C-Lisp equivalent");
      if (count("void")) return Type::void_type();
      if (count("char")) return Type::int8();
      if (count("short")) ast_error("'" + ctype + "' (16-bit integer) has no C-Lisp equivalent");
      if (count("float")) return Type::float32();
      if (count("double")) {
        if (count("long")) ast_error("'" + ctype + "' (long double) has no C-Lisp equivalent");
        return Type::float64();
      }
      if (count("long")) return Type::int64();
      return Type::int32();
    }
    if (words.size() == 1) {
      auto it = typedefs_.find(first);
      if (it != typedefs_.end()) return resolve(it->second, behind_pointer, depth + 1);
    }
    ast_error("unknown or unsupported C type '" + ctype + "'");
  }

  std::map<std::string, std::string> typedefs_;
  std::set<std::string> requested_structs_;
};

// "CUresult (unsigned int)" -> "CUresult"
std::string return_spelling(const std::string& fn_type) {
  if (fn_type.empty() || fn_type.back() != ')') return fn_type;
  int depth = 0;
  for (std::size_t i = fn_type.size(); i-- > 0;) {
    if (fn_type[i] == ')') ++depth;
    if (fn_type[i] == '(' && --depth == 0) {
      std::string prefix = fn_type.substr(0, i);
      while (!prefix.empty() && prefix.back() == ' ') prefix.pop_back();
      return prefix;
    }
  }
  return fn_type;
}

}  // namespace

Type resolve_ctype(const json& ast, const std::string& ctype, const BindRequest& request) {
  return CTypeTable(ast, request).resolve(ctype);
}

AstMetadata parse_ast_metadata(const json& ast, const BindRequest& request) {
  if (!ast.is_object()) ast_error("AST dump is not a JSON object");
  CTypeTable types(ast, request);
  AstMetadata meta;

  std::set<std::string> seen;
  for (const auto& name : request.typedefs) {
    if (!seen.insert(name).second) continue;
    if (!types.has_typedef(name)) ast_error("typedef " + name + " not found in the headers");
    Type t;
    try {
      t = types.resolve(types.typedef_spelling(name));
    } catch (const BindgenError& e) {
      ast_error("typedef " + name + ": " + e.detail());
    }
    if (t.is_void()) ast_error("typedef " + name + " aliases void");
    meta.aliases.emplace_back(name, t);
  }

  std::set<std::string> wanted_fns(request.functions.begin(), request.functions.end());
  std::set<std::string> wanted_structs(request.structs.begin(), request.structs.end());
  auto inner = ast.find("inner");
  if (inner == ast.end() || !inner->is_array()) return meta;

  for (const auto& node : *inner) {
    const std::string* kind = string_field(node, "kind");
    const std::string* name = string_field(node, "name");
    if (!kind || !name) continue;

    if (*kind == "FunctionDecl" && wanted_fns.count(*name)) {
      if (node.value("variadic", false)) ast_error("function " + *name + " is variadic, which is not supported");
      std::vector<std::string> names;
      std::vector<std::optional<Type>> param_types;
      if (auto params = node.find("inner"); params != node.end() && params->is_array()) {
        for (const auto& p : *params) {
          const std::string* pk = string_field(p, "kind");
          if (!pk || *pk != "ParmVarDecl") continue;
          const std::string* pname = string_field(p, "name");
          names.push_back(pname ? *pname : std::string());
          const std::string* pq = qual_type(p);
          param_types.push_back(pq ? types.try_resolve(*pq) : std::nullopt);
        }
      }
      auto [it, inserted] = meta.functions.try_emplace(*name);
      AstFunctionInfo& info = it->second;
      if (inserted) {
        info.param_names = std::move(names);
        info.param_types = std::move(param_types);
        if (const std::string* q = qual_type(node)) info.return_type = types.try_resolve(return_spelling(*q));
      } else if (names.size() == info.param_names.size()) {
        // Later redeclarations may name parameters the first one left unnamed.
        for (std::size_t i = 0; i < names.size(); ++i)
          if (info.param_names[i].empty()) info.param_names[i] = names[i];
      }
      continue;
    }

    if (*kind == "RecordDecl" && wanted_structs.count(*name) && node.value("completeDefinition", false)) {
      std::vector<AstField> fields;
      if (auto members = node.find("inner"); members != node.end() && members->is_array()) {
        for (const auto& f : *members) {
          const std::string* fk = string_field(f, "kind");
          if (!fk || *fk != "FieldDecl") continue;
          if (f.value("isBitfield", false)) ast_error("struct " + *name + " has bit-fields, which are not supported");
          const std::string* fname = string_field(f, "name");
          const std::string* fq = qual_type(f);
          fields.push_back(AstField{fname ? *fname : std::string(), fq ? types.try_resolve(*fq) : std::nullopt});
        }
      }
      meta.struct_fields[*name] = std::move(fields);
    }
  }
  return meta;
}

}  // namespace clisp
