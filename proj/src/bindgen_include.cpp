#include "clisp/bindgen.hpp"

namespace clisp {

namespace {

// The IR decides the type; the AST may only say what a `ptr` points to.
Type refine(const Type& ir_type, const std::optional<Type>& ast_type) {
  if (ir_type.is_ptr() && ast_type && ast_type->is_ptr()) return *ast_type;
  return ir_type;
}

}  // namespace

Binding combine(const IrSignatures& ir, const AstMetadata& ast, const BindRequest&) {
  Binding binding;
  for (std::size_t i = 0; i < ir.functions.size(); ++i) {
    FunctionSig sig = ir.functions[i];
    auto it = ast.functions.find(sig.name);
    if (it != ast.functions.end()) {
      const AstFunctionInfo& info = it->second;
      if (info.param_names.size() != sig.params.size())
        throw BindgenError(BindgenError::Stage::AST,
                           "function " + sig.name + " has " + std::to_string(info.param_names.size()) +
                               " parameters in C but " + std::to_string(sig.params.size()) +
                               " in the IR (struct passed by value?)");
      for (std::size_t k = 0; k < sig.params.size(); ++k) {
        if (!info.param_names[k].empty()) sig.params[k].name = info.param_names[k];
        sig.params[k].type = refine(sig.params[k].type, info.param_types[k]);
      }
      sig.return_type = refine(sig.return_type, info.return_type);
    }
    binding.signatures.push_back(std::move(sig));
    binding.probe_declarations.push_back(ir.raw[i]);
  }

  for (StructDef def : ir.structs) {
    auto it = ast.struct_fields.find(def.name);
    if (it != ast.struct_fields.end() && !def.fields.empty()) {
      const auto& fields = it->second;
      if (fields.size() != def.fields.size())
        throw BindgenError(BindgenError::Stage::AST, "struct " + def.name + " has " + std::to_string(fields.size()) +
                                                         " fields in C but " + std::to_string(def.fields.size()) +
                                                         " in the IR (padding or unsupported members)");
      for (std::size_t k = 0; k < fields.size(); ++k) {
        if (!fields[k].name.empty()) def.fields[k].name = fields[k].name;
        def.fields[k].type = refine(def.fields[k].type, fields[k].type);
      }
    }
    binding.struct_defs.push_back(std::move(def));
  }

  binding.aliases = ast.aliases;
  return binding;
}

Binding bind(const BindRequest& request, Toolchain& frontend, const std::vector<std::string>& include_paths) {
  if (request.headers.empty()) throw BindgenError(BindgenError::Stage::Request, "at least one header is required");
  ProbeArtifacts artifacts = run_frontend(generate_probe(request), include_paths, frontend);
  IrSignatures ir = parse_ir_signatures(artifacts.ir_text, request);
  json ast;
  try {
    ast = json::parse(artifacts.ast_json);
  } catch (const json::parse_error& e) {
    throw BindgenError(BindgenError::Stage::AST, std::string("frontend AST dump is not valid JSON: ") + e.what());
  }
  return combine(ir, parse_ast_metadata(ast, request), request);
}

json binding_forms(const Binding& binding) {
  json forms = json::array();
  for (const auto& def : binding.struct_defs) forms.push_back(to_json(to_sexpr(def)));
  for (const auto& sig : binding.signatures) forms.push_back(to_json(to_sexpr(sig)));
  return forms;
}

BindgenResolver::BindgenResolver(Toolchain& frontend, std::vector<std::string> include_paths,
                                 MacroResolver* fallback)
    : frontend_(frontend), include_paths_(std::move(include_paths)), fallback_(fallback) {}

json BindgenResolver::resolve_variable(const std::string& name) {
  auto it = aliases_.find(name);
  if (it != aliases_.end()) return to_json(to_sexpr(it->second));
  if (fallback_) return fallback_->resolve_variable(name);
  throw MacroError(MacroError::Reason::Unresolved, "unresolved macro: " + name);
}

json BindgenResolver::resolve_call(const std::string& name, const json& args) {
  if (name != "include") {
    if (fallback_) return fallback_->resolve_call(name, args);
    throw MacroError(MacroError::Reason::Unresolved, "unresolved macro: " + name);
  }
  Binding binding = clisp::bind(request_from_macro_args(args), frontend_, include_paths_);
  for (const auto& [alias, type] : binding.aliases) aliases_.insert_or_assign(alias, type);
  return binding_forms(binding);
}

}  // namespace clisp
