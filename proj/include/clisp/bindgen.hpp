#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clisp/expander.hpp"
#include "clisp/frontend.hpp"
#include "clisp/toolchain.hpp"

namespace clisp {

// What to bind: header paths plus the function, struct and typedef names
// wanted from them. Name lists may be empty.
struct BindRequest {
  std::vector<std::string> headers;
  std::vector<std::string> functions;
  std::vector<std::string> structs;
  std::vector<std::string> typedefs;
};

// Output of the C frontend for one probe program.
struct ProbeArtifacts {
  std::string ir_text;
  std::string ast_json;
};

// A function declaration as it appears in the probe IR, attributes dropped.
struct IrFunction {
  std::string name;
  std::string return_type;
  std::vector<std::string> param_types;
};

struct IrSignatures {
  std::vector<FunctionSig> functions;  // params named arg0, arg1, ...
  std::vector<StructDef> structs;      // fields named field0, field1, ...
  std::vector<IrFunction> raw;         // parallel to `functions`
};

// Names and C-level types recovered from the AST. A type is nullopt where
// the C spelling has no C-Lisp equivalent; the IR type then stands.
struct AstFunctionInfo {
  std::vector<std::string> param_names;
  std::vector<std::optional<Type>> param_types;
  std::optional<Type> return_type;
};

struct AstField {
  std::string name;
  std::optional<Type> type;
};

struct AstMetadata {
  std::vector<std::pair<std::string, Type>> aliases;  // request order
  std::map<std::string, AstFunctionInfo> functions;
  std::map<std::string, std::vector<AstField>> struct_fields;
};

struct Binding {
  std::vector<FunctionSig> signatures;
  std::vector<StructDef> struct_defs;
  std::vector<std::pair<std::string, Type>> aliases;
  std::vector<IrFunction> probe_declarations;  // parallel to `signatures`
};

class BindgenError : public Error {
 public:
  enum class Stage { Request, Frontend, IR, AST };

  BindgenError(Stage stage, const std::string& message);
  Stage stage() const { return stage_; }
  // The message without the stage prefix.
  const std::string& detail() const { return detail_; }

 private:
  Stage stage_;
  std::string detail_;
};

const char* to_string(BindgenError::Stage stage);

/// C source that includes the headers, takes the address of each function
/// into a volatile pointer, and declares one variable of each struct and
/// typedef, so the frontend materializes all of them. Names are deduplicated.
std::string generate_probe(const BindRequest& request);

/// Runs the frontend twice on the probe: unoptimized IR, then the JSON AST.
/// Scratch files are removed on success and kept (path in the error) on
/// failure.
ProbeArtifacts run_frontend(const std::string& probe, const std::vector<std::string>& include_paths,
                            Toolchain& frontend);

IrSignatures parse_ir_signatures(std::string_view ir_text, const BindRequest& request);

AstMetadata parse_ast_metadata(const json& ast, const BindRequest& request);

// Resolves a C type spelling from the AST (e.g. "CUcontext *") against the
// typedefs of the translation unit.
Type resolve_ctype(const json& ast, const std::string& ctype, const BindRequest& request);

// Combines both passes: IR types, AST names, pointer pointees refined from
// the AST.
Binding combine(const IrSignatures& ir, const AstMetadata& ast, const BindRequest& request);

// The whole pipeline: probe, frontend, IR pass, AST pass.
Binding bind(const BindRequest& request, Toolchain& frontend, const std::vector<std::string>& include_paths);

// (struct ...) forms followed by (declare-fn ...) forms, as a JSON array.
json binding_forms(const Binding& binding);

// "declare <ret> @name(<types>)" with attributes stripped; the form the
// emitter produces for the same signature.
std::string ir_declaration(const IrFunction& fn);

// The macro-call argument shape: [headers, functions, structs, typedefs].
BindRequest request_from_macro_args(const json& args);

/// Resolver that answers `include` calls by running the binding pipeline and
/// remembers the typedef aliases it produced, so a later `,CUmodule` resolves
/// to the aliased type. Every other name goes to `fallback` when given.
class BindgenResolver : public MacroResolver {
 public:
  BindgenResolver(Toolchain& frontend, std::vector<std::string> include_paths, MacroResolver* fallback = nullptr);

  json resolve_variable(const std::string& name) override;
  json resolve_call(const std::string& name, const json& args) override;

  const std::map<std::string, Type>& aliases() const { return aliases_; }

 private:
  Toolchain& frontend_;
  std::vector<std::string> include_paths_;
  MacroResolver* fallback_;
  std::map<std::string, Type> aliases_;
};

}  // namespace clisp
