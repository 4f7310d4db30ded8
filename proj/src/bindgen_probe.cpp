#include <filesystem>
#include <set>

#include "clisp/bindgen.hpp"

namespace clisp {

namespace {

std::vector<std::string> dedup(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& n : names)
    if (seen.insert(n).second) out.push_back(n);
  return out;
}

std::string include_line(const std::string& header) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(header, ec)) {
    auto abs = std::filesystem::absolute(header, ec);
    return "#include \"" + (ec ? header : abs.string()) + "\"\n";
  }
  return "#include <" + header + ">\n";
}

std::vector<std::string> name_list(const json& value, const char* what) {
  if (!value.is_array())
    throw BindgenError(BindgenError::Stage::Request, std::string(what) + " must be a list, got " + value.dump());
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string())
      throw BindgenError(BindgenError::Stage::Request, std::string(what) + " entries must be names, got " + item.dump());
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

BindgenError::BindgenError(Stage stage, const std::string& message)
    : Error(std::string("bindgen [") + to_string(stage) + "]: " + message), stage_(stage), detail_(message) {}

const char* to_string(BindgenError::Stage stage) {
  switch (stage) {
    case BindgenError::Stage::Request: return "request";
    case BindgenError::Stage::Frontend: return "frontend";
    case BindgenError::Stage::IR: return "ir";
    case BindgenError::Stage::AST: return "ast";
  }
  return "?";
}

std::string generate_probe(const BindRequest& request) {
  std::string out = "/* generated binding probe */\n";
  for (const auto& h : dedup(request.headers)) out += include_line(h);
  out += "\nvoid clisp_binding_probe(void) {\n";
  int n = 0;
  for (const auto& fn : dedup(request.functions))
    out += "  void *volatile clisp_fn_" + std::to_string(n++) + " = (void *)&" + fn + ";\n";
  n = 0;
  for (const auto& s : dedup(request.structs)) {
    std::string var = "clisp_struct_" + std::to_string(n++);
    out += "  struct " + s + " " + var + ";\n  (void)" + var + ";\n";
  }
  n = 0;
  for (const auto& t : dedup(request.typedefs)) {
    std::string var = "clisp_typedef_" + std::to_string(n++);
    out += "  " + t + " " + var + ";\n  (void)" + var + ";\n";
  }
  out += "}\n";
  return out;
}

ProbeArtifacts run_frontend(const std::string& probe, const std::vector<std::string>& include_paths,
                            Toolchain& frontend) {
  ScratchDir scratch("clisp-bindgen");
  const auto source = scratch.path() / "probe.c";
  const auto ir_file = scratch.path() / "probe.ll";
  const auto ast_file = scratch.path() / "probe.ast.json";
  write_file(source, probe);

  auto failed = [&](const std::string& step, const ProcessResult& r) {
    scratch.keep();
    return BindgenError(BindgenError::Stage::Frontend,
                        frontend.compiler().string() + " failed while " + step + " (exit " +
                            std::to_string(r.exit_code) + "); scratch files kept in " + scratch.path().string() +
                            "\n" + r.err);
  };

  ProcessResult ir = frontend.emit_c_ir(source, ir_file, include_paths);
  if (ir.exit_code != 0) throw failed("emitting IR", ir);
  ProcessResult ast = frontend.dump_c_ast(source, include_paths);
  if (ast.exit_code != 0) throw failed("dumping the JSON AST", ast);
  write_file(ast_file, ast.out);

  ProbeArtifacts artifacts;
  artifacts.ir_text = read_file(ir_file);
  artifacts.ast_json = std::move(ast.out);
  return artifacts;
}

BindRequest request_from_macro_args(const json& args) {
  if (!args.is_array() || args.size() != 4)
    throw BindgenError(BindgenError::Stage::Request,
                       "include takes four lists: (headers) (functions) (structs) (typedefs), got " + args.dump());
  BindRequest request;
  request.headers = name_list(args[0], "headers");
  request.functions = name_list(args[1], "functions");
  request.structs = name_list(args[2], "structs");
  request.typedefs = name_list(args[3], "typedefs");
  if (request.headers.empty()) throw BindgenError(BindgenError::Stage::Request, "include needs at least one header");
  return request;
}

}  // namespace clisp
