#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "clisp/bindgen.hpp"
#include "clisp/emitter.hpp"
#include "clisp/expander.hpp"
#include "clisp/frontend.hpp"
#include "clisp/host_resolver.hpp"
#include "clisp/sexpr.hpp"
#include "clisp/toolchain.hpp"

using namespace clisp;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kMacro = 3, kType = 4, kTool = 5, kInternal = 6 };

// Raised after diagnostics were already printed.
struct Failed {
  int code;
};

enum class Format { Auto, Json, Sexpr };

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    std::cerr << "cannot read " << path << "\n";
    throw Failed{kUsage};
  }
  return read_file(path);
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
  }
}

Format sniff(const std::string& path, const std::string& text, Format requested) {
  if (requested != Format::Auto) return requested;
  if (path.size() > 5 && path.ends_with(".json")) return Format::Json;
  auto first = text.find_first_not_of(" \t\r\n");
  return first != std::string::npos && text[first] == '[' ? Format::Json : Format::Sexpr;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::nullopt, std::string("invalid JSON: ") + e.what());
  }
}

struct Program {
  std::vector<SExpr> forms;
  std::optional<PositionIndex> positions;
};

Program load_program(const std::string& path, Format format) {
  std::string text = read_input(path);
  Program program;
  if (sniff(path, text, format) == Format::Json) {
    program.forms = forms_from_json(parse_json_text(text));
  } else {
    program.forms = parse_sexprs(text);
    program.positions = index_positions(program.forms);
  }
  return program;
}

std::string json_text(const json& value) { return value.dump() + "\n"; }

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> argv;
  for (std::string word; in >> word;) argv.push_back(word);
  return argv;
}

std::optional<std::string> flag_or_env(const std::string& flag, const char* env) {
  if (!flag.empty()) return flag;
  if (const char* v = std::getenv(env); v && *v) return std::string(v);
  return std::nullopt;
}

/// Routes `include` to the in-process binding pipeline (the C frontend is
/// located on first use) and every other name to the macro host, if any.
class CliResolver : public MacroResolver {
 public:
  CliResolver(std::string cc_flag, std::vector<std::string> includes, HostResolver* host)
      : cc_flag_(std::move(cc_flag)), includes_(std::move(includes)), host_(host) {}

  json resolve_variable(const std::string& name) override {
    if (bindgen_) return bindgen_->resolve_variable(name);
    if (host_) return host_->resolve_variable(name);
    throw MacroError(MacroError::Reason::Unresolved, "unresolved macro: " + name);
  }

  json resolve_call(const std::string& name, const json& args) override {
    if (name == "include") {
      if (!bindgen_) {
        toolchain_ = std::make_unique<Toolchain>(locate_tool(
            cc_flag_.empty() ? std::nullopt : std::optional(cc_flag_), "--cc", kFrontendEnv));
        bindgen_ = std::make_unique<BindgenResolver>(*toolchain_, includes_, host_);
      }
      return bindgen_->resolve_call(name, args);
    }
    if (host_) return host_->resolve_call(name, args);
    throw MacroError(MacroError::Reason::Unresolved, "unresolved macro: " + name);
  }

 private:
  std::string cc_flag_;
  std::vector<std::string> includes_;
  HostResolver* host_;
  std::unique_ptr<Toolchain> toolchain_;
  std::unique_ptr<BindgenResolver> bindgen_;
};

TypedModule check_program(const std::string& input, Format format) {
  Program program = load_program(input, format);
  CheckResult result = typecheck(parse_module(program.forms));
  if (!result.ok()) {
    for (const auto& e : result.errors) std::cerr << (input == "-" ? "<stdin>" : input) << ":" << e.to_string() << "\n";
    std::cerr << result.errors.size() << " type error" << (result.errors.size() == 1 ? "" : "s") << "\n";
    throw Failed{kType};
  }
  return std::move(*result.module);
}

std::string compile_text(const TypedModule& module, const std::string& entry) {
  std::string text = emit(module).text;
  if (!entry.empty()) text += emit_entry_shim(entry, module);
  return text;
}

std::string dry_run_listing(const std::vector<MacroExpr>& macros) {
  std::string out;
  for (const auto& m : macros) {
    out += (m.site ? to_string(*m.site) : m.path) + "\t" + to_string(m.kind) + "\t" + m.name;
    if (m.kind == MacroKind::Call || m.kind == MacroKind::SpliceCall) out += "\t" + m.args.dump();
    out += "\n";
  }
  return out;
}

std::string type_comment(const std::string& alias, const Type& type) {
  return "; typedef " + alias + " = " + print_sexpr(to_sexpr(type)) + "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"C-Lisp toolchain: S-expression conversion, macro expansion, LLVM IR emission, C bindings"};
  app.require_subcommand(1);

  const std::map<std::string, Format> kFormats{{"auto", Format::Auto}, {"json", Format::Json}, {"sexpr", Format::Sexpr}};

  std::string input = "-";
  std::string output = "-";
  Format format = Format::Auto;

  auto* s2json = app.add_subcommand("s2json", "Convert S-expression source to the JSON form");
  s2json->add_option("input", input, "Source file, - for stdin")->required();
  s2json->add_option("-o,--output", output, "Output file, - for stdout");

  auto* json2s = app.add_subcommand("json2s", "Convert the JSON form back to S-expressions");
  json2s->add_option("input", input, "JSON file, - for stdin")->required();
  json2s->add_option("-o,--output", output, "Output file, - for stdout");

  std::string macros, macro_host, cc;
  std::vector<std::string> includes;
  bool dry_run = false;
  auto* expand_cmd = app.add_subcommand("expand", "Expand unquote and unquote-splicing macros");
  expand_cmd->add_option("input", input, "Program (S-expression or JSON), - for stdin")->required();
  expand_cmd->add_option("-o,--output", output, "Output file, - for stdout");
  expand_cmd->add_option("--macros", macros, "Macro module served by the macro host");
  expand_cmd->add_option("--macro-host", macro_host, std::string("Macro host command (env ") + kMacroHostEnv + ")");
  expand_cmd->add_option("--cc", cc, std::string("C frontend for include (env ") + kFrontendEnv + ")");
  expand_cmd->add_option("-I", includes, "Include path for include");
  expand_cmd->add_option("--format", format, "Input format")->transform(CLI::CheckedTransformer(kFormats));
  expand_cmd->add_flag("--dry-run", dry_run, "List macro expressions without resolving them");

  std::string entry, toolchain;
  auto* compile_cmd = app.add_subcommand("compile", "Typecheck and emit LLVM IR");
  compile_cmd->add_option("input", input, "Expanded program, - for stdin")->required();
  compile_cmd->add_option("-o,--output", output, "Output .ll file, - for stdout");
  compile_cmd->add_option("--entry", entry, "Append a main that returns this function's result");
  compile_cmd->add_option("--format", format, "Input format")->transform(CLI::CheckedTransformer(kFormats));

  std::vector<std::string> link_inputs;
  auto* run_cmd = app.add_subcommand("run", "Compile, link and execute; exits with the program's status");
  run_cmd->add_option("input", input, "Expanded program, - for stdin")->required();
  run_cmd->add_option("--entry", entry, "Function returning int used as the program entry");
  run_cmd->add_option("--toolchain", toolchain, std::string("Compiler driver (env ") + kToolchainEnv + ")");
  run_cmd->add_option("--link", link_inputs, "Extra .c/.ll/.o inputs to link");
  run_cmd->add_option("--format", format, "Input format")->transform(CLI::CheckedTransformer(kFormats));

  BindRequest request;
  bool as_json = false;
  auto* bindgen_cmd = app.add_subcommand("bindgen", "Generate declarations from C headers");
  bindgen_cmd->add_option("--header", request.headers, "Header to include")->required();
  bindgen_cmd->add_option("--function", request.functions, "Function to bind");
  bindgen_cmd->add_option("--struct", request.structs, "Struct to bind");
  bindgen_cmd->add_option("--typedef", request.typedefs, "Typedef alias to resolve");
  bindgen_cmd->add_option("-I", includes, "Include path");
  bindgen_cmd->add_option("--cc", cc, std::string("C frontend (env ") + kFrontendEnv + ")");
  bindgen_cmd->add_option("-o,--output", output, "Output file, - for stdout");
  bindgen_cmd->add_flag("--json", as_json, "Print the JSON form");

  auto* verify_cmd = app.add_subcommand("verify", "Run the LLVM verifier on a .ll file");
  verify_cmd->add_option("input", input, "IR file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--toolchain", toolchain, std::string("Compiler driver (env ") + kToolchainEnv + ")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (s2json->parsed()) {
    auto forms = parse_sexprs(read_input(input));
    write_output(output, json_text(forms_to_json(forms)));
    return kOk;
  }

  if (json2s->parsed()) {
    auto forms = forms_from_json(parse_json_text(read_input(input)));
    write_output(output, print_forms(forms));
    return kOk;
  }

  if (expand_cmd->parsed()) {
    std::string text = read_input(input);
    Format in_format = sniff(input, text, format);
    Program program;
    json tree;
    if (in_format == Format::Json) {
      tree = parse_json_text(text);
      forms_from_json(tree);  // validates the kinds
    } else {
      program.forms = parse_sexprs(text);
      program.positions = index_positions(program.forms);
      tree = forms_to_json(program.forms);
    }
    const PositionIndex* positions = program.positions ? &*program.positions : nullptr;

    auto listed = scan_macros(tree, positions);
    if (dry_run) {
      write_output(output, dry_run_listing(listed));
      return kOk;
    }
    if (listed.empty()) {
      write_output(output, text);
      return kOk;
    }

    std::unique_ptr<HostResolver> host;
    if (!macros.empty()) {
      auto command = split_command(flag_or_env(macro_host, kMacroHostEnv).value_or("macro-host"));
      if (command.empty()) throw ToolError("--macro-host is empty");
      if (!find_executable(command[0]))
        throw ToolError("macro host '" + command[0] + "' not found; set --macro-host or " + kMacroHostEnv);
      command.push_back(macros);
      host = std::make_unique<HostResolver>(command);
    }
    CliResolver resolver(cc, includes, host.get());
    json expanded = expand(tree, resolver, positions);
    if (host) {
      if (int rc = host->close(); rc != 0) throw ToolError("macro host exited with status " + std::to_string(rc));
    }
    if (in_format == Format::Json) {
      write_output(output, json_text(expanded));
    } else {
      write_output(output, print_forms(forms_from_json(expanded)));
    }
    return kOk;
  }

  if (compile_cmd->parsed()) {
    TypedModule module = check_program(input, format);
    write_output(output, compile_text(module, entry));
    return kOk;
  }

  if (run_cmd->parsed()) {
    if (entry.empty()) entry = "main";
    TypedModule module = check_program(input, format);
    std::string text;
    if (entry == "main" && !module.find_signature("main") && link_inputs.empty())
      throw EntryError("no such function: main");
    text = entry == "main" ? emit(module).text : compile_text(module, entry);
    Toolchain tc(locate_tool(flag_or_env(toolchain, kToolchainEnv), "--toolchain", kToolchainEnv));

    ScratchDir scratch("clisp-run");
    auto ll = scratch.path() / "program.ll";
    auto exe = scratch.path() / "program";
    write_file(ll, text);
    VerifyResult verified = tc.verify(ll);
    if (!verified.ok) {
      scratch.keep();
      std::cerr << "internal error: emitted IR failed verification; kept " << ll.string() << "\n"
                << verified.diagnostics;
      return kInternal;
    }
    std::vector<std::filesystem::path> inputs{ll};
    for (const auto& extra : link_inputs) inputs.emplace_back(extra);
    tc.link(inputs, exe);
    std::cout.flush();
    return run_inherited({exe.string()});
  }

  if (bindgen_cmd->parsed()) {
    Toolchain tc(locate_tool(cc.empty() ? std::nullopt : std::optional(cc), "--cc", kFrontendEnv));
    Binding binding = clisp::bind(request, tc, includes);
    json forms = binding_forms(binding);
    if (as_json) {
      write_output(output, json_text(forms));
    } else {
      std::string text;
      for (const auto& [alias, type] : binding.aliases) text += type_comment(alias, type);
      text += print_forms(forms_from_json(forms));
      write_output(output, text);
    }
    return kOk;
  }

  if (verify_cmd->parsed()) {
    Toolchain tc(locate_tool(flag_or_env(toolchain, kToolchainEnv), "--toolchain", kToolchainEnv));
    VerifyResult verified = tc.verify(input);
    if (!verified.ok) {
      std::cerr << verified.diagnostics;
      return kTool;
    }
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failed& f) {
    return f.code;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const MacroError& e) {
    std::cerr << "macro error: " << e.what() << "\n";
    return kMacro;
  } catch (const EntryError& e) {
    std::cerr << "entry error: " << e.what() << "\n";
    return kType;
  } catch (const BindgenError& e) {
    std::cerr << e.what() << "\n";
    return kTool;
  } catch (const ToolError& e) {
    std::cerr << "tool error: " << e.what() << "\n";
    return kTool;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
