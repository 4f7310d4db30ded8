#include "clisp/toolchain.hpp"

#include <cstdlib>

namespace clisp {

std::filesystem::path locate_tool(const std::optional<std::string>& flag_value, const std::string& flag_name,
                                  const char* env_var, const std::string& fallback) {
  std::string hint = "set " + flag_name + " or the " + env_var + " environment variable";
  if (flag_value && !flag_value->empty()) {
    if (auto p = find_executable(*flag_value)) return *p;
    throw ToolError("tool '" + *flag_value + "' given by " + flag_name + " was not found");
  }
  if (const char* env = std::getenv(env_var); env && *env) {
    if (auto p = find_executable(env)) return *p;
    throw ToolError(std::string("tool '") + env + "' given by " + env_var + " was not found; " + hint);
  }
  if (auto p = find_executable(fallback)) return *p;
  throw ToolError("no '" + fallback + "' on PATH; " + hint);
}

const std::vector<std::string>& Toolchain::opaque_pointer_flags() {
  if (opaque_flags_) return *opaque_flags_;
  static constexpr std::string_view kProbe = "define void @probe(ptr %p) {\n  ret void\n}\n";
  const std::vector<std::vector<std::string>> candidates = {{}, {"-mllvm", "-opaque-pointers"}};
  std::string last_error;
  for (const auto& flags : candidates) {
    std::vector<std::string> argv{compiler_.string(), "-x", "ir", "-c", "-", "-o", "/dev/null", "-Wno-override-module"};
    argv.insert(argv.end(), flags.begin(), flags.end());
    ProcessResult r = run_process(argv, kProbe);
    if (r.exit_code == 0) {
      opaque_flags_ = flags;
      return *opaque_flags_;
    }
    last_error = r.err;
  }
  throw ToolError(compiler_.string() + " cannot read opaque-pointer LLVM IR:\n" + last_error);
}

VerifyResult Toolchain::verify(const std::filesystem::path& ll_file) {
  // The driver disables the verifier in release builds; the cc1 layer runs it.
  std::vector<std::string> argv{compiler_.string(), "-cc1", "-x", "ir", "-emit-llvm-bc", "-Wno-override-module"};
  const auto& flags = opaque_pointer_flags();
  argv.insert(argv.end(), flags.begin(), flags.end());
  argv.insert(argv.end(), {ll_file.string(), "-o", "/dev/null"});
  ProcessResult r = run_process(argv);
  return VerifyResult{r.exit_code == 0 && r.err.empty(), r.err};
}

void Toolchain::link(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& exe) {
  std::vector<std::string> argv{compiler_.string(), "-Wno-override-module", "-o", exe.string()};
  const auto& flags = opaque_pointer_flags();
  argv.insert(argv.end(), flags.begin(), flags.end());
  for (const auto& in : inputs) argv.push_back(in.string());
  ProcessResult r = run_process(argv);
  if (r.exit_code != 0) throw ToolError(compiler_.string() + " failed to build " + exe.string() + ":\n" + r.err);
}

ProcessResult Toolchain::emit_c_ir(const std::filesystem::path& c_file, const std::filesystem::path& ll_out,
                                   const std::vector<std::string>& include_paths) {
  std::vector<std::string> argv{compiler_.string(), "-x", "c", "-S", "-emit-llvm", "-O0"};
  const auto& flags = opaque_pointer_flags();
  argv.insert(argv.end(), flags.begin(), flags.end());
  for (const auto& inc : include_paths) argv.push_back("-I" + inc);
  argv.insert(argv.end(), {c_file.string(), "-o", ll_out.string()});
  return run_process(argv);
}

ProcessResult Toolchain::dump_c_ast(const std::filesystem::path& c_file, const std::vector<std::string>& include_paths) {
  std::vector<std::string> argv{compiler_.string(), "-x", "c", "-fsyntax-only", "-Xclang", "-ast-dump=json"};
  for (const auto& inc : include_paths) argv.push_back("-I" + inc);
  argv.push_back(c_file.string());
  return run_process(argv);
}

}  // namespace clisp
