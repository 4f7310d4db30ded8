#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clisp/process.hpp"

namespace clisp {

inline constexpr const char* kToolchainEnv = "CLISP_TOOLCHAIN";
inline constexpr const char* kFrontendEnv = "CLISP_CC";

// Picks a program from, in order: the flag value, the environment variable,
// `fallback` on PATH. The ToolError names both the flag and the variable.
std::filesystem::path locate_tool(const std::optional<std::string>& flag_value, const std::string& flag_name,
                                  const char* env_var, const std::string& fallback = "clang");

struct VerifyResult {
  bool ok = false;
  std::string diagnostics;
};

/// A clang-compatible compiler driver used to verify, assemble and link
/// textual IR and to run the C frontend for binding generation.
class Toolchain {
 public:
  explicit Toolchain(std::filesystem::path compiler) : compiler_(std::move(compiler)) {}

  const std::filesystem::path& compiler() const { return compiler_; }

  // Extra flags needed for the driver to read and write opaque-pointer IR
  // (empty on LLVM versions where that is the default). Probed once.
  const std::vector<std::string>& opaque_pointer_flags();

  // Runs the LLVM IR verifier over a textual module.
  VerifyResult verify(const std::filesystem::path& ll_file);

  // Compiles and links .ll / .c inputs into an executable. Throws ToolError
  // carrying the driver's diagnostics.
  void link(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& exe);

  // Unoptimized textual IR for a C file.
  ProcessResult emit_c_ir(const std::filesystem::path& c_file, const std::filesystem::path& ll_out,
                          const std::vector<std::string>& include_paths);

  // The frontend's JSON AST dump for a C file, on stdout.
  ProcessResult dump_c_ast(const std::filesystem::path& c_file, const std::vector<std::string>& include_paths);

 private:
  std::filesystem::path compiler_;
  std::optional<std::vector<std::string>> opaque_flags_;
};

}  // namespace clisp
