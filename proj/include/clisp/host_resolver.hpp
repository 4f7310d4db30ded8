#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "clisp/expander.hpp"
#include "clisp/process.hpp"

namespace clisp {

inline constexpr const char* kMacroHostEnv = "CLISP_MACRO_HOST";

/// MacroResolver backed by an out-of-process macro host. One JSON object per
/// line in each direction:
///   -> {"id":N,"kind":"variable","name":"EOF"}
///   -> {"id":N,"kind":"call","name":"incr","args":["var",45]}
///   <- {"id":N,"ok":true,"value":...} | {"id":N,"ok":false,"error":"..."}
/// A host error text starting with "unresolved macro:" maps to
/// MacroError::Reason::Unresolved; other host errors to MacroFailed. A dead or
/// misbehaving host raises ToolError.
class HostResolver : public MacroResolver {
 public:
  explicit HostResolver(const std::vector<std::string>& command);
  ~HostResolver() override;

  json resolve_variable(const std::string& name) override;
  json resolve_call(const std::string& name, const json& args) override;

  // Closes the session; returns the host's exit code.
  int close();

  static json make_request(std::int64_t id, const std::string& kind, const std::string& name, const json* args);

 private:
  json round_trip(const std::string& kind, const std::string& name, const json* args);

  std::vector<std::string> command_;
  std::unique_ptr<LineProcess> process_;
  std::int64_t next_id_ = 1;
};

}  // namespace clisp
