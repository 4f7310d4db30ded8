#include "clisp/host_resolver.hpp"

namespace clisp {

HostResolver::HostResolver(const std::vector<std::string>& command)
    : command_(command), process_(std::make_unique<LineProcess>(command)) {}

HostResolver::~HostResolver() = default;

json HostResolver::make_request(std::int64_t id, const std::string& kind, const std::string& name, const json* args) {
  json request = {{"id", id}, {"kind", kind}, {"name", name}};
  if (args) request["args"] = *args;
  return request;
}

json HostResolver::resolve_variable(const std::string& name) { return round_trip("variable", name, nullptr); }

json HostResolver::resolve_call(const std::string& name, const json& args) { return round_trip("call", name, &args); }

int HostResolver::close() { return process_->finish(); }

json HostResolver::round_trip(const std::string& kind, const std::string& name, const json* args) {
  const std::int64_t id = next_id_++;
  const std::string host = command_.empty() ? "macro host" : command_.front();
  process_->write_line(make_request(id, kind, name, args).dump());
  auto line = process_->read_line();
  if (!line) throw ToolError(host + " exited without answering request " + std::to_string(id) + " (" + name + ")");

  json response;
  try {
    response = json::parse(*line);
  } catch (const json::parse_error& e) {
    throw ToolError(host + " sent a malformed response: " + *line);
  }
  if (!response.is_object() || !response.contains("id") || !response.contains("ok") || !response["ok"].is_boolean())
    throw ToolError(host + " sent a malformed response: " + *line);
  if (response["id"] != id)
    throw ToolError(host + " answered request " + response["id"].dump() + " while " + std::to_string(id) +
                    " was pending");

  if (response["ok"].get<bool>()) {
    if (!response.contains("value")) throw ToolError(host + " sent ok:true without a value: " + *line);
    return response["value"];
  }
  std::string error = response.contains("error") && response["error"].is_string()
                          ? response["error"].get<std::string>()
                          : response.value("error", json()).dump();
  auto reason = error.rfind("unresolved macro:", 0) == 0 ? MacroError::Reason::Unresolved
                                                         : MacroError::Reason::MacroFailed;
  throw MacroError(reason, error);
}

}  // namespace clisp
