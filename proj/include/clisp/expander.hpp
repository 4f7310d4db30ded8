#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clisp/sexpr.hpp"

namespace clisp {

enum class MacroKind { Variable, Call, SpliceVariable, SpliceCall };

const char* to_string(MacroKind kind);

/// One macro expression found in a program: `["unquote", name]`,
/// `["unquote", [name, args...]]` or their `unquote-splicing` counterparts.
struct MacroExpr {
  MacroKind kind = MacroKind::Variable;
  std::string name;
  json args = json::array();  // empty for the variable kinds
  std::string path;           // JSON pointer of the macro node in the input
  std::optional<SourcePosition> site;

  bool is_splice() const { return kind == MacroKind::SpliceVariable || kind == MacroKind::SpliceCall; }
};

class MacroError : public Error {
 public:
  enum class Reason { Unresolved, Malformed, SpliceNotArray, SpliceWithoutParent, MacroFailed };

  MacroError(Reason reason, std::string message);

  Reason reason() const { return reason_; }
  const std::string& message() const { return message_; }
  const std::string& path() const { return path_; }
  const std::optional<SourcePosition>& site() const { return site_; }
  const char* what() const noexcept override { return what_.c_str(); }

  // Attaches the location of the macro node, unless one is already set.
  void locate(const std::string& path, std::optional<SourcePosition> site);

 private:
  void refresh();

  Reason reason_;
  std::string message_;
  std::string path_;
  std::optional<SourcePosition> site_;
  std::string what_;
};

/// Source of macro definitions. Unknown names must raise
/// MacroError(Reason::Unresolved); implementations never pass a name through.
class MacroResolver {
 public:
  virtual ~MacroResolver() = default;
  virtual json resolve_variable(const std::string& name) = 0;
  virtual json resolve_call(const std::string& name, const json& args) = 0;
};

// JSON pointer -> reader position for every node of a parsed program, so that
// macro diagnostics can name a line and column.
using PositionIndex = std::map<std::string, SourcePosition>;

PositionIndex index_positions(std::span<const SExpr> forms);

/// Depth-first, left-to-right, single-pass expansion. Results are substituted
/// verbatim and never re-scanned; call arguments are passed unexpanded.
json expand(const json& program, MacroResolver& resolver, const PositionIndex* positions = nullptr);

// Every macro expression `expand` would evaluate, in evaluation order.
std::vector<MacroExpr> scan_macros(const json& program, const PositionIndex* positions = nullptr);

}  // namespace clisp
