#include "clisp/expander.hpp"

#include <functional>

namespace clisp {

namespace {

constexpr std::string_view kUnquote = "unquote";
constexpr std::string_view kUnquoteSplicing = "unquote-splicing";

bool is_head(const json& node, std::string_view head) {
  return node.is_array() && !node.empty() && node[0].is_string() &&
         node[0].get_ref<const std::string&>() == head;
}

bool is_macro_node(const json& node) { return is_head(node, kUnquote) || is_head(node, kUnquoteSplicing); }

bool is_string_literal(const json& node) {
  return node.is_array() && node.size() == 2 && is_head(node, kStringMarker) && node[1].is_string();
}

std::optional<SourcePosition> lookup(const PositionIndex* positions, const std::string& path) {
  if (!positions) return std::nullopt;
  auto it = positions->find(path);
  if (it == positions->end()) return std::nullopt;
  return it->second;
}

MacroExpr classify(const json& node, const std::string& path, const PositionIndex* positions) {
  const bool splice = is_head(node, kUnquoteSplicing);
  const std::string head(splice ? kUnquoteSplicing : kUnquote);
  auto malformed = [&](const std::string& why) {
    MacroError err(MacroError::Reason::Malformed, "malformed " + head + " node " + node.dump() + ": " + why);
    err.locate(path, lookup(positions, path));
    return err;
  };
  if (node.size() != 2) throw malformed("expected exactly one operand");

  MacroExpr expr;
  expr.path = path;
  expr.site = lookup(positions, path);
  const json& operand = node[1];
  if (operand.is_string()) {
    expr.kind = splice ? MacroKind::SpliceVariable : MacroKind::Variable;
    expr.name = operand.get<std::string>();
    if (expr.name.empty()) throw malformed("empty macro name");
  } else if (operand.is_array()) {
    if (operand.empty()) throw malformed("empty macro call");
    if (!operand[0].is_string()) throw malformed("macro call head must be a name");
    expr.kind = splice ? MacroKind::SpliceCall : MacroKind::Call;
    expr.name = operand[0].get<std::string>();
    expr.args = json::array();
    for (std::size_t i = 1; i < operand.size(); ++i) expr.args.push_back(operand[i]);
  } else {
    throw malformed("operand must be a name or a call");
  }
  return expr;
}

// Shared traversal for expand and scan. `on_macro` returns the replacement
// value for a macro node.
class Walker {
 public:
  using Handler = std::function<json(const MacroExpr&)>;

  Walker(const PositionIndex* positions, Handler on_macro)
      : positions_(positions), on_macro_(std::move(on_macro)) {}

  // A scan lists a parentless splice instead of rejecting it; only
  // expansion needs somewhere to put the spliced elements.
  json walk_root(const json& program, bool scan_only = false) {
    if (is_macro_node(program) && is_head(program, kUnquoteSplicing)) {
      MacroExpr expr = classify(program, "", positions_);
      if (scan_only) return on_macro_(expr);
      MacroError err(MacroError::Reason::SpliceWithoutParent,
                     "unquote-splicing of '" + expr.name + "' has no enclosing list to splice into");
      err.locate(expr.path, expr.site);
      throw err;
    }
    return walk(program, "");
  }

 private:
  json walk(const json& node, const std::string& path) {
    if (!node.is_array() || is_string_literal(node)) return node;
    if (is_macro_node(node)) return evaluate(classify(node, path, positions_));

    json out = json::array();
    for (std::size_t i = 0; i < node.size(); ++i) {
      const json& child = node[i];
      std::string child_path = path + "/" + std::to_string(i);
      if (is_head(child, kUnquoteSplicing)) {
        MacroExpr expr = classify(child, child_path, positions_);
        json result = evaluate(expr);
        if (!result.is_array()) {
          MacroError err(MacroError::Reason::SpliceNotArray,
                         "splicing macro '" + expr.name + "' must produce a list, got " + result.dump());
          err.locate(expr.path, expr.site);
          throw err;
        }
        for (json& element : result) out.push_back(std::move(element));
      } else {
        out.push_back(walk(child, child_path));
      }
    }
    return out;
  }

  json evaluate(const MacroExpr& expr) {
    try {
      return on_macro_(expr);
    } catch (MacroError& err) {
      err.locate(expr.path, expr.site);
      throw;
    }
  }

  const PositionIndex* positions_;
  Handler on_macro_;
};

void index_into(const SExpr& expr, const std::string& path, PositionIndex& index) {
  if (expr.position()) index.emplace(path, *expr.position());
  // String atoms become ["string", text] in JSON; their children have no
  // reader positions of their own.
  if (!expr.is_list()) return;
  const auto& items = expr.items();
  for (std::size_t i = 0; i < items.size(); ++i) index_into(items[i], path + "/" + std::to_string(i), index);
}

}  // namespace

const char* to_string(MacroKind kind) {
  switch (kind) {
    case MacroKind::Variable: return "variable";
    case MacroKind::Call: return "call";
    case MacroKind::SpliceVariable: return "splice-variable";
    case MacroKind::SpliceCall: return "splice-call";
  }
  return "?";
}

MacroError::MacroError(Reason reason, std::string message)
    : Error(message), reason_(reason), message_(std::move(message)) {
  refresh();
}

void MacroError::locate(const std::string& path, std::optional<SourcePosition> site) {
  if (!site_ && path_.empty()) {
    path_ = path;
    site_ = site;
    refresh();
  }
}

void MacroError::refresh() {
  what_.clear();
  if (site_) {
    what_ = to_string(*site_) + ": ";
  } else if (!path_.empty()) {
    what_ = "at " + path_ + ": ";
  }
  what_ += message_;
}

PositionIndex index_positions(std::span<const SExpr> forms) {
  PositionIndex index;
  for (std::size_t i = 0; i < forms.size(); ++i) index_into(forms[i], "/" + std::to_string(i), index);
  return index;
}

json expand(const json& program, MacroResolver& resolver, const PositionIndex* positions) {
  Walker walker(positions, [&resolver](const MacroExpr& expr) -> json {
    switch (expr.kind) {
      case MacroKind::Variable:
      case MacroKind::SpliceVariable:
        return resolver.resolve_variable(expr.name);
      case MacroKind::Call:
      case MacroKind::SpliceCall:
        return resolver.resolve_call(expr.name, expr.args);
    }
    throw InternalError("unreachable");
  });
  return walker.walk_root(program);
}

std::vector<MacroExpr> scan_macros(const json& program, const PositionIndex* positions) {
  std::vector<MacroExpr> found;
  Walker walker(positions, [&found](const MacroExpr& expr) -> json {
    found.push_back(expr);
    // Splices need an array placeholder; the value is discarded.
    return json::array();
  });
  walker.walk_root(program, true);
  return found;
}

}  // namespace clisp
