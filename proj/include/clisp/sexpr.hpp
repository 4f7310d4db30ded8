#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clisp/error.hpp"
#include "json.hpp"

namespace clisp {

using json = nlohmann::json;

struct SourcePosition {
  std::uint32_t line = 1;
  std::uint32_t column = 1;

  auto operator<=>(const SourcePosition&) const = default;
};

std::string to_string(SourcePosition pos);

class ParseError : public Error {
 public:
  ParseError(std::optional<SourcePosition> pos, const std::string& message);

  const std::optional<SourcePosition>& position() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  std::optional<SourcePosition> pos_;
  std::string message_;
};

struct Symbol {
  std::string text;
  bool operator==(const Symbol&) const = default;
};

struct String {
  std::string text;
  bool operator==(const String&) const = default;
};

/// A node of the universal program representation: a symbol, integer, float,
/// string literal, or a list of nodes. Nodes produced by the reader carry the
/// position of their first character; equality ignores positions.
class SExpr {
 public:
  using List = std::vector<SExpr>;
  enum class Kind { Symbol, Integer, Float, String, List };

  SExpr() : value_(List{}) {}

  static SExpr symbol(std::string text, std::optional<SourcePosition> pos = {});
  static SExpr integer(std::int64_t value, std::optional<SourcePosition> pos = {});
  static SExpr real(double value, std::optional<SourcePosition> pos = {});
  static SExpr string(std::string text, std::optional<SourcePosition> pos = {});
  static SExpr list(List items, std::optional<SourcePosition> pos = {});

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_symbol(std::string_view text) const;
  bool is_integer() const { return kind() == Kind::Integer; }
  bool is_float() const { return kind() == Kind::Float; }
  bool is_string() const { return kind() == Kind::String; }
  bool is_list() const { return kind() == Kind::List; }

  // True for a nonempty list whose first element is the given symbol.
  bool is_form(std::string_view head) const;

  // Text of a Symbol or String atom.
  const std::string& text() const;
  std::int64_t as_integer() const;
  double as_float() const;
  const List& items() const;
  List& items();

  const std::optional<SourcePosition>& position() const { return pos_; }
  void set_position(std::optional<SourcePosition> pos) { pos_ = pos; }

  bool operator==(const SExpr& other) const;

 private:
  using Value = std::variant<Symbol, std::int64_t, double, String, List>;
  SExpr(Value value, std::optional<SourcePosition> pos)
      : value_(std::move(value)), pos_(pos) {}

  Value value_;
  std::optional<SourcePosition> pos_;
};

const char* kind_name(SExpr::Kind kind);

// Whether `text` may be the text of a Symbol: nonempty, free of whitespace,
// parentheses, double quotes, semicolons and commas, and not lexing as a number.
bool is_valid_symbol(std::string_view text);

/// Reads every top-level form. `;` starts a line comment, `,X` reads as
/// (unquote X) and `,@X` as (unquote-splicing X).
std::vector<SExpr> parse_sexprs(std::string_view text);

// Canonical single-line rendering; re-reads to an equal tree.
std::string print_sexpr(const SExpr& expr);
// One canonical form per line.
std::string print_forms(std::span<const SExpr> forms);

// The head of a two-element JSON array that encodes a string literal.
inline constexpr std::string_view kStringMarker = "string";

json to_json(const SExpr& expr);
SExpr from_json(const json& value);

json forms_to_json(std::span<const SExpr> forms);
// `value` must be an array; each element becomes one form.
std::vector<SExpr> forms_from_json(const json& value);

}  // namespace clisp
