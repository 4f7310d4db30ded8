#include "clisp/sexpr.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace clisp {

std::string to_string(SourcePosition pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

static std::string format_parse_error(const std::optional<SourcePosition>& pos,
                                      const std::string& message) {
  return pos ? to_string(*pos) + ": " + message : message;
}

ParseError::ParseError(std::optional<SourcePosition> pos, const std::string& message)
    : Error(format_parse_error(pos, message)), pos_(pos), message_(message) {}

SExpr SExpr::symbol(std::string text, std::optional<SourcePosition> pos) {
  return SExpr(Symbol{std::move(text)}, pos);
}
SExpr SExpr::integer(std::int64_t value, std::optional<SourcePosition> pos) {
  return SExpr(value, pos);
}
SExpr SExpr::real(double value, std::optional<SourcePosition> pos) {
  return SExpr(value, pos);
}
SExpr SExpr::string(std::string text, std::optional<SourcePosition> pos) {
  return SExpr(String{std::move(text)}, pos);
}
SExpr SExpr::list(List items, std::optional<SourcePosition> pos) {
  return SExpr(std::move(items), pos);
}

bool SExpr::is_symbol(std::string_view text) const {
  return is_symbol() && std::get<Symbol>(value_).text == text;
}

bool SExpr::is_form(std::string_view head) const {
  return is_list() && !items().empty() && items().front().is_symbol(head);
}

const std::string& SExpr::text() const {
  if (auto* sym = std::get_if<Symbol>(&value_)) return sym->text;
  if (auto* str = std::get_if<String>(&value_)) return str->text;
  throw InternalError(std::string("text() on ") + kind_name(kind()));
}

std::int64_t SExpr::as_integer() const {
  if (auto* v = std::get_if<std::int64_t>(&value_)) return *v;
  throw InternalError(std::string("as_integer() on ") + kind_name(kind()));
}

double SExpr::as_float() const {
  if (auto* v = std::get_if<double>(&value_)) return *v;
  throw InternalError(std::string("as_float() on ") + kind_name(kind()));
}

const SExpr::List& SExpr::items() const {
  if (auto* v = std::get_if<List>(&value_)) return *v;
  throw InternalError(std::string("items() on ") + kind_name(kind()));
}

SExpr::List& SExpr::items() {
  if (auto* v = std::get_if<List>(&value_)) return *v;
  throw InternalError(std::string("items() on ") + kind_name(kind()));
}

bool SExpr::operator==(const SExpr& other) const { return value_ == other.value_; }

const char* kind_name(SExpr::Kind kind) {
  switch (kind) {
    case SExpr::Kind::Symbol: return "symbol";
    case SExpr::Kind::Integer: return "integer";
    case SExpr::Kind::Float: return "float";
    case SExpr::Kind::String: return "string";
    case SExpr::Kind::List: return "list";
  }
  return "?";
}

namespace {

bool is_delimiter(char c) {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case '(': case ')': case '"': case ';': case ',':
      return true;
    default:
      return false;
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

enum class NumberShape { None, Integer, Float };

// Optionally-signed decimal integer, or a decimal real carrying a `.` or an
// exponent.
NumberShape classify_number(std::string_view tok) {
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
  std::size_t int_digits = 0;
  while (i < tok.size() && is_digit(tok[i])) ++i, ++int_digits;
  bool has_dot = false;
  std::size_t frac_digits = 0;
  if (i < tok.size() && tok[i] == '.') {
    has_dot = true;
    ++i;
    while (i < tok.size() && is_digit(tok[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return NumberShape::None;
  bool has_exp = false;
  if (i < tok.size() && (tok[i] == 'e' || tok[i] == 'E')) {
    has_exp = true;
    ++i;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < tok.size() && is_digit(tok[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return NumberShape::None;
  }
  if (i != tok.size()) return NumberShape::None;
  return (has_dot || has_exp) ? NumberShape::Float : NumberShape::Integer;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> forms;
    for (;;) {
      skip_atmosphere();
      if (at_end()) break;
      if (peek() == ')') throw ParseError(here(), "unexpected ')'");
      forms.push_back(read());
    }
    return forms;
  }

 private:
  bool at_end() const { return offset_ >= text_.size(); }
  char peek() const { return text_[offset_]; }
  SourcePosition here() const { return {line_, column_}; }

  void advance() {
    char c = text_[offset_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++column_;
    }
  }

  void skip_atmosphere() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SourcePosition start = here();
    char c = peek();
    if (c == '(') {
      advance();
      SExpr::List items;
      for (;;) {
        skip_atmosphere();
        if (at_end()) throw ParseError(start, "unbalanced '(': missing ')'");
        if (peek() == ')') {
          advance();
          return SExpr::list(std::move(items), start);
        }
        items.push_back(read());
      }
    }
    if (c == '"') return read_string(start);
    if (c == ',') {
      advance();
      std::string head = "unquote";
      if (!at_end() && peek() == '@') {
        advance();
        head = "unquote-splicing";
      }
      skip_atmosphere();
      if (at_end() || peek() == ')') throw ParseError(start, "'" + std::string(head == "unquote" ? "," : ",@") + "' must be followed by an expression");
      SExpr operand = read();
      SExpr::List items;
      items.push_back(SExpr::symbol(std::move(head), start));
      items.push_back(std::move(operand));
      return SExpr::list(std::move(items), start);
    }
    return read_atom(start);
  }

  SExpr read_string(SourcePosition start) {
    advance();  // opening quote
    std::string out;
    for (;;) {
      if (at_end()) throw ParseError(start, "unterminated string literal");
      char c = peek();
      if (c == '"') {
        advance();
        return SExpr::string(std::move(out), start);
      }
      if (c == '\\') {
        SourcePosition esc = here();
        advance();
        if (at_end()) throw ParseError(start, "unterminated string literal");
        char e = peek();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw ParseError(esc, std::string("unknown escape sequence '\\") + e + "'");
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
  }

  SExpr read_atom(SourcePosition start) {
    std::size_t begin = offset_;
    while (!at_end() && !is_delimiter(peek())) advance();
    std::string_view tok = text_.substr(begin, offset_ - begin);
    switch (classify_number(tok)) {
      case NumberShape::Integer: {
        std::string_view digits = tok.front() == '+' ? tok.substr(1) : tok;
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc() || ptr != digits.data() + digits.size())
          throw ParseError(start, "integer literal out of range: " + std::string(tok));
        return SExpr::integer(value, start);
      }
      case NumberShape::Float: {
        std::string_view digits = tok.front() == '+' ? tok.substr(1) : tok;
        double value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(value))
          throw ParseError(start, "float literal out of range: " + std::string(tok));
        return SExpr::real(value, start);
      }
      case NumberShape::None:
        return SExpr::symbol(std::string(tok), start);
    }
    throw InternalError("unreachable");
  }

  std::string_view text_;
  std::size_t offset_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t column_ = 1;
};

std::string print_float(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw InternalError("cannot format float");
  std::string out(buf, ptr);
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

void print_into(const SExpr& expr, std::string& out) {
  switch (expr.kind()) {
    case SExpr::Kind::Symbol:
      out += expr.text();
      break;
    case SExpr::Kind::Integer:
      out += std::to_string(expr.as_integer());
      break;
    case SExpr::Kind::Float:
      out += print_float(expr.as_float());
      break;
    case SExpr::Kind::String:
      out += '"';
      for (char c : expr.text()) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out += c;
        }
      }
      out += '"';
      break;
    case SExpr::Kind::List: {
      out += '(';
      bool first = true;
      for (const SExpr& item : expr.items()) {
        if (!first) out += ' ';
        first = false;
        print_into(item, out);
      }
      out += ')';
      break;
    }
  }
}

}  // namespace

bool is_valid_symbol(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text)
    if (is_delimiter(c)) return false;
  return classify_number(text) == NumberShape::None;
}

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

std::string print_sexpr(const SExpr& expr) {
  std::string out;
  print_into(expr, out);
  return out;
}

std::string print_forms(std::span<const SExpr> forms) {
  std::string out;
  for (const SExpr& form : forms) {
    print_into(form, out);
    out += '\n';
  }
  return out;
}

json to_json(const SExpr& expr) {
  switch (expr.kind()) {
    case SExpr::Kind::Symbol:
      return expr.text();
    case SExpr::Kind::Integer:
      return expr.as_integer();
    case SExpr::Kind::Float:
      return expr.as_float();
    case SExpr::Kind::String:
      return json::array({std::string(kStringMarker), expr.text()});
    case SExpr::Kind::List: {
      json out = json::array();
      for (const SExpr& item : expr.items()) out.push_back(to_json(item));
      return out;
    }
  }
  throw InternalError("unreachable");
}

SExpr from_json(const json& value) {
  switch (value.type()) {
    case json::value_t::string: {
      const auto& text = value.get_ref<const std::string&>();
      if (!is_valid_symbol(text))
        throw ParseError(std::nullopt, "JSON string \"" + text + "\" is not a valid symbol");
      return SExpr::symbol(text);
    }
    case json::value_t::number_integer:
      return SExpr::integer(value.get<std::int64_t>());
    case json::value_t::number_unsigned: {
      auto v = value.get<std::uint64_t>();
      if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw ParseError(std::nullopt, "JSON integer out of 64-bit signed range: " + value.dump());
      return SExpr::integer(static_cast<std::int64_t>(v));
    }
    case json::value_t::number_float:
      return SExpr::real(value.get<double>());
    case json::value_t::array: {
      if (value.size() == 2 && value[0].is_string() && value[0].get_ref<const std::string&>() == kStringMarker &&
          value[1].is_string())
        return SExpr::string(value[1].get<std::string>());
      SExpr::List items;
      items.reserve(value.size());
      for (const json& item : value) items.push_back(from_json(item));
      return SExpr::list(std::move(items));
    }
    case json::value_t::object:
      throw ParseError(std::nullopt, "JSON objects are not part of the program representation");
    case json::value_t::null:
      throw ParseError(std::nullopt, "JSON null is not part of the program representation");
    case json::value_t::boolean:
      throw ParseError(std::nullopt, "JSON booleans are not part of the program representation");
    default:
      throw ParseError(std::nullopt, "unsupported JSON value: " + value.dump());
  }
}

json forms_to_json(std::span<const SExpr> forms) {
  json out = json::array();
  for (const SExpr& form : forms) out.push_back(to_json(form));
  return out;
}

std::vector<SExpr> forms_from_json(const json& value) {
  if (!value.is_array())
    throw ParseError(std::nullopt, "program must be a JSON array of forms");
  std::vector<SExpr> forms;
  forms.reserve(value.size());
  for (const json& item : value) forms.push_back(from_json(item));
  return forms;
}

}  // namespace clisp
