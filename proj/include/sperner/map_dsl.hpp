#pragma once

// Text format for map definitions:
//
//   # rotation of the first three coordinates
//   f1 = x3; f2 = x1; f3 = x2
//   tail zeros
//   post project
//
// Statements are separated by ';' or newlines. Components f1..fm must all be
// present. Expressions use + - * /, unary minus, parentheses, decimal
// literals, variables x1, x2, ... and the functions min, max, abs and
// pow(expr, number). Coordinates not supplied by the input point read as 0.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sperner/errors.hpp"
#include "sperner/map.hpp"
#include "sperner/point.hpp"

namespace sperner {

struct Expr {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Min, Max, Abs, Pow };
  Kind kind = Kind::Number;
  double number = 0.0;     // Number, and the exponent of Pow
  std::size_t var = 0;     // Variable index (1-based)
  std::vector<Expr> args;  // operands

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct TailRule {
  enum class Kind { Zeros, ShiftFrom };
  Kind kind = Kind::Zeros;
  std::size_t from = 0;  // ShiftFrom(j): f_i = x_{i-j+1} for i >= j past the listed components

  friend bool operator==(const TailRule&, const TailRule&) = default;
};

enum class PostStep { None, ProjectToSimplex };

struct MapSpec {
  std::vector<Expr> components;
  TailRule tail;
  PostStep post = PostStep::None;

  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

namespace dsl {

struct Token {
  enum class Kind { Ident, Number, Symbol, Separator, End };
  Kind kind;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::End: return "end of input";
    case Token::Kind::Separator: return t.text == ";" ? "';'" : "end of line";
    default: return "'" + t.text + "'";
  }
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t s = 0; s < n; ++s, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '\n' || c == ';') {
      out.push_back({Token::Kind::Separator, c == ';' ? ";" : "\n", 0.0, line, col});
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), 0.0, line, col});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      const std::string text(src.substr(i, j - i));
      double v = 0.0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
        throw SyntaxError("malformed number '" + text + "'", line, col, {"number"});
      out.push_back({Token::Kind::Number, text, v, line, col});
      advance(j - i);
      continue;
    }
    if (std::string_view("+-*/(),=").find(c) != std::string_view::npos) {
      out.push_back({Token::Kind::Symbol, std::string(1, c), 0.0, line, col});
      advance(1);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, col, {});
  }
  out.push_back({Token::Kind::End, "", 0.0, line, col});
  return out;
}

/// Parses "<prefix><digits>" with no leading zero; 0 if the shape does not match.
inline std::size_t indexed_name(std::string_view name, char prefix) {
  if (name.size() < 2 || name[0] != prefix || name[1] == '0') return 0;
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || p != name.data() + name.size()) return 0;
  return v;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  MapSpec parse_map() {
    MapSpec spec;
    std::vector<std::optional<Expr>> slots;
    std::vector<Token> where;
    bool saw_tail = false, saw_post = false;
    skip_separators();
    while (peek().kind != Token::Kind::End) {
      const Token head = peek();
      if (head.kind != Token::Kind::Ident)
        fail_expected(head, "expected a statement", {"component (f1, f2, ...)", "tail", "post"});
      if (head.text == "tail") {
        if (saw_tail) fail(head, "duplicate tail directive");
        saw_tail = true;
        next();
        spec.tail = parse_tail();
      } else if (head.text == "post") {
        if (saw_post) fail(head, "duplicate post directive");
        saw_post = true;
        next();
        const Token t = next();
        if (t.kind != Token::Kind::Ident || t.text != "project")
          fail_expected(t, "expected 'project' after 'post', found " + describe(t), {"project"});
        spec.post = PostStep::ProjectToSimplex;
      } else {
        const std::size_t idx = indexed_name(head.text, 'f');
        if (idx == 0)
          fail_expected(head, "expected a statement, found " + describe(head),
                        {"component (f1, f2, ...)", "tail", "post"});
        next();
        expect_symbol("=");
        Expr e = parse_expr();
        if (slots.size() < idx) {
          slots.resize(idx);
          where.resize(idx, head);
        }
        if (slots[idx - 1]) fail(head, "duplicate component " + head.text);
        slots[idx - 1] = std::move(e);
        where[idx - 1] = head;
      }
      const Token sep = peek();
      if (sep.kind != Token::Kind::Separator && sep.kind != Token::Kind::End)
        fail_expected(sep, "expected ';' or end of line, found " + describe(sep),
                      {"';'", "end of line", "operator"});
      skip_separators();
    }
    if (slots.empty()) {
      const Token& end = peek();
      throw EmptyComponentList("map defines no components", end.line, end.column);
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) {
        const Token& after = where[slots.size() - 1];
        throw SyntaxError("component f" + std::to_string(i + 1) + " is missing", after.line,
                          after.column, {"f" + std::to_string(i + 1)});
      }
      spec.components.push_back(std::move(*slots[i]));
    }
    return spec;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& previous() const { return tokens_[pos_ - 1]; }
  Token next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  void skip_separators() {
    while (peek().kind == Token::Kind::Separator) next();
  }

  bool at_symbol(const char* s) const {
    return peek().kind == Token::Kind::Symbol && peek().text == s;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(msg, t.line, t.column, {});
  }

  [[noreturn]] void fail_expected(const Token& t, const std::string& msg,
                                  std::set<std::string> expected) const {
    throw SyntaxError(msg, t.line, t.column, std::move(expected));
  }

  void expect_symbol(const char* s) {
    if (!at_symbol(s))
      fail_expected(peek(), std::string("expected '") + s + "', found " + describe(peek()),
                    {std::string("'") + s + "'"});
    next();
  }

  TailRule parse_tail() {
    const Token t = next();
    if (t.kind == Token::Kind::Ident && t.text == "zeros") return {TailRule::Kind::Zeros, 0};
    if (t.kind == Token::Kind::Ident && t.text == "shift") {
      const Token from = next();
      if (from.kind != Token::Kind::Ident || from.text != "from")
        fail_expected(from, "expected 'from' after 'tail shift', found " + describe(from), {"from"});
      const Token j = next();
      std::size_t v = 0;
      if (j.kind == Token::Kind::Number) {
        auto [p, ec] = std::from_chars(j.text.data(), j.text.data() + j.text.size(), v);
        if (ec != std::errc() || p != j.text.data() + j.text.size()) v = 0;
      }
      if (v == 0) fail_expected(j, "expected a positive integer index, found " + describe(j), {"integer"});
      return {TailRule::Kind::ShiftFrom, v};
    }
    fail_expected(t, "expected 'zeros' or 'shift' after 'tail', found " + describe(t), {"zeros", "shift"});
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (at_symbol("+") || at_symbol("-")) {
      const auto kind = peek().text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
      next();
      Expr rhs = parse_term();
      lhs = Expr{kind, 0.0, 0, {std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (at_symbol("*") || at_symbol("/")) {
      const auto kind = peek().text == "*" ? Expr::Kind::Mul : Expr::Kind::Div;
      next();
      Expr rhs = parse_unary();
      lhs = Expr{kind, 0.0, 0, {std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Expr parse_unary() {
    if (at_symbol("-")) {
      next();
      return Expr{Expr::Kind::Neg, 0.0, 0, {parse_unary()}};
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token t = peek();
    if (t.kind == Token::Kind::Number) {
      next();
      return Expr{Expr::Kind::Number, t.number, 0, {}};
    }
    if (at_symbol("(")) {
      next();
      Expr inner = parse_expr();
      if (!at_symbol(")"))
        fail_expected(peek(), "expected ')' to close '(' opened at " + std::to_string(t.line) + ":" +
                                  std::to_string(t.column) + ", found " + describe(peek()),
                      {"')'", "operator"});
      next();
      return inner;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "min" || t.text == "max" || t.text == "abs" || t.text == "pow") return parse_call();
      const std::size_t idx = indexed_name(t.text, 'x');
      if (idx == 0) throw UndeclaredVariable("undeclared variable '" + t.text + "'", t.line, t.column);
      next();
      return Expr{Expr::Kind::Variable, 0.0, idx, {}};
    }
    // A binary operator followed by nothing usable.
    if (pos_ > 0) {
      const Token& prev = previous();
      if (prev.kind == Token::Kind::Symbol && std::string_view("+-*/").find(prev.text) != std::string_view::npos &&
          (t.kind == Token::Kind::Separator || t.kind == Token::Kind::End))
        fail_expected(prev, "operator '" + prev.text + "' is missing its right operand", operand_set());
    }
    fail_expected(t, "expected an operand, found " + describe(t), operand_set());
  }

  static std::set<std::string> operand_set() {
    return {"number", "variable", "function", "'('", "'-'"};
  }

  Expr parse_call() {
    const Token name = next();
    expect_symbol("(");
    std::vector<Expr> args;
    Expr::Kind kind = Expr::Kind::Min;
    double exponent = 0.0;
    if (name.text == "pow") {
      kind = Expr::Kind::Pow;
      args.push_back(parse_expr());
      expect_symbol(",");
      bool negative = false;
      if (at_symbol("-")) {
        negative = true;
        next();
      }
      const Token e = peek();
      if (e.kind != Token::Kind::Number)
        fail_expected(e, "pow exponent must be a numeric literal, found " + describe(e), {"number"});
      next();
      exponent = negative ? -e.number : e.number;
    } else {
      args.push_back(parse_expr());
      while (at_symbol(",")) {
        next();
        args.push_back(parse_expr());
      }
      if (name.text == "abs") {
        kind = Expr::Kind::Abs;
        if (args.size() != 1) fail(name, "abs takes exactly one argument");
      } else {
        kind = name.text == "min" ? Expr::Kind::Min : Expr::Kind::Max;
        if (args.size() < 2) fail(name, name.text + " takes at least two arguments");
      }
    }
    if (!at_symbol(")"))
      fail_expected(peek(), "expected ')' to close call to " + name.text + ", found " + describe(peek()),
                    {"')'", "','"});
    next();
    return Expr{kind, exponent, 0, std::move(args)};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    default: return 4;
  }
}

inline std::string render(const Expr& e) {
  auto wrap = [](const Expr& child, bool parens) {
    return parens ? "(" + render(child) + ")" : render(child);
  };
  switch (e.kind) {
    case Expr::Kind::Number: return detail::format_real(e.number);
    case Expr::Kind::Variable: return "x" + std::to_string(e.var);
    case Expr::Kind::Neg: return "-" + wrap(e.args[0], precedence(e.args[0]) < 3);
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      const int p = precedence(e);
      const char* op = e.kind == Expr::Kind::Add   ? " + "
                       : e.kind == Expr::Kind::Sub ? " - "
                       : e.kind == Expr::Kind::Mul ? "*"
                                                   : "/";
      // Operators associate to the left, so an equal-precedence right operand needs parentheses.
      return wrap(e.args[0], precedence(e.args[0]) < p) + op + wrap(e.args[1], precedence(e.args[1]) <= p);
    }
    case Expr::Kind::Abs: return "abs(" + render(e.args[0]) + ")";
    case Expr::Kind::Pow: return "pow(" + render(e.args[0]) + ", " + detail::format_real(e.number) + ")";
    case Expr::Kind::Min:
    case Expr::Kind::Max: {
      std::string out = e.kind == Expr::Kind::Min ? "min(" : "max(";
      for (std::size_t i = 0; i < e.args.size(); ++i) out += (i ? ", " : "") + render(e.args[i]);
      return out + ")";
    }
  }
  return {};
}

inline double eval(const Expr& e, const Point& x) {
  switch (e.kind) {
    case Expr::Kind::Number: return e.number;
    case Expr::Kind::Variable: return x[e.var];
    case Expr::Kind::Neg: return -eval(e.args[0], x);
    case Expr::Kind::Add: return eval(e.args[0], x) + eval(e.args[1], x);
    case Expr::Kind::Sub: return eval(e.args[0], x) - eval(e.args[1], x);
    case Expr::Kind::Mul: return eval(e.args[0], x) * eval(e.args[1], x);
    case Expr::Kind::Div: {
      const double d = eval(e.args[1], x);
      if (d == 0.0)
        throw DivisionByZero("division by zero in '" + render(e) + "' at x = " + to_text(x));
      return eval(e.args[0], x) / d;
    }
    case Expr::Kind::Abs: return std::abs(eval(e.args[0], x));
    case Expr::Kind::Pow: return std::pow(eval(e.args[0], x), e.number);
    case Expr::Kind::Min:
    case Expr::Kind::Max: {
      double acc = eval(e.args[0], x);
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        const double v = eval(e.args[i], x);
        acc = e.kind == Expr::Kind::Min ? std::min(acc, v) : std::max(acc, v);
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace dsl

inline MapSpec parse_map(std::string_view source) { return dsl::Parser(source).parse_map(); }

/// Canonical text of a spec; parse_map(render_map(s)) == s.
inline std::string render_map(const MapSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.components.size(); ++i)
    out += "f" + std::to_string(i + 1) + " = " + dsl::render(spec.components[i]) + "\n";
  if (spec.tail.kind == TailRule::Kind::Zeros)
    out += "tail zeros\n";
  else
    out += "tail shift from " + std::to_string(spec.tail.from) + "\n";
  if (spec.post == PostStep::ProjectToSimplex) out += "post project\n";
  return out;
}

namespace detail {

inline std::size_t spec_extent(const MapSpec& spec, const Point& x) {
  std::size_t extent = spec.components.size();
  if (spec.tail.kind == TailRule::Kind::ShiftFrom && !x.empty())
    extent = std::max(extent, x.support_max() + spec.tail.from - 1);
  return extent;
}

inline std::vector<double> raw_outputs(const MapSpec& spec, const Point& x) {
  const std::size_t m = spec.components.size();
  std::vector<double> raw(spec_extent(spec, x), 0.0);
  for (std::size_t i = 0; i < m; ++i) raw[i] = dsl::eval(spec.components[i], x);
  if (spec.tail.kind == TailRule::Kind::ShiftFrom) {
    const std::size_t j = spec.tail.from;
    for (std::size_t i = m + 1; i <= raw.size(); ++i)
      if (i >= j) raw[i - 1] = x[i - j + 1];
  }
  return raw;
}

}  // namespace detail

/// Evaluates every component, applies the tail rule and the post step.
/// Without projection an output outside the simplex raises RangeViolation.
inline Point evaluate_map(const MapSpec& spec, const Point& x) {
  const auto raw = detail::raw_outputs(spec, x);
  if (spec.post == PostStep::ProjectToSimplex) return project_to_simplex(raw);
  detail::check_range(raw, x);
  return detail::clamp_to_point(raw);
}

class ParsedMap final : public MapOracle {
 public:
  ParsedMap(MapSpec spec, std::string name) : spec_(std::move(spec)), name_(std::move(name)) {}

  std::vector<double> components(const Point& x, std::size_t n) const override {
    std::vector<double> out(n, 0.0);
    if (spec_.post == PostStep::ProjectToSimplex) {
      const Point p = project_to_simplex(detail::raw_outputs(spec_, x));
      for (const auto& e : p.entries())
        if (e.index <= n) out[e.index - 1] = e.value;
      return out;
    }
    const auto raw = detail::raw_outputs(spec_, x);
    for (std::size_t i = 0; i < std::min(n, raw.size()); ++i) out[i] = raw[i];
    return out;
  }
  std::size_t output_extent(const Point& x) const override { return detail::spec_extent(spec_, x); }
  std::optional<std::size_t> support_bound() const override {
    if (spec_.tail.kind == TailRule::Kind::ShiftFrom) return std::nullopt;
    return spec_.components.size();
  }
  std::string describe() const override { return name_; }
  const MapSpec& spec() const noexcept { return spec_; }

 private:
  MapSpec spec_;
  std::string name_;
};

inline MapPtr parsed_map(MapSpec spec, std::string name = "parsed") {
  return std::make_shared<ParsedMap>(std::move(spec), std::move(name));
}

}  // namespace sperner
