#pragma once

// Recursive-descent parser for the expression DSL.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus: -x^2 = -(x^2),
// 2^-1 = 2^(-1), 2^3^2 = 2^9. Numbers accept an optional fraction and exponent
// (1.5e-3). Identifiers are [A-Za-z_][A-Za-z0-9_]*. The tree is built verbatim
// (no folding) so that it mirrors the source.

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"

namespace riemedia {

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    skip_space();
    if (at_end()) fail("empty expression");
    Expr e = parse_expr();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + peek() + "'");
    return e;
  }

 private:
  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      skip_space();
      if (accept('+')) {
        e = Expr::raw_binary(Op::add, e, parse_term());
      } else if (accept('-')) {
        e = Expr::raw_binary(Op::sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      skip_space();
      if (accept('*')) {
        e = Expr::raw_binary(Op::mul, e, parse_factor());
      } else if (accept('/')) {
        e = Expr::raw_binary(Op::div, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  Expr parse_factor() {
    skip_space();
    if (accept('-')) return Expr::raw_unary(Op::neg, parse_factor());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    skip_space();
    if (accept('^')) return Expr::raw_binary(Op::pow, base, parse_factor());
    return base;
  }

  Expr parse_atom() {
    skip_space();
    if (at_end()) fail("unexpected end of input");
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      Mark start = mark();
      std::string name;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
        name += peek();
        advance();
      }
      skip_space();
      if (!at_end() && peek() == '(') {
        auto op = function_op(name);
        if (!op) fail_at(start, "unknown function '" + name + "'");
        advance();
        Expr arg = parse_expr();
        skip_space();
        if (!accept(')')) fail("expected ')'");
        return Expr::raw_unary(*op, arg);
      }
      return Expr::variable(std::move(name));
    }
    if (accept('(')) {
      Expr e = parse_expr();
      skip_space();
      if (!accept(')')) fail(at_end() ? std::string("expected ')' before end of input") : "expected ')'");
      return e;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    Mark start = mark();
    std::size_t begin = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        advance();
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (!at_end() && peek() == '.') {
      advance();
      n += digits();
    }
    if (n == 0) fail_at(start, "malformed number");
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      std::size_t save_pos = pos_;
      Mark save = mark();
      advance();
      if (!at_end() && (peek() == '+' || peek() == '-')) advance();
      if (digits() == 0) {
        pos_ = save_pos;
        line_ = save.line;
        column_ = save.column;
      }
    }
    std::string text(src_.substr(begin, pos_ - begin));
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) fail_at(start, "malformed number '" + text + "'");
    return Expr::constant(v);
  }

  struct Mark {
    std::size_t line;
    std::size_t column;
  };

  Mark mark() const { return {line_, column_}; }
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool accept(char c) {
    if (!at_end() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }
  [[noreturn]] static void fail_at(Mark m, const std::string& what) { throw ParseError(what, m.line, m.column); }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace detail

inline Expr parse(std::string_view source) { return detail::Parser(source).parse_all(); }

}  // namespace riemedia
