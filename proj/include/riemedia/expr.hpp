#pragma once

// Immutable expression trees over named real variables.
//
// Two families of constructors exist. Expr::raw_unary / Expr::raw_binary build
// nodes verbatim (the parser uses them, so a parsed tree mirrors the source).
// The arithmetic operators and the named functions below fold constants and
// drop neutral elements as they build; simplify() is a bottom-up rebuild with
// those folding constructors.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riemedia/error.hpp"

namespace riemedia {

enum class Op : std::uint8_t {
  constant,
  variable,
  neg,
  sin,
  cos,
  tan,
  exp,
  log,
  sqrt,
  abs,
  add,
  sub,
  mul,
  div,
  pow,
};

using Bindings = std::map<std::string, double, std::less<>>;

inline constexpr bool is_unary(Op op) { return op >= Op::neg && op <= Op::abs; }
inline constexpr bool is_binary(Op op) { return op >= Op::add; }

inline std::string_view op_name(Op op) {
  switch (op) {
    case Op::constant: return "constant";
    case Op::variable: return "variable";
    case Op::neg: return "-";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::tan: return "tan";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
  }
  return "?";
}

/// Function names accepted by the DSL, mapped to their unary op.
inline std::optional<Op> function_op(std::string_view name) {
  static constexpr std::pair<std::string_view, Op> table[] = {
      {"sin", Op::sin}, {"cos", Op::cos},   {"tan", Op::tan},  {"exp", Op::exp},
      {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs},
  };
  for (const auto& [n, op] : table) {
    if (n == name) return op;
  }
  return std::nullopt;
}

class Expr {
 public:
  Expr() : Expr(0.0) {}
  Expr(double c) : node_(std::make_shared<const Node>(Node{Op::constant, c, {}, nullptr, nullptr})) {}  // NOLINT
  Expr(int c) : Expr(static_cast<double>(c)) {}                                                          // NOLINT

  static Expr constant(double c) { return Expr(c); }
  static Expr variable(std::string name) {
    return Expr(std::make_shared<const Node>(Node{Op::variable, 0.0, std::move(name), nullptr, nullptr}));
  }
  static Expr raw_unary(Op op, const Expr& a) {
    return Expr(std::make_shared<const Node>(Node{op, 0.0, {}, a.node_, nullptr}));
  }
  static Expr raw_binary(Op op, const Expr& a, const Expr& b) {
    return Expr(std::make_shared<const Node>(Node{op, 0.0, {}, a.node_, b.node_}));
  }

  Op op() const noexcept { return node_->op; }
  double value() const noexcept { return node_->value; }
  const std::string& name() const noexcept { return node_->name; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_constant() const noexcept { return op() == Op::constant; }
  bool is_constant(double c) const noexcept { return is_constant() && value() == c; }
  bool is_variable() const noexcept { return op() == Op::variable; }

  /// Node identity, not structural equality.
  bool same_node(const Expr& other) const noexcept { return node_ == other.node_; }
  const void* id() const noexcept { return node_.get(); }

 private:
  struct Node {
    Op op;
    double value;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

inline Expr var(std::string name) { return Expr::variable(std::move(name)); }

inline std::string to_string(const Expr& e);

namespace detail {

inline bool is_integral(double b) { return std::isfinite(b) && std::floor(b) == b; }

inline double integer_power(double a, double b) {
  // Repeated squaring keeps negative bases legal and the result deterministic.
  auto exponent = static_cast<std::uint64_t>(std::fabs(b));
  double result = 1.0;
  double base = a;
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return b < 0 ? 1.0 / result : result;
}

/// Returns nullopt on a domain fault.
inline std::optional<double> apply_unary(Op op, double a) {
  double r = 0.0;
  switch (op) {
    case Op::neg: r = -a; break;
    case Op::sin: r = std::sin(a); break;
    case Op::cos: r = std::cos(a); break;
    case Op::tan: r = std::tan(a); break;
    case Op::exp: r = std::exp(a); break;
    case Op::log:
      if (!(a > 0.0)) return std::nullopt;
      r = std::log(a);
      break;
    case Op::sqrt:
      if (a < 0.0) return std::nullopt;
      r = std::sqrt(a);
      break;
    case Op::abs: r = std::fabs(a); break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

inline std::optional<double> apply_binary(Op op, double a, double b) {
  double r = 0.0;
  switch (op) {
    case Op::add: r = a + b; break;
    case Op::sub: r = a - b; break;
    case Op::mul: r = a * b; break;
    case Op::div:
      if (b == 0.0) return std::nullopt;
      r = a / b;
      break;
    case Op::pow:
      if (a == 0.0 && b < 0.0) return std::nullopt;
      if (is_integral(b) && std::fabs(b) <= 1024.0) {
        r = integer_power(a, b);
      } else if (a == 0.0) {
        r = 0.0;
      } else {
        if (a < 0.0) return std::nullopt;
        r = std::exp(b * std::log(a));
      }
      break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

[[noreturn]] inline void domain_fault(const Expr& subterm) {
  throw EvalError(EvalError::Kind::domain_fault, "domain fault in '" + to_string(subterm) + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Folding constructors

inline Expr fold_binary(Op op, const Expr& a, const Expr& b);

inline Expr fold_unary(Op op, const Expr& a) {
  if (a.is_constant()) {
    if (auto r = detail::apply_unary(op, a.value())) return Expr(*r);
  }
  if (op == Op::neg && a.op() == Op::neg) return a.lhs();
  if (op == Op::neg && a.op() == Op::mul && a.lhs().is_constant()) {
    return fold_binary(Op::mul, Expr(-a.lhs().value()), a.rhs());
  }
  return Expr::raw_unary(op, a);
}

inline Expr fold_binary(Op op, const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto r = detail::apply_binary(op, a.value(), b.value())) return Expr(*r);
  }
  switch (op) {
    case Op::add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case Op::sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return fold_unary(Op::neg, b);
      break;
    case Op::mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(-1.0)) return fold_unary(Op::neg, b);
      if (b.is_constant(-1.0)) return fold_unary(Op::neg, a);
      if (a.is_constant()) {
        if (b.op() == Op::neg) return fold_binary(Op::mul, Expr(-a.value()), b.lhs());
        if (b.op() == Op::mul && b.lhs().is_constant()) {
          return fold_binary(Op::mul, Expr(a.value() * b.lhs().value()), b.rhs());
        }
      }
      if (a.op() == Op::mul && a.lhs().is_constant() && !b.is_constant()) {
        return fold_binary(Op::mul, a.lhs(), fold_binary(Op::mul, a.rhs(), b));
      }
      break;
    case Op::div:
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(0.0) && !b.is_constant()) return Expr(0.0);
      break;
    case Op::pow:
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(0.0)) return Expr(1.0);
      if (a.is_constant(1.0)) return Expr(1.0);
      break;
    default: break;
  }
  return Expr::raw_binary(op, a, b);
}

inline Expr operator+(const Expr& a, const Expr& b) { return fold_binary(Op::add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return fold_binary(Op::sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return fold_binary(Op::mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return fold_binary(Op::div, a, b); }
inline Expr operator-(const Expr& a) { return fold_unary(Op::neg, a); }
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

inline Expr pow(const Expr& a, const Expr& b) { return fold_binary(Op::pow, a, b); }
inline Expr sin(const Expr& a) { return fold_unary(Op::sin, a); }
inline Expr cos(const Expr& a) { return fold_unary(Op::cos, a); }
inline Expr tan(const Expr& a) { return fold_unary(Op::tan, a); }
inline Expr exp(const Expr& a) { return fold_unary(Op::exp, a); }
inline Expr log(const Expr& a) { return fold_unary(Op::log, a); }
inline Expr sqrt(const Expr& a) { return fold_unary(Op::sqrt, a); }
inline Expr abs(const Expr& a) { return fold_unary(Op::abs, a); }

// ---------------------------------------------------------------------------
// Traversals

/// Rebuilds `e` bottom-up, replacing each node by `visit(node, new_lhs, new_rhs)`.
/// Shared subtrees are rebuilt once.
template <class Visit>
Expr rebuild(const Expr& e, Visit&& visit) {
  std::map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    Expr out;
    if (is_unary(x.op())) {
      out = visit(x, go(x.lhs()), Expr());
    } else if (is_binary(x.op())) {
      Expr l = go(x.lhs());
      out = visit(x, l, go(x.rhs()));
    } else {
      out = visit(x, Expr(), Expr());
    }
    memo.emplace(x.id(), out);
    return out;
  };
  return go(e);
}

/// Constant folding, neutral-element removal (0*e, 1*e, e+0, e^1, ...) and
/// collection of constant factors into a leading coefficient.
inline Expr simplify(const Expr& e) {
  return rebuild(e, [](const Expr& node, const Expr& l, const Expr& r) -> Expr {
    if (is_unary(node.op())) return fold_unary(node.op(), l);
    if (is_binary(node.op())) return fold_binary(node.op(), l, r);
    return node;
  });
}

/// Replaces variables by expressions; unmapped variables are kept.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& repl) {
  return rebuild(e, [&](const Expr& node, const Expr& l, const Expr& r) -> Expr {
    if (node.is_variable()) {
      if (auto it = repl.find(node.name()); it != repl.end()) return it->second;
      return node;
    }
    if (is_unary(node.op())) return fold_unary(node.op(), l);
    if (is_binary(node.op())) return fold_binary(node.op(), l, r);
    return node;
  });
}

inline std::set<std::string> variables(const Expr& e) {
  std::set<std::string> out;
  std::set<const void*> seen;
  std::function<void(const Expr&)> go = [&](const Expr& x) {
    if (!seen.insert(x.id()).second) return;
    if (x.is_variable()) out.insert(x.name());
    if (is_unary(x.op()) || is_binary(x.op())) go(x.lhs());
    if (is_binary(x.op())) go(x.rhs());
  };
  go(e);
  return out;
}

inline bool depends_on(const Expr& e, std::string_view name) {
  return variables(e).count(std::string(name)) != 0;
}

/// Number of nodes counting shared subtrees once.
inline std::size_t node_count(const Expr& e) {
  std::set<const void*> seen;
  std::function<void(const Expr&)> go = [&](const Expr& x) {
    if (!seen.insert(x.id()).second) return;
    if (is_unary(x.op()) || is_binary(x.op())) go(x.lhs());
    if (is_binary(x.op())) go(x.rhs());
  };
  go(e);
  return seen.size();
}

// ---------------------------------------------------------------------------
// Evaluation

inline double eval(const Expr& e, const Bindings& bindings) {
  std::map<const void*, double> memo;
  std::function<double(const Expr&)> go = [&](const Expr& x) -> double {
    switch (x.op()) {
      case Op::constant: return x.value();
      case Op::variable: {
        auto it = bindings.find(x.name());
        if (it == bindings.end()) {
          throw EvalError(EvalError::Kind::unbound_variable, "unbound variable '" + x.name() + "'");
        }
        return it->second;
      }
      default: break;
    }
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    std::optional<double> r;
    if (is_unary(x.op())) {
      r = detail::apply_unary(x.op(), go(x.lhs()));
    } else {
      double a = go(x.lhs());
      r = detail::apply_binary(x.op(), a, go(x.rhs()));
    }
    if (!r) detail::domain_fault(x);
    memo.emplace(x.id(), *r);
    return *r;
  };
  return go(e);
}

/// Expression flattened into topologically ordered instructions (one per
/// distinct node) with variables resolved to input slots. Evaluation gives
/// bit-identical results to eval() on the same inputs.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, std::span<const std::string> slots) {
    std::map<const void*, std::size_t> index;
    std::function<std::size_t(const Expr&)> emit = [&](const Expr& x) -> std::size_t {
      if (auto it = index.find(x.id()); it != index.end()) return it->second;
      Instr in{x.op(), x.value(), 0, 0, x};
      if (x.is_variable()) {
        auto it = std::find(slots.begin(), slots.end(), x.name());
        if (it == slots.end()) {
          throw EvalError(EvalError::Kind::unbound_variable, "unbound variable '" + x.name() + "'");
        }
        in.a = static_cast<std::size_t>(it - slots.begin());
      } else if (is_unary(x.op())) {
        in.a = emit(x.lhs());
      } else if (is_binary(x.op())) {
        in.a = emit(x.lhs());
        in.b = emit(x.rhs());
      }
      code_.push_back(std::move(in));
      index.emplace(x.id(), code_.size() - 1);
      return code_.size() - 1;
    };
    if (node_count(e) > 0) emit(e);
  }

  double operator()(std::span<const double> values) const {
    thread_local std::vector<double> reg;
    reg.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      if (in.op == Op::constant) {
        reg[k] = in.value;
      } else if (in.op == Op::variable) {
        reg[k] = values[in.a];
      } else {
        auto r = is_unary(in.op) ? detail::apply_unary(in.op, reg[in.a])
                                 : detail::apply_binary(in.op, reg[in.a], reg[in.b]);
        if (!r) detail::domain_fault(in.source);
        reg[k] = *r;
      }
    }
    return reg.back();
  }

  std::size_t size() const noexcept { return code_.size(); }

 private:
  struct Instr {
    Op op;
    double value;
    std::size_t a;
    std::size_t b;
    Expr source;
  };
  std::vector<Instr> code_;
};

// ---------------------------------------------------------------------------
// Symbolic differentiation

inline Expr differentiate(const Expr& e, std::string_view v) {
  std::map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> d = [&](const Expr& x) -> Expr {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    Expr out;
    switch (x.op()) {
      case Op::constant: out = Expr(0.0); break;
      case Op::variable: out = Expr(x.name() == v ? 1.0 : 0.0); break;
      case Op::neg: out = -d(x.lhs()); break;
      case Op::sin: out = cos(x.lhs()) * d(x.lhs()); break;
      case Op::cos: out = -(sin(x.lhs()) * d(x.lhs())); break;
      case Op::tan: out = d(x.lhs()) / pow(cos(x.lhs()), Expr(2.0)); break;
      case Op::exp: out = x * d(x.lhs()); break;
      case Op::log: out = d(x.lhs()) / x.lhs(); break;
      case Op::sqrt: out = d(x.lhs()) / (Expr(2.0) * x); break;
      case Op::abs: out = x.lhs() / x * d(x.lhs()); break;
      case Op::add: out = d(x.lhs()) + d(x.rhs()); break;
      case Op::sub: out = d(x.lhs()) - d(x.rhs()); break;
      case Op::mul: out = d(x.lhs()) * x.rhs() + x.lhs() * d(x.rhs()); break;
      case Op::div: {
        const Expr& a = x.lhs();
        const Expr& b = x.rhs();
        Expr db = d(b);
        if (db.is_constant(0.0)) {
          out = d(a) / b;
        } else {
          out = (d(a) * b - a * db) / pow(b, Expr(2.0));
        }
        break;
      }
      case Op::pow: {
        const Expr& a = x.lhs();
        const Expr& b = x.rhs();
        Expr db = d(b);
        if (db.is_constant(0.0)) {
          out = b * pow(a, b - Expr(1.0)) * d(a);
        } else {
          out = x * (db * log(a) + b * d(a) / a);
        }
        break;
      }
    }
    memo.emplace(x.id(), out);
    return out;
  };
  return d(e);
}

// ---------------------------------------------------------------------------
// Printing. The output is valid DSL source; parse(to_string(e)) evaluates
// identically to e.

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::constant: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default: return 5;
  }
}

inline std::string format_number(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

inline std::string print(const Expr& e);

inline std::string wrap_if(bool cond, const std::string& s) { return cond ? "(" + s + ")" : s; }

inline std::string print(const Expr& e) {
  switch (e.op()) {
    case Op::constant: {
      if (std::signbit(e.value())) return "-" + format_number(-e.value());
      return format_number(e.value());
    }
    case Op::variable: return e.name();
    case Op::neg: return "-" + wrap_if(precedence(e.lhs()) < 3, print(e.lhs()));
    case Op::add:
    case Op::sub: {
      std::string l = print(e.lhs());
      std::string r = wrap_if(precedence(e.rhs()) <= 1 || precedence(e.rhs()) == 3, print(e.rhs()));
      return l + (e.op() == Op::add ? " + " : " - ") + r;
    }
    case Op::mul:
    case Op::div: {
      std::string l = wrap_if(precedence(e.lhs()) < 2, print(e.lhs()));
      std::string r = wrap_if(precedence(e.rhs()) <= 3, print(e.rhs()));
      return l + (e.op() == Op::mul ? "*" : "/") + r;
    }
    case Op::pow: {
      std::string l = wrap_if(precedence(e.lhs()) < 5, print(e.lhs()));
      std::string r = wrap_if(precedence(e.rhs()) < 3, print(e.rhs()));
      return l + "^" + r;
    }
    default:
      return std::string(op_name(e.op())) + "(" + print(e.lhs()) + ")";
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print(e); }

}  // namespace riemedia
