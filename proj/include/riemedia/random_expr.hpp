#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "riemedia/expr.hpp"
#include "riemedia/rng.hpp"

namespace riemedia {

/// Random expression trees for property checks. Denominators and the
/// arguments of log and sqrt are kept away from zero (c + u^2 with c >= 0.5)
/// and exp only sees bounded arguments, so the trees are smooth and
/// well-conditioned on bounded boxes.
class RandomExprGenerator {
 public:
  RandomExprGenerator(std::vector<std::string> vars, std::uint64_t seed) : vars_(std::move(vars)), rng_(seed) {}

  Expr operator()(int depth = 4) { return node(depth); }

 private:
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_.next() % n); }

  Expr leaf() {
    if (vars_.empty() || pick(3) == 0) {
      double c = std::round(rng_.uniform(-3.0, 3.0) * 4.0) / 4.0;
      return Expr::constant(c == 0.0 ? 0.5 : c);
    }
    return Expr::variable(vars_[pick(vars_.size())]);
  }

  Expr positive(int depth) {
    Expr u = node(depth);
    double c = 0.5 + std::round(rng_.uniform(0.0, 2.0) * 4.0) / 4.0;
    return Expr::raw_binary(Op::add, Expr::constant(c), Expr::raw_binary(Op::mul, u, u));
  }

  Expr node(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(11)) {
      case 0: return Expr::raw_unary(Op::neg, node(depth - 1));
      case 1: return Expr::raw_unary(Op::sin, node(depth - 1));
      case 2: return Expr::raw_unary(Op::cos, node(depth - 1));
      case 3: return Expr::raw_unary(Op::exp, Expr::raw_unary(Op::sin, node(depth - 1)));
      case 4: return Expr::raw_unary(Op::log, positive(depth - 1));
      case 5: return Expr::raw_unary(Op::sqrt, positive(depth - 1));
      case 6: return Expr::raw_binary(Op::add, node(depth - 1), node(depth - 1));
      case 7: return Expr::raw_binary(Op::sub, node(depth - 1), node(depth - 1));
      case 8: return Expr::raw_binary(Op::mul, node(depth - 1), node(depth - 1));
      case 9: return Expr::raw_binary(Op::div, node(depth - 1), positive(depth - 2));
      default: {
        double k = static_cast<double>(2 + pick(2));
        return Expr::raw_binary(Op::pow, node(depth - 1), Expr::constant(k));
      }
    }
  }

  std::vector<std::string> vars_;
  SplitMix64 rng_;
};

}  // namespace riemedia
