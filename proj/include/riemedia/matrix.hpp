#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"

namespace riemedia {

/// Dense row-major n x n matrix; used with T = Expr for symbolic fields and
/// T = double for small numeric work that does not need Eigen.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, const T& fill = T{}) : n_(n), data_(n * n, fill) {}

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  template <class F>
  auto map(F&& f) const {
    using R = decltype(f(data_.front()));
    SquareMatrix<R> out(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using ExprMatrix = SquareMatrix<Expr>;
using ExprVector = std::vector<Expr>;

template <class T>
SquareMatrix<T> operator*(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  const std::size_t n = a.dim();
  SquareMatrix<T> c(n, T(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T s(0.0);
      for (std::size_t k = 0; k < n; ++k) s = s + a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

template <class T>
SquareMatrix<T> operator+(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  SquareMatrix<T> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

template <class T>
SquareMatrix<T> operator-(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  SquareMatrix<T> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

template <class T>
SquareMatrix<T> scale(const T& s, const SquareMatrix<T>& a) {
  return a.map([&](const T& x) { return T(s * x); });
}

template <class T>
SquareMatrix<T> transpose(const SquareMatrix<T>& a) {
  SquareMatrix<T> t(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) t(i, j) = a(j, i);
  return t;
}

template <class T>
T trace(const SquareMatrix<T>& a) {
  T s(0.0);
  for (std::size_t i = 0; i < a.dim(); ++i) s = s + a(i, i);
  return s;
}

template <class T>
std::vector<T> mat_vec(const SquareMatrix<T>& a, const std::vector<T>& v) {
  std::vector<T> out(a.dim(), T(0.0));
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t k = 0; k < a.dim(); ++k) out[i] = out[i] + a(i, k) * v[k];
  return out;
}

inline ExprMatrix simplify(const ExprMatrix& m) {
  return m.map([](const Expr& e) { return simplify(e); });
}

inline bool is_diagonal(const ExprMatrix& m) {
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      if (i != j && !m(i, j).is_constant(0.0)) return false;
  return true;
}

/// Laplace expansion along the first row; intended for n <= 4.
inline Expr determinant(const ExprMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Expr det(0.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (m(0, c).is_constant(0.0)) continue;
    ExprMatrix minor(n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, jj = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, jj++) = m(i, j);
      }
    Expr term = m(0, c) * determinant(minor);
    det = (c % 2 == 0) ? det + term : det - term;
  }
  return det;
}

/// Symbolic inverse by adjugate over determinant; diagonal matrices are
/// inverted entrywise. Limited to n <= 4.
inline ExprMatrix symbolic_inverse(const ExprMatrix& m) {
  const std::size_t n = m.dim();
  if (n > 4) throw GeometryError("symbolic inverse supports dimension <= 4, got " + std::to_string(n));
  ExprMatrix inv(n, Expr(0.0));
  if (is_diagonal(m)) {
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = Expr(1.0) / m(i, i);
    return inv;
  }
  if (n == 1) {
    inv(0, 0) = Expr(1.0) / m(0, 0);
    return inv;
  }
  Expr det = determinant(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      ExprMatrix minor(n - 1);
      for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      Expr cof = determinant(minor);
      inv(i, j) = ((i + j) % 2 == 0 ? cof : -cof) / det;
    }
  return inv;
}

inline Eigen::MatrixXd evaluate(const ExprMatrix& m, const Bindings& b) {
  Eigen::MatrixXd out(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = eval(m(i, j), b);
  return out;
}

inline Eigen::VectorXd evaluate(const ExprVector& v, const Bindings& b) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = eval(v[i], b);
  return out;
}

inline ExprMatrix constant_matrix(const Eigen::MatrixXd& m) {
  ExprMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Expr(m(i, j));
  return out;
}

}  // namespace riemedia
