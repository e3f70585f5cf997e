#pragma once

// Levi-Civita connection and the first-order differential operators of
// continuum mechanics on a coordinate chart.
//
// Index conventions:
//   ChristoffelField   gamma(k, i, j) = G^k_ij, nabla_i d_j = sum_k G^k_ij d_k
//   MixedTensorField   a(i, k) = A_i^k, meaning A = sum A_i^k d_i (x) dx_k;
//                      as an operator on vectors (A v)_i = sum_k a(i, k) v_k
//
// All fields are symbolic; components are Expr over the chart's time and
// space variables. The metric is static (space variables only).

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riemedia/chart.hpp"
#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/matrix.hpp"

namespace riemedia {

struct ScalarField {
  Chart chart;
  Expr f;
};

struct VectorField {
  Chart chart;
  ExprVector c;
};

struct CovectorField {
  Chart chart;
  ExprVector c;
};

struct MixedTensorField {
  Chart chart;
  ExprMatrix a;
};

namespace detail {

inline void require_dim(const Chart& chart, std::size_t n, const char* what) {
  if (chart.dim() != n) {
    throw GeometryError(std::string(what) + " has " + std::to_string(n) + " components, chart dimension is " +
                        std::to_string(chart.dim()));
  }
}

inline Expr time_derivative(const Chart& chart, const Expr& e) {
  return chart.has_time() ? differentiate(e, *chart.time_var()) : Expr(0.0);
}

}  // namespace detail

inline VectorField make_vector(const Chart& chart, ExprVector c) {
  detail::require_dim(chart, c.size(), "vector field");
  return {chart, std::move(c)};
}

inline CovectorField make_covector(const Chart& chart, ExprVector c) {
  detail::require_dim(chart, c.size(), "covector field");
  return {chart, std::move(c)};
}

inline MixedTensorField make_tensor(const Chart& chart, ExprMatrix a) {
  detail::require_dim(chart, a.dim(), "tensor field");
  return {chart, std::move(a)};
}

/// Riemannian metric g_ij(x) on a chart, with its symbolic inverse.
class MetricField {
 public:
  MetricField() = default;

  MetricField(Chart chart, ExprMatrix g) : chart_(std::move(chart)), g_(simplify(g)) {
    detail::require_dim(chart_, g_.dim(), "metric");
    const auto& space = chart_.space_vars();
    for (std::size_t i = 0; i < g_.dim(); ++i) {
      for (std::size_t j = 0; j < g_.dim(); ++j) {
        for (const auto& v : variables(g_(i, j))) {
          if (std::find(space.begin(), space.end(), v) == space.end()) {
            throw GeometryError("metric entry g_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                " depends on '" + v + "', which is not a spatial coordinate");
          }
        }
        if (j > i && to_string(g_(i, j)) != to_string(g_(j, i))) {
          throw GeometryError("metric is not symmetric in entries (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ")");
        }
      }
    }
    if (g_.dim() > 4) throw GeometryError("metric dimension > 4 is not supported by the symbolic inverse");
    inverse_ = simplify(symbolic_inverse(g_));
  }

  /// Builds a symmetric metric from the upper triangle (i <= j) of `g`.
  static MetricField from_upper(Chart chart, const ExprMatrix& g) {
    ExprMatrix full(g.dim());
    for (std::size_t i = 0; i < g.dim(); ++i)
      for (std::size_t j = i; j < g.dim(); ++j) full(i, j) = full(j, i) = g(i, j);
    return MetricField(std::move(chart), full);
  }

  static MetricField euclidean(Chart chart) {
    std::size_t n = chart.dim();
    return MetricField(std::move(chart), ExprMatrix::identity(n));
  }

  const Chart& chart() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return g_.dim(); }
  const ExprMatrix& matrix() const noexcept { return g_; }
  const ExprMatrix& inverse() const noexcept { return inverse_; }
  const Expr& operator()(std::size_t i, std::size_t j) const { return g_(i, j); }

 private:
  Chart chart_;
  ExprMatrix g_;
  ExprMatrix inverse_;
};

/// Throws GeometryError unless g is symmetric positive-definite at `point`.
inline Eigen::MatrixXd check_positive_definite(const MetricField& g, const Bindings& point) {
  Eigen::MatrixXd m = evaluate(g.matrix(), point);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw GeometryError("metric is not positive-definite at a probe point");
  }
  return m;
}

inline ExprMatrix inverse_metric(const MetricField& g) { return g.inverse(); }

class ChristoffelField {
 public:
  ChristoffelField() = default;
  ChristoffelField(Chart chart, std::vector<ExprMatrix> gamma) : chart_(std::move(chart)), gamma_(std::move(gamma)) {}

  const Chart& chart() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return gamma_.size(); }
  /// G^k_ij
  const Expr& operator()(std::size_t k, std::size_t i, std::size_t j) const { return gamma_[k](i, j); }

 private:
  Chart chart_;
  std::vector<ExprMatrix> gamma_;
};

/// G^k_ij = 1/2 sum_l g^kl (d_i g_jl + d_j g_il - d_l g_ij)
inline ChristoffelField christoffel(const MetricField& g) {
  const std::size_t n = g.dim();
  const auto& x = g.chart().space_vars();
  // dg[l](i, j) = d_l g_ij
  std::vector<ExprMatrix> dg;
  for (std::size_t l = 0; l < n; ++l) {
    dg.push_back(g.matrix().map([&](const Expr& e) { return simplify(differentiate(e, x[l])); }));
  }
  std::vector<ExprMatrix> gamma(n, ExprMatrix(n, Expr(0.0)));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        Expr s(0.0);
        for (std::size_t l = 0; l < n; ++l) {
          const Expr& ginv = g.inverse()(k, l);
          if (ginv.is_constant(0.0)) continue;
          s += ginv * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        }
        gamma[k](i, j) = gamma[k](j, i) = simplify(Expr(0.5) * s);
      }
    }
  }
  return {g.chart(), std::move(gamma)};
}

/// sqrt(det g), the density of the Riemannian volume form.
inline ScalarField volume_density(const MetricField& g) {
  return {g.chart(), simplify(sqrt(determinant(g.matrix())))};
}

/// (d_nabla X)[i][j] = d_j X_i + sum_k G^i_kj X_k
inline MixedTensorField covariant_differential(const VectorField& X, const ChristoffelField& gamma) {
  require_same_chart(X.chart, gamma.chart());
  const std::size_t n = X.c.size();
  const auto& x = X.chart.space_vars();
  ExprMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr s = differentiate(X.c[i], x[j]);
      for (std::size_t k = 0; k < n; ++k) s += gamma(i, k, j) * X.c[k];
      a(i, j) = s;
    }
  return {X.chart, std::move(a)};
}

/// div X = sum_i d_i X_i + sum_{i,k} G^i_ik X_k
inline ScalarField divergence(const VectorField& X, const ChristoffelField& gamma) {
  require_same_chart(X.chart, gamma.chart());
  const std::size_t n = X.c.size();
  const auto& x = X.chart.space_vars();
  Expr s(0.0);
  for (std::size_t i = 0; i < n; ++i) s += differentiate(X.c[i], x[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) s += gamma(i, i, k) * X.c[k];
  return {X.chart, s};
}

/// Covariant divergence of A = sum A_i^k d_i (x) dx_k, contracting the
/// derivative slot with the vector slot:
///   (div A)_k = sum_i d_i A_i^k + sum_{i,j} (A_j^k G^i_ij - A_i^j G^j_ik)
/// This is the literal coordinate display; it satisfies
/// div(X (x) w) = (div X) w + nabla_X w, which the tests pin.
inline CovectorField divergence(const MixedTensorField& A, const ChristoffelField& gamma) {
  require_same_chart(A.chart, gamma.chart());
  const std::size_t n = A.a.dim();
  const auto& x = A.chart.space_vars();
  ExprVector out(n, Expr(0.0));
  for (std::size_t k = 0; k < n; ++k) {
    Expr s(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      s += differentiate(A.a(i, k), x[i]);
      for (std::size_t j = 0; j < n; ++j) {
        s += A.a(j, k) * gamma(i, i, j);
        s -= A.a(i, j) * gamma(j, i, k);
      }
    }
    out[k] = s;
  }
  return {A.chart, std::move(out)};
}

/// (nabla_X w)_k = sum_i X_i d_i w_k - sum_{i,j} G^j_ik X_i w_j
inline CovectorField covariant_derivative(const CovectorField& w, const VectorField& X, const ChristoffelField& gamma) {
  require_same_chart(w.chart, X.chart);
  require_same_chart(w.chart, gamma.chart());
  const std::size_t n = w.c.size();
  const auto& x = w.chart.space_vars();
  ExprVector out(n, Expr(0.0));
  for (std::size_t k = 0; k < n; ++k) {
    Expr s(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      s += X.c[i] * differentiate(w.c[k], x[i]);
      for (std::size_t j = 0; j < n; ++j) s -= gamma(j, i, k) * X.c[i] * w.c[j];
    }
    out[k] = s;
  }
  return {w.chart, std::move(out)};
}

inline MixedTensorField tensor_product(const VectorField& X, const CovectorField& w) {
  require_same_chart(X.chart, w.chart);
  const std::size_t n = X.c.size();
  ExprMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) a(i, k) = X.c[i] * w.c[k];
  return {X.chart, std::move(a)};
}

/// Operator applied to a vector field: (A X)_i = sum_k a(i, k) X_k.
inline VectorField apply(const MixedTensorField& A, const VectorField& X) {
  require_same_chart(A.chart, X.chart);
  return {X.chart, mat_vec(A.a, X.c)};
}

/// Metric adjoint A* = g^{-1} A^T g, so that g(A* u, v) = g(u, A v).
inline MixedTensorField g_adjoint(const MixedTensorField& A, const MetricField& g) {
  require_same_chart(A.chart, g.chart());
  return {A.chart, g.inverse() * transpose(A.a) * g.matrix()};
}

/// Self-adjoint (rate-of-strain) and skew-adjoint (spin) parts.
inline std::pair<MixedTensorField, MixedTensorField> strain_spin_split(const MixedTensorField& A,
                                                                       const MetricField& g) {
  MixedTensorField adj = g_adjoint(A, g);
  const std::size_t n = A.a.dim();
  ExprMatrix sym(n);
  ExprMatrix skew(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      sym(i, j) = Expr(0.5) * (A.a(i, j) + adj.a(i, j));
      skew(i, j) = Expr(0.5) * (A.a(i, j) - adj.a(i, j));
    }
  return {{A.chart, std::move(sym)}, {A.chart, std::move(skew)}};
}

/// Raises the index with g^{-1}.
inline VectorField sharp(const CovectorField& w, const MetricField& g) {
  require_same_chart(w.chart, g.chart());
  return {w.chart, mat_vec(g.inverse(), w.c)};
}

/// Lowers the index with g.
inline CovectorField flat(const VectorField& X, const MetricField& g) {
  require_same_chart(X.chart, g.chart());
  return {X.chart, mat_vec(g.matrix(), X.c)};
}

/// g(X, Y)
inline ScalarField inner(const VectorField& X, const VectorField& Y, const MetricField& g) {
  require_same_chart(X.chart, Y.chart);
  ExprVector gy = mat_vec(g.matrix(), Y.c);
  Expr s(0.0);
  for (std::size_t i = 0; i < X.c.size(); ++i) s += X.c[i] * gy[i];
  return {X.chart, s};
}

/// w(X)
inline ScalarField pairing(const CovectorField& w, const VectorField& X) {
  require_same_chart(w.chart, X.chart);
  Expr s(0.0);
  for (std::size_t i = 0; i < X.c.size(); ++i) s += w.c[i] * X.c[i];
  return {X.chart, s};
}

/// Coordinate differential df.
inline CovectorField differential(const ScalarField& f) {
  ExprVector out;
  for (const auto& x : f.chart.space_vars()) out.push_back(differentiate(f.f, x));
  return {f.chart, std::move(out)};
}

/// Df/Dt = df/dt + sum_i X_i d_i f
inline ScalarField material_derivative(const ScalarField& f, const VectorField& X) {
  require_same_chart(f.chart, X.chart);
  if (!f.chart.has_time()) throw GeometryError("material derivative needs a chart with a time variable");
  Expr s = differentiate(f.f, *f.chart.time_var());
  const auto& x = f.chart.space_vars();
  for (std::size_t i = 0; i < x.size(); ++i) s += X.c[i] * differentiate(f.f, x[i]);
  return {f.chart, s};
}

/// a_l = d_t X_l + sum_i X_i d_i X_l + sum_{i,j} G^l_ij X_i X_j.
/// Without a time variable the field is treated as steady.
inline VectorField acceleration(const VectorField& X, const ChristoffelField& gamma) {
  require_same_chart(X.chart, gamma.chart());
  const std::size_t n = X.c.size();
  const auto& x = X.chart.space_vars();
  ExprVector out(n);
  for (std::size_t l = 0; l < n; ++l) {
    Expr s = detail::time_derivative(X.chart, X.c[l]);
    for (std::size_t i = 0; i < n; ++i) s += X.c[i] * differentiate(X.c[l], x[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += gamma(l, i, j) * X.c[i] * X.c[j];
    out[l] = s;
  }
  return {X.chart, std::move(out)};
}

inline double evaluate(const ScalarField& f, const Bindings& b) { return eval(f.f, b); }
inline Eigen::VectorXd evaluate(const VectorField& X, const Bindings& b) { return evaluate(X.c, b); }
inline Eigen::VectorXd evaluate(const CovectorField& w, const Bindings& b) { return evaluate(w.c, b); }
inline Eigen::MatrixXd evaluate(const MixedTensorField& A, const Bindings& b) { return evaluate(A.a, b); }

}  // namespace riemedia
