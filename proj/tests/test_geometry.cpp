#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "riemedia/geometry.hpp"
#include "riemedia/parser.hpp"
#include "riemedia/random_expr.hpp"

using namespace riemedia;

namespace {

ExprMatrix mat(std::size_t n, const std::vector<std::string>& src) {
  ExprMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = parse(src[i * n + j]);
  return m;
}

ExprVector vec(const std::vector<std::string>& src) {
  ExprVector v;
  for (const auto& s : src) v.push_back(parse(s));
  return v;
}

MetricField polar() { return MetricField(Chart({"r", "th"}), mat(2, {"1", "0", "0", "r^2"})); }

MetricField sphere() { return MetricField(Chart({"th", "ph"}), mat(2, {"1", "0", "0", "sin(th)^2"})); }

MetricField spherical3() {
  return MetricField(Chart({"r", "th", "ph"}),
                     mat(3, {"1", "0", "0", "0", "r^2", "0", "0", "0", "r^2*sin(th)^2"}));
}

// A non-diagonal metric, positive-definite on the unit box.
MetricField skewed() {
  return MetricField(Chart({"x", "y"}), mat(2, {"2 + x^2", "x*y/2", "x*y/2", "1 + y^2"}));
}

// Christoffel symbols computed numerically: central differences of the
// metric and an LU inverse.
std::vector<Eigen::MatrixXd> numeric_christoffel(const MetricField& g, Bindings p) {
  const std::size_t n = g.dim();
  const auto& x = g.chart().space_vars();
  const double h = 1e-5;
  std::vector<Eigen::MatrixXd> dg;
  for (std::size_t l = 0; l < n; ++l) {
    Bindings a = p;
    Bindings b = p;
    a[x[l]] += h;
    b[x[l]] -= h;
    dg.push_back((evaluate(g.matrix(), a) - evaluate(g.matrix(), b)) / (2 * h));
  }
  Eigen::MatrixXd ginv = evaluate(g.matrix(), p).inverse();
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l)
          gamma[k](i, j) += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  return gamma;
}

double numeric_divergence(const MetricField& g, const VectorField& X, Bindings p) {
  // (1/sqrt g) d_i (sqrt g X_i)
  const auto& x = g.chart().space_vars();
  const double h = 1e-5;
  auto flux = [&](const Bindings& b, std::size_t i) {
    return std::sqrt(evaluate(g.matrix(), b).determinant()) * eval(X.c[i], b);
  };
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Bindings a = p;
    Bindings b = p;
    a[x[i]] += h;
    b[x[i]] -= h;
    s += (flux(a, i) - flux(b, i)) / (2 * h);
  }
  return s / std::sqrt(evaluate(g.matrix(), p).determinant());
}

}  // namespace

TEST(Metric, InverseIsExact) {
  MetricField g = skewed();
  Bindings p{{"x", 0.3}, {"y", -0.6}};
  Eigen::MatrixXd prod = evaluate(g.matrix(), p) * evaluate(g.inverse(), p);
  EXPECT_LE((prod - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Metric, DiagonalInverseIsReciprocal) {
  MetricField g = polar();
  EXPECT_EQ(eval(g.inverse()(1, 1), {{"r", 2.0}}), 0.25);
  EXPECT_TRUE(g.inverse()(0, 1).is_constant(0.0));
}

TEST(Metric, RejectsAsymmetric) {
  EXPECT_THROW(MetricField(Chart({"x", "y"}), mat(2, {"1", "x", "0", "1"})), GeometryError);
}

TEST(Metric, RejectsForeignVariable) {
  EXPECT_THROW(MetricField(Chart({"x", "y"}, "t"), mat(2, {"1 + t^2", "0", "0", "1"})), GeometryError);
  EXPECT_THROW(MetricField(Chart({"x"}), mat(1, {"z"})), GeometryError);
}

TEST(Metric, RejectsDimensionMismatch) {
  EXPECT_THROW(MetricField(Chart({"x", "y"}), mat(1, {"1"})), GeometryError);
}

TEST(Metric, PositiveDefiniteCheck) {
  MetricField g(Chart({"x", "y"}), mat(2, {"1", "0", "0", "x"}));
  EXPECT_NO_THROW(check_positive_definite(g, {{"x", 0.5}, {"y", 0.0}}));
  EXPECT_THROW(check_positive_definite(g, {{"x", -0.5}, {"y", 0.0}}), GeometryError);
  EXPECT_THROW(check_positive_definite(g, {{"x", 0.0}, {"y", 0.0}}), GeometryError);
}

TEST(Metric, FromUpperMirrors) {
  MetricField g = MetricField::from_upper(Chart({"x", "y"}), mat(2, {"1", "x", "junk", "2"}));
  EXPECT_EQ(to_string(g(1, 0)), "x");
}

TEST(Chart, Validation) {
  EXPECT_THROW(Chart(std::vector<std::string>{}), GeometryError);
  EXPECT_THROW(Chart({"x", "x"}), GeometryError);
  EXPECT_THROW(Chart({"x"}, "x"), GeometryError);
  Chart c({"x"});
  EXPECT_THROW(c.set_domain("y", {0, 1}), GeometryError);
  EXPECT_THROW(c.set_domain("x", {1, 1}), GeometryError);
  EXPECT_THROW(c.domain("x"), GeometryError);
}

TEST(Chart, ProbesAreDeterministicAndInDomain) {
  Chart c({"x", "y"}, "t");
  c.set_domain("x", {1, 2}).set_domain("y", {-3, -2}).set_domain("t", {0, 0.5});
  auto a = sample_probes(c, 200, 11);
  auto b = sample_probes(c, 200, 11);
  auto other = sample_probes(c, 200, 12);
  ASSERT_EQ(a.size(), 200u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, other);
  for (const auto& p : a) {
    EXPECT_TRUE(c.domain("x").contains(p.at("x")));
    EXPECT_TRUE(c.domain("y").contains(p.at("y")));
    EXPECT_TRUE(c.domain("t").contains(p.at("t")));
  }
}

TEST(Christoffel, Polar) {
  ChristoffelField G = christoffel(polar());
  Bindings p{{"r", 2.0}, {"th", 0.4}};
  EXPECT_EQ(eval(G(0, 1, 1), p), -2.0);
  EXPECT_EQ(eval(G(1, 0, 1), p), 0.5);
  EXPECT_EQ(eval(G(1, 1, 0), p), 0.5);
  EXPECT_TRUE(G(0, 0, 0).is_constant(0.0));
  EXPECT_TRUE(G(0, 0, 1).is_constant(0.0));
  EXPECT_TRUE(G(1, 0, 0).is_constant(0.0));
  EXPECT_TRUE(G(1, 1, 1).is_constant(0.0));
}

TEST(Christoffel, Sphere) {
  ChristoffelField G = christoffel(sphere());
  const double th = 0.9;
  Bindings p{{"th", th}, {"ph", 2.0}};
  EXPECT_NEAR(eval(G(0, 1, 1), p), -std::sin(th) * std::cos(th), 1e-15);
  EXPECT_NEAR(eval(G(1, 0, 1), p), std::cos(th) / std::sin(th), 1e-15);
  EXPECT_TRUE(G(0, 0, 0).is_constant(0.0));
}

TEST(Christoffel, EuclideanVanishes) {
  ChristoffelField G = christoffel(MetricField::euclidean(Chart({"x", "y", "z"})));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(G(k, i, j).is_constant(0.0));
}

TEST(Christoffel, MatchesNumericLeviCivita) {
  SplitMix64 rng(17);
  for (const MetricField& g : {polar(), sphere(), spherical3(), skewed()}) {
    ChristoffelField G = christoffel(g);
    for (int k = 0; k < 10; ++k) {
      Bindings p;
      for (const auto& v : g.chart().space_vars()) p[v] = rng.uniform(0.3, 1.2);
      auto ref = numeric_christoffel(g, p);
      for (std::size_t a = 0; a < g.dim(); ++a)
        for (std::size_t i = 0; i < g.dim(); ++i)
          for (std::size_t j = 0; j < g.dim(); ++j) EXPECT_NEAR(eval(G(a, i, j), p), ref[a](i, j), 1e-8);
    }
  }
}

TEST(Christoffel, TorsionFreeAndMetricCompatible) {
  SplitMix64 rng(23);
  for (const MetricField& g : {spherical3(), skewed()}) {
    ChristoffelField G = christoffel(g);
    const std::size_t n = g.dim();
    const auto& x = g.chart().space_vars();
    for (int s = 0; s < 10; ++s) {
      Bindings p;
      for (const auto& v : x) p[v] = rng.uniform(0.3, 1.2);
      Eigen::MatrixXd gm = evaluate(g.matrix(), p);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(eval(G(k, i, j), p), eval(G(k, j, i), p));
        // d_k g_ij = G^l_ki g_lj + G^l_kj g_il
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            double lhs = eval(differentiate(g(i, j), x[k]), p);
            double rhs = 0.0;
            for (std::size_t l = 0; l < n; ++l) rhs += eval(G(l, k, i), p) * gm(l, j) + eval(G(l, k, j), p) * gm(i, l);
            EXPECT_NEAR(lhs, rhs, 1e-12);
          }
      }
    }
  }
}

TEST(Divergence, PolarRadialField) {
  MetricField g = polar();
  VectorField X = make_vector(g.chart(), vec({"r", "0"}));
  ScalarField d = divergence(X, christoffel(g));
  EXPECT_EQ(eval(d.f, {{"r", 0.7}, {"th", 1.0}}), 2.0);
}

TEST(Divergence, EqualsTraceOfCovariantDifferential) {
  MetricField g = spherical3();
  ChristoffelField G = christoffel(g);
  VectorField X = make_vector(g.chart(), vec({"r*cos(th)", "sin(ph)/r", "r*th"}));
  MixedTensorField dX = covariant_differential(X, G);
  Expr div = divergence(X, G).f;
  SplitMix64 rng(5);
  for (int k = 0; k < 20; ++k) {
    Bindings p{{"r", rng.uniform(0.5, 2)}, {"th", rng.uniform(0.3, 2.8)}, {"ph", rng.uniform(0, 6)}};
    EXPECT_NEAR(eval(trace(dX.a), p), eval(div, p), 1e-12);
  }
}

TEST(Divergence, VolumeFormIdentity) {
  SplitMix64 rng(9);
  for (const MetricField& g : {polar(), spherical3(), skewed()}) {
    ChristoffelField G = christoffel(g);
    RandomExprGenerator gen(g.chart().space_vars(), 100 + g.dim());
    ExprVector c;
    for (std::size_t i = 0; i < g.dim(); ++i) c.push_back(gen(3));
    VectorField X = make_vector(g.chart(), c);
    Expr div = divergence(X, G).f;
    for (int k = 0; k < 10; ++k) {
      Bindings p;
      for (const auto& v : g.chart().space_vars()) p[v] = rng.uniform(0.4, 1.2);
      const double ref = numeric_divergence(g, X, p);
      EXPECT_NEAR(eval(div, p), ref, 1e-6 * (1 + std::fabs(ref)));
    }
  }
}

TEST(Divergence, TensorLeibnizRule) {
  // div(X (x) w) = (div X) w + nabla_X w
  SplitMix64 rng(31);
  for (const MetricField& g : {sphere(), spherical3(), skewed()}) {
    ChristoffelField G = christoffel(g);
    const auto& x = g.chart().space_vars();
    RandomExprGenerator gen(x, 7 * g.dim());
    ExprVector xc;
    ExprVector wc;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      xc.push_back(gen(3));
      wc.push_back(gen(3));
    }
    VectorField X = make_vector(g.chart(), xc);
    CovectorField w = make_covector(g.chart(), wc);
    CovectorField lhs = divergence(tensor_product(X, w), G);
    Expr divX = divergence(X, G).f;
    CovectorField nab = covariant_derivative(w, X, G);
    for (int s = 0; s < 10; ++s) {
      Bindings p;
      for (const auto& v : x) p[v] = rng.uniform(0.4, 1.2);
      for (std::size_t k = 0; k < g.dim(); ++k) {
        const double rhs = eval(divX, p) * eval(wc[k], p) + eval(nab.c[k], p);
        EXPECT_NEAR(eval(lhs.c[k], p), rhs, 1e-10 * (1 + std::fabs(rhs)));
      }
    }
  }
}

TEST(Divergence, IdentityTensorHasZeroDivergence) {
  MetricField g = spherical3();
  CovectorField d = divergence(make_tensor(g.chart(), ExprMatrix::identity(3)), christoffel(g));
  Bindings p{{"r", 1.3}, {"th", 0.8}, {"ph", 0.1}};
  for (const auto& c : d.c) EXPECT_NEAR(eval(c, p), 0.0, 1e-15);
}

TEST(CovariantDifferential, PolarRotation) {
  // X = d_theta is a Killing field: its covariant differential is skew-adjoint.
  MetricField g = polar();
  MixedTensorField dX = covariant_differential(make_vector(g.chart(), vec({"0", "1"})), christoffel(g));
  Bindings p{{"r", 1.5}, {"th", 0.2}};
  Eigen::MatrixXd a = evaluate(dX, p);
  EXPECT_EQ(a(0, 1), -1.5);
  EXPECT_NEAR(a(1, 0), 1.0 / 1.5, 1e-15);
  auto [strain, spin] = strain_spin_split(dX, g);
  EXPECT_LE(evaluate(strain, p).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((evaluate(spin, p) - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Adjoint, PairingIdentity) {
  MetricField g = skewed();
  SplitMix64 rng(2);
  ExprMatrix A(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) A(i, j) = Expr(rng.uniform(-1, 1)) * var("x") + Expr(rng.uniform(-1, 1));
  MixedTensorField T = make_tensor(g.chart(), A);
  MixedTensorField Tadj = g_adjoint(T, g);
  VectorField u = make_vector(g.chart(), vec({"1 + x", "y"}));
  VectorField v = make_vector(g.chart(), vec({"x*y", "2 - y"}));
  Expr lhs = inner(apply(Tadj, u), v, g).f;
  Expr rhs = inner(u, apply(T, v), g).f;
  for (int k = 0; k < 10; ++k) {
    Bindings p{{"x", rng.uniform(-1, 1)}, {"y", rng.uniform(-1, 1)}};
    EXPECT_NEAR(eval(lhs, p), eval(rhs, p), 1e-13);
  }
  // The adjoint is an involution.
  MixedTensorField back = g_adjoint(Tadj, g);
  Bindings p{{"x", 0.3}, {"y", 0.9}};
  EXPECT_LE((evaluate(back, p) - evaluate(T, p)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Adjoint, EuclideanIsTranspose) {
  MetricField g = MetricField::euclidean(Chart({"x", "y"}));
  MixedTensorField T = make_tensor(g.chart(), mat(2, {"1", "x", "y", "4"}));
  Eigen::MatrixXd a = evaluate(g_adjoint(T, g), {{"x", 2.0}, {"y", 3.0}});
  EXPECT_EQ(a(0, 1), 3.0);
  EXPECT_EQ(a(1, 0), 2.0);
}

TEST(SharpFlat, RoundTrip) {
  MetricField g = skewed();
  VectorField X = make_vector(g.chart(), vec({"sin(x)", "x*y - 1"}));
  VectorField back = sharp(flat(X, g), g);
  SplitMix64 rng(4);
  for (int k = 0; k < 10; ++k) {
    Bindings p{{"x", rng.uniform(-1, 1)}, {"y", rng.uniform(-1, 1)}};
    EXPECT_LE((evaluate(back, p) - evaluate(X, p)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SharpFlat, PolarComponents) {
  MetricField g = polar();
  CovectorField w = flat(make_vector(g.chart(), vec({"1", "1"})), g);
  Eigen::VectorXd v = evaluate(w, {{"r", 3.0}, {"th", 0.0}});
  EXPECT_EQ(v(0), 1.0);
  EXPECT_EQ(v(1), 9.0);
  EXPECT_EQ(eval(pairing(w, make_vector(g.chart(), vec({"0", "2"}))).f, {{"r", 3.0}, {"th", 0.0}}), 18.0);
}

TEST(Differential, Gradient) {
  Chart c({"x", "y"});
  CovectorField d = differential({c, parse("x^2*y")});
  Eigen::VectorXd v = evaluate(d, {{"x", 2.0}, {"y", 3.0}});
  EXPECT_EQ(v(0), 12.0);
  EXPECT_EQ(v(1), 4.0);
}

TEST(VolumeDensity, Spherical) {
  ScalarField v = volume_density(spherical3());
  EXPECT_NEAR(eval(v.f, {{"r", 2.0}, {"th", 0.5}, {"ph", 0.0}}), 4.0 * std::sin(0.5), 1e-15);
}

TEST(MaterialDerivative, Scalar) {
  Chart c({"x"}, "t");
  VectorField X = make_vector(c, vec({"2*x"}));
  ScalarField Df = material_derivative({c, parse("x*t")}, X);
  EXPECT_EQ(eval(Df.f, {{"x", 3.0}, {"t", 5.0}}), 3.0 + 2.0 * 3.0 * 5.0);
}

TEST(MaterialDerivative, NeedsTime) {
  Chart c({"x"});
  EXPECT_THROW(material_derivative({c, parse("x")}, make_vector(c, vec({"1"}))), GeometryError);
}

TEST(Acceleration, RigidRotationIsCentripetal) {
  Chart c({"r", "th"}, "t");
  MetricField g(c, mat(2, {"1", "0", "0", "r^2"}));
  VectorField X = make_vector(c, vec({"0", "0.75"}));
  Eigen::VectorXd a = evaluate(acceleration(X, christoffel(g)), {{"r", 2.0}, {"th", 1.0}, {"t", 0.0}});
  EXPECT_EQ(a(0), -2.0 * 0.75 * 0.75);
  EXPECT_EQ(a(1), 0.0);
}

TEST(Acceleration, UniformFlowWithTimeDependence) {
  Chart c({"x", "y"}, "t");
  MetricField g = MetricField::euclidean(c);
  VectorField X = make_vector(c, vec({"t*x", "y"}));
  Eigen::VectorXd a = evaluate(acceleration(X, christoffel(g)), {{"x", 2.0}, {"y", 3.0}, {"t", 0.5}});
  EXPECT_EQ(a(0), 2.0 + 0.5 * 2.0 * 0.5);
  EXPECT_EQ(a(1), 3.0);
}

TEST(Fields, ChartMismatchIsRejected) {
  MetricField g = polar();
  VectorField X = make_vector(Chart({"x", "y"}), vec({"1", "1"}));
  EXPECT_THROW(divergence(X, christoffel(g)), GeometryError);
  EXPECT_THROW(flat(X, g), GeometryError);
  EXPECT_THROW(make_vector(Chart({"x"}), vec({"1", "2"})), GeometryError);
}
