#pragma once

// Equations of thermodynamic state generated by Massieu-Planck potentials,
// the induced quadratic forms, phase classification, and the Newtonian-media
// closure built from orthogonal-group trace invariants.
//
// Potential symbols:
//   rho, T               mass density and temperature
//   D_ij (1-based)       entries of the rate-of-deformation operator Delta
//   P1, P2, P11          Tr Delta, Tr Delta^2, Tr(Delta Delta*)
// Delta* is the metric adjoint g^{-1} Delta^T g.

#include <array>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/matrix.hpp"

namespace riemedia {

inline const std::string kRho = "rho";
inline const std::string kTemperature = "T";
inline const std::string kColdness = "beta";
inline const std::string kP1 = "P1";
inline const std::string kP2 = "P2";
inline const std::string kP11 = "P11";

inline std::string delta_symbol(std::size_t i, std::size_t j) {
  return "D_" + std::to_string(i + 1) + std::to_string(j + 1);
}

// ---------------------------------------------------------------------------
// Potentials

/// Specific Massieu-Planck potential psi(rho, T) of a still medium.
class PotentialStill {
 public:
  PotentialStill() = default;
  explicit PotentialStill(Expr psi) : psi_(std::move(psi)) {
    for (const auto& v : variables(psi_)) {
      if (v != kRho && v != kTemperature) {
        throw ThermoError("still potential may depend on rho and T only, found '" + v + "'");
      }
    }
    psi_rho_ = differentiate(psi_, kRho);
    psi_T_ = differentiate(psi_, kTemperature);
  }

  const Expr& expr() const noexcept { return psi_; }
  const Expr& d_rho() const noexcept { return psi_rho_; }
  const Expr& d_T() const noexcept { return psi_T_; }

 private:
  Expr psi_;
  Expr psi_rho_;
  Expr psi_T_;
};

/// Massieu-Planck potential density phi(rho, T, Delta) of a moving medium in
/// dimension n, over raw entries D_ij and/or the invariants P1, P2, P11.
class PotentialMoving {
 public:
  PotentialMoving() = default;
  PotentialMoving(std::size_t n, Expr phi) : n_(n), phi_(std::move(phi)) {
    if (n == 0 || n > 4) throw ThermoError("potential dimension must be in 1..4");
    std::set<std::string> allowed{kRho, kTemperature, kP1, kP2, kP11};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) allowed.insert(delta_symbol(i, j));
    for (const auto& v : variables(phi_)) {
      if (!allowed.count(v)) throw ThermoError("unexpected symbol '" + v + "' in moving-medium potential");
    }
  }

  std::size_t dim() const noexcept { return n_; }
  const Expr& expr() const noexcept { return phi_; }

 private:
  std::size_t n_ = 0;
  Expr phi_;
};

// ---------------------------------------------------------------------------
// Invariants

/// One word A^a1 A*^b1 ... A^am A*^bm of an Artin-Procesi invariant.
struct TraceWord {
  std::vector<std::pair<unsigned, unsigned>> letters;

  unsigned degree() const {
    unsigned d = 0;
    for (auto [a, b] : letters) d += a + b;
    return d;
  }
};

inline const TraceWord kWordP1{{{1, 0}}};
inline const TraceWord kWordP2{{{2, 0}}};
inline const TraceWord kWordP11{{{1, 1}}};

inline Eigen::MatrixXd metric_adjoint(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible()) throw ThermoError("singular metric");
  return lu.solve(A.transpose() * g);
}

/// P_{a,b}(A) = Tr(A^a1 A*^b1 ... A^am A*^bm), A* the g-adjoint.
inline double artin_procesi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g, const TraceWord& word) {
  if (word.degree() == 0) throw ThermoError("trace word must have positive degree");
  const Eigen::MatrixXd adj = metric_adjoint(A, g);
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (auto [a, b] : word.letters) {
    for (unsigned k = 0; k < a; ++k) prod = prod * A;
    for (unsigned k = 0; k < b; ++k) prod = prod * adj;
  }
  return prod.trace();
}

struct Invariants {
  double p1 = 0.0;
  double p2 = 0.0;
  double p11 = 0.0;
};

inline Invariants basic_invariants(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g) {
  return {artin_procesi(A, g, kWordP1), artin_procesi(A, g, kWordP2), artin_procesi(A, g, kWordP11)};
}

/// P1, P2, P11 as expressions in the entries of a symbolic Delta.
inline std::array<Expr, 3> symbolic_invariants(const ExprMatrix& delta, const ExprMatrix& g, const ExprMatrix& ginv) {
  ExprMatrix adj = ginv * transpose(delta) * g;
  return {trace(delta), trace(delta * delta), trace(delta * adj)};
}

inline ExprMatrix delta_symbols(std::size_t n) {
  ExprMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = var(delta_symbol(i, j));
  return d;
}

/// Replaces P1, P2, P11 by their expressions in D_ij for a constant metric.
inline Expr expand_invariants(const PotentialMoving& phi, const Eigen::MatrixXd& g) {
  const std::size_t n = phi.dim();
  ExprMatrix gm = constant_matrix(g);
  ExprMatrix gi = constant_matrix(g.inverse());
  auto inv = symbolic_invariants(delta_symbols(n), gm, gi);
  return substitute(phi.expr(), {{kP1, inv[0]}, {kP2, inv[1]}, {kP11, inv[2]}});
}

// ---------------------------------------------------------------------------
// Still media

struct StillState {
  double energy = 0.0;    // specific energy
  double pressure = 0.0;
};

/// eps = T^2 psi_T, p = -rho^2 T psi_rho.
inline StillState state_still(const PotentialStill& psi, double rho, double T) {
  if (!(T > 0.0)) throw ThermoError("temperature must be positive");
  if (!(rho > 0.0)) throw ThermoError("density must be positive");
  Bindings b{{kRho, rho}, {kTemperature, T}};
  return {T * T * eval(psi.d_T(), b), -rho * rho * T * eval(psi.d_rho(), b)};
}

/// Point of the reduced (specific) Legendrian manifold of a still gas:
/// x' = (eps, v), y = (1/T, p/T, -eta/T), with eta from psi = p/(rho T) - eta/T.
struct StillLegendrianPoint {
  std::array<double, 2> x;
  std::array<double, 3> y;
  double eta;
};

inline StillLegendrianPoint still_legendrian_point(const PotentialStill& psi, double rho, double T) {
  StillState s = state_still(psi, rho, T);
  double psi_v = eval(psi.expr(), {{kRho, rho}, {kTemperature, T}});
  double eta = s.pressure / rho - T * psi_v;
  return {{s.energy, 1.0 / rho}, {1.0 / T, s.pressure / T, -eta / T}, eta};
}

// ---------------------------------------------------------------------------
// Moving media

/// One point of the state manifold of a moving medium.
struct StatePoint {
  double rho = 0.0;
  double T = 0.0;
  Eigen::MatrixXd delta;
  double e = 0.0;
  Eigen::MatrixXd sigma;
  double eta = 0.0;
  double p = 0.0;
};

/// Tr(sigma* Delta) with sigma* the g-adjoint.
inline double stress_pairing(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& delta, const Eigen::MatrixXd& g) {
  return (metric_adjoint(sigma, g) * delta).trace();
}

/// Entropy density s from e - T s = Tr(sigma* Delta) + eta rho - p.
inline double entropy_density(const StatePoint& s, const Eigen::MatrixXd& g) {
  return (s.e - stress_pairing(s.sigma, s.delta, g) - s.eta * s.rho + s.p) / s.T;
}

/// State equations of a moving medium, with the potential's partial
/// derivatives prepared once:
///   e = T^2 phi_T,  eta = -T phi_rho,  sigma = -T g^{-1} (dphi/dDelta) g,
///   p = T phi + Tr(sigma* Delta) + rho eta.
/// dphi/dDelta collects explicit D_ij dependence and the chain rule through
/// P1 (identity), P2 (2 Delta^T) and P11 (2 g Delta g^{-1}). For Euclidean g,
/// sigma_ij = -T dphi/dD_ij.
class MovingStateEquations {
 public:
  MovingStateEquations() = default;

  explicit MovingStateEquations(PotentialMoving phi) : phi_(std::move(phi)) {
    const std::size_t n = phi_.dim();
    slots_ = {kRho, kTemperature, kP1, kP2, kP11};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) slots_.push_back(delta_symbol(i, j));
    const Expr& f = phi_.expr();
    d_T_ = differentiate(f, kTemperature);
    d_rho_ = differentiate(f, kRho);
    d_p1_ = differentiate(f, kP1);
    d_p2_ = differentiate(f, kP2);
    d_p11_ = differentiate(f, kP11);
    d_delta_ = delta_symbols(n).map([&](const Expr& d) { return differentiate(f, d.name()); });
    c_phi_ = compile(f);
    c_T_ = compile(d_T_);
    c_rho_ = compile(d_rho_);
    c_p1_ = compile(d_p1_);
    c_p2_ = compile(d_p2_);
    c_p11_ = compile(d_p11_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c_delta_.push_back(compile(d_delta_(i, j)));
  }

  const PotentialMoving& potential() const noexcept { return phi_; }
  std::size_t dim() const noexcept { return phi_.dim(); }

  double potential_value(double rho, double T, const Eigen::MatrixXd& delta, const Eigen::MatrixXd& g) const {
    auto in = inputs(rho, T, delta, g);
    return c_phi_(in);
  }

  StatePoint at(double rho, double T, const Eigen::MatrixXd& delta, const Eigen::MatrixXd& g) const {
    if (!(T > 0.0)) throw ThermoError("temperature must be positive");
    const std::size_t n = dim();
    if (static_cast<std::size_t>(delta.rows()) != n || static_cast<std::size_t>(delta.cols()) != n) {
      throw ThermoError("deformation has wrong dimension");
    }
    auto in = inputs(rho, T, delta, g);
    const double phi_v = c_phi_(in);
    const double f_p1 = c_p1_(in);
    const double f_p2 = c_p2_(in);
    const double f_p11 = c_p11_(in);
    Eigen::MatrixXd grad(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) grad(i, j) = c_delta_[i * n + j](in);
    const Eigen::MatrixXd ginv = g.inverse();
    grad += f_p1 * Eigen::MatrixXd::Identity(n, n) + 2.0 * f_p2 * delta.transpose() + 2.0 * f_p11 * (g * delta * ginv);

    StatePoint s;
    s.rho = rho;
    s.T = T;
    s.delta = delta;
    s.e = T * T * c_T_(in);
    s.eta = -T * c_rho_(in);
    s.sigma = -T * (ginv * grad * g);
    s.p = T * phi_v + stress_pairing(s.sigma, delta, g) + rho * s.eta;
    return s;
  }

  /// Symbolic state equations with rho, T, Delta replaced by field expressions.
  struct Fields {
    Expr e;
    Expr eta;
    ExprMatrix sigma;
  };

  Fields substitute_fields(const Expr& rho, const Expr& T, const ExprMatrix& delta, const ExprMatrix& g,
                           const ExprMatrix& ginv) const {
    const std::size_t n = dim();
    auto inv = symbolic_invariants(delta, g, ginv);
    std::map<std::string, Expr, std::less<>> repl{
        {kRho, rho}, {kTemperature, T}, {kP1, inv[0]}, {kP2, inv[1]}, {kP11, inv[2]}};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) repl[delta_symbol(i, j)] = delta(i, j);
    auto sub = [&](const Expr& e) { return substitute(e, repl); };

    Expr f_p1 = sub(d_p1_);
    Expr f_p2 = sub(d_p2_);
    Expr f_p11 = sub(d_p11_);
    ExprMatrix g_delta_ginv = g * delta * ginv;
    ExprMatrix grad(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Expr gij = sub(d_delta_(i, j));
        if (i == j) gij += f_p1;
        gij += Expr(2.0) * f_p2 * delta(j, i);
        gij += Expr(2.0) * f_p11 * g_delta_ginv(i, j);
        grad(i, j) = gij;
      }
    ExprMatrix sigma = scale(-T, ginv * grad * g);
    return {T * T * sub(d_T_), -T * sub(d_rho_), sigma};
  }

 private:
  CompiledExpr compile(const Expr& e) const { return CompiledExpr(e, slots_); }

  std::vector<double> inputs(double rho, double T, const Eigen::MatrixXd& delta, const Eigen::MatrixXd& g) const {
    Invariants inv = basic_invariants(delta, g);
    std::vector<double> in{rho, T, inv.p1, inv.p2, inv.p11};
    for (Eigen::Index i = 0; i < delta.rows(); ++i)
      for (Eigen::Index j = 0; j < delta.cols(); ++j) in.push_back(delta(i, j));
    return in;
  }

  PotentialMoving phi_;
  std::vector<std::string> slots_;
  Expr d_T_, d_rho_, d_p1_, d_p2_, d_p11_;
  ExprMatrix d_delta_;
  CompiledExpr c_phi_, c_T_, c_rho_, c_p1_, c_p2_, c_p11_;
  std::vector<CompiledExpr> c_delta_;
};

inline StatePoint state_moving(const PotentialMoving& phi, double rho, double T, const Eigen::MatrixXd& delta,
                               const Eigen::MatrixXd& g) {
  return MovingStateEquations(phi).at(rho, T, delta, g);
}

inline StatePoint state_moving(const PotentialMoving& phi, double rho, double T, const Eigen::MatrixXd& delta) {
  return state_moving(phi, rho, T, delta, Eigen::MatrixXd::Identity(delta.rows(), delta.cols()));
}

/// |phi - (p - Tr(sigma* Delta) - rho eta) / T|
inline double euler_residual(const MovingStateEquations& eqs, const StatePoint& s, const Eigen::MatrixXd& g) {
  double phi = eqs.potential_value(s.rho, s.T, s.delta, g);
  return std::fabs(phi - (s.p - stress_pairing(s.sigma, s.delta, g) - s.rho * s.eta) / s.T);
}

// ---------------------------------------------------------------------------
// Quadratic forms and phases

enum class PhaseClass { applicable, singular, non_applicable };

inline char phase_letter(PhaseClass c) {
  switch (c) {
    case PhaseClass::applicable: return 'A';
    case PhaseClass::singular: return 'S';
    case PhaseClass::non_applicable: return 'N';
  }
  return '?';
}

inline constexpr double kClassificationTol = 1e-9;

/// applicable: all eigenvalues < -tol; singular: some |lambda| <= tol and the
/// rest < -tol; otherwise non-applicable.
inline PhaseClass classify(const Eigen::MatrixXd& form, double tol = kClassificationTol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form, Eigen::EigenvaluesOnly);
  bool degenerate = false;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double l = es.eigenvalues()(i);
    if (std::fabs(l) <= tol) {
      degenerate = true;
    } else if (l > tol) {
      return PhaseClass::non_applicable;
    }
  }
  return degenerate ? PhaseClass::singular : PhaseClass::applicable;
}

struct QuadFormSample {
  std::vector<std::string> coords;
  Eigen::MatrixXd matrix;
  PhaseClass classification = PhaseClass::non_applicable;
};

/// chi' = -phi_bb dbeta^2 + Hess_{rho,Delta}(phi) for a given constant metric.
/// Coordinates are (beta, rho, D_11, D_12, ..., D_nn).
class ChiPrimeForm {
 public:
  ChiPrimeForm(const PotentialMoving& phi, const Eigen::MatrixXd& g) {
    const std::size_t n = phi.dim();
    coords_ = {kColdness, kRho};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) coords_.push_back(delta_symbol(i, j));
    Expr raw = expand_invariants(phi, g);
    Expr in_beta = substitute(raw, {{kTemperature, Expr(1.0) / var(kColdness)}});
    const std::size_t m = coords_.size();
    entries_.assign(m * m, CompiledExpr());
    CompiledExpr zero(Expr(0.0), coords_);
    Expr d_beta = differentiate(in_beta, kColdness);
    entries_[0] = CompiledExpr(-differentiate(d_beta, kColdness), coords_);
    for (std::size_t a = 1; a < m; ++a) {
      entries_[a] = zero;
      entries_[a * m] = zero;
      Expr first = differentiate(in_beta, coords_[a]);
      for (std::size_t b = a; b < m; ++b) {
        entries_[a * m + b] = CompiledExpr(differentiate(first, coords_[b]), coords_);
        if (b != a) entries_[b * m + a] = entries_[a * m + b];
      }
    }
  }

  const std::vector<std::string>& coords() const noexcept { return coords_; }

  QuadFormSample at(double rho, double T, const Eigen::MatrixXd& delta, double tol = kClassificationTol) const {
    if (!(T > 0.0)) throw ThermoError("temperature must be positive");
    std::vector<double> in{1.0 / T, rho};
    for (Eigen::Index i = 0; i < delta.rows(); ++i)
      for (Eigen::Index j = 0; j < delta.cols(); ++j) in.push_back(delta(i, j));
    const std::size_t m = coords_.size();
    Eigen::MatrixXd form(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) form(a, b) = entries_[a * m + b](in);
    return {coords_, form, classify(form, tol)};
  }

 private:
  std::vector<std::string> coords_;
  std::vector<CompiledExpr> entries_;
};

inline QuadFormSample chi_prime(const PotentialMoving& phi, double rho, double T, const Eigen::MatrixXd& delta,
                                const Eigen::MatrixXd& g) {
  return ChiPrimeForm(phi, g).at(rho, T, delta);
}

inline QuadFormSample chi_prime(const PotentialMoving& phi, double rho, double T, const Eigen::MatrixXd& delta) {
  return chi_prime(phi, rho, T, delta, Eigen::MatrixXd::Identity(delta.rows(), delta.cols()));
}

/// kappa = -(R n / 2T^2) dT^2 - (R / v^2) dv^2 over (T, v).
inline QuadFormSample ideal_gas_kappa(double T, double v, double R, double n) {
  if (!(T > 0.0) || !(v > 0.0) || !(R > 0.0) || !(n > 0.0)) {
    throw ThermoError("ideal gas kappa needs positive T, v, R, n");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = -R * n / (2.0 * T * T);
  m(1, 1) = -R / (v * v);
  return {{"T", "v"}, m, classify(m)};
}

/// van der Waals (reduced units) kappa over (T, v):
///   kTT = -R n / (2 T^2),
///   kvv = -9 R (4 T v^3 - 9 v^2 + 6 v - 1) / (4 T v^3 (3v - 1)^2).
/// The numerator is evaluated as 4 T v^3 - (3v - 1)^2, which is the same
/// polynomial and cancels exactly on the coexistence curve.
inline QuadFormSample vdw_kappa(double T, double v, double R, double n) {
  if (!(T > 0.0)) throw ThermoError("temperature must be positive");
  if (!(v > 1.0 / 3.0)) throw ThermoError("van der Waals specific volume must exceed 1/3");
  if (!(R > 0.0) || !(n > 0.0)) throw ThermoError("R and n must be positive");
  const double w = 3.0 * v - 1.0;
  const double v3 = v * v * v;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = -R * n / (2.0 * T * T);
  m(1, 1) = -9.0 * R * (4.0 * T * v3 - w * w) / (4.0 * T * v3 * w * w);
  return {{"T", "v"}, m, classify(m)};
}

/// T(v) = (3v - 1)^2 / (4 v^3)
inline double vdw_coexistence_temperature(double v) {
  const double w = 3.0 * v - 1.0;
  return w * w / (4.0 * v * v * v);
}

inline std::vector<std::pair<double, double>> vdw_coexistence_curve(double v_min, double v_max, std::size_t samples) {
  if (!(1.0 / 3.0 < v_min && v_min < v_max)) throw ThermoError("coexistence range must satisfy 1/3 < v_min < v_max");
  if (samples < 2) throw ThermoError("coexistence curve needs at least two samples");
  std::vector<std::pair<double, double>> out;
  out.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    double v = v_min + (v_max - v_min) * static_cast<double>(k) / static_cast<double>(samples - 1);
    out.emplace_back(v, vdw_coexistence_temperature(v));
  }
  return out;
}

/// Maximum of the coexistence curve by bisection on the sign of
/// dT/dv = 12 (3v - 1)(1 - v) / (16 v^4).
inline std::pair<double, double> vdw_critical_point() {
  auto slope = [](double v) { return 12.0 * (3.0 * v - 1.0) * (1.0 - v) / (16.0 * v * v * v * v); };
  double lo = 0.5;
  double hi = 3.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double v = 0.5 * (lo + hi);
  return {v, vdw_coexistence_temperature(v)};
}

// ---------------------------------------------------------------------------
// Newtonian media

struct NewtonianCoefficients {
  Expr a11{0.0};
  Expr a12{0.0};
  Expr a22{0.0};
  Expr b1{0.0};
  Expr b2{0.0};
};

/// phi = -(1/T) (1/2 (a11 P2 + a12 P11 + a22 P1^2) + b1 P1 + b2)
inline PotentialMoving newtonian_potential(const NewtonianCoefficients& c, std::size_t n) {
  const Expr p1 = var(kP1);
  Expr quad = Expr(0.5) * (c.a11 * var(kP2) + c.a12 * var(kP11) + c.a22 * pow(p1, Expr(2.0)));
  Expr phi = -(Expr(1.0) / var(kTemperature)) * (quad + c.b1 * p1 + c.b2);
  return PotentialMoving(n, phi);
}

/// sigma = a11 Delta* + a12 Delta + (a22 Tr Delta + b1) 1
inline Eigen::MatrixXd newtonian_stress(const NewtonianCoefficients& c, const Eigen::MatrixXd& delta,
                                        const Eigen::MatrixXd& g, double rho, double T) {
  Bindings b{{kRho, rho}, {kTemperature, T}};
  const double a11 = eval(c.a11, b);
  const double a12 = eval(c.a12, b);
  const double a22 = eval(c.a22, b);
  const double b1 = eval(c.b1, b);
  const auto n = delta.rows();
  return a11 * metric_adjoint(delta, g) + a12 * delta + (a22 * delta.trace() + b1) * Eigen::MatrixXd::Identity(n, n);
}

/// Coefficients making the hydrostatic pressure -b1 equal to the still-medium
/// pressure: b1 = rho^2 T psi_rho, b2 = -rho T psi.
inline std::pair<Expr, Expr> pressure_matching(const PotentialStill& psi) {
  const Expr rho = var(kRho);
  const Expr T = var(kTemperature);
  return {rho * rho * T * psi.d_rho(), -(rho * T * psi.expr())};
}

// ---------------------------------------------------------------------------
// Canonical coordinates and reductions

/// Gas coordinates z = S, x = (E, V, m), y = (1/T, p/T, -eta/T).
struct GasPoint {
  double S = 0.0;
  double E = 0.0;
  double V = 0.0;
  double m = 0.0;
  double T = 1.0;
  double p = 0.0;
  double eta = 0.0;
};

struct AtlasPotential {
  std::string chart;  // canonical coordinates, e.g. "y1,x2,x3"
  double phi;
};

/// The seven canonical charts of a three-quantity gas and their potentials
/// phi = z - sum over y-coordinates of x_k y_k.
inline std::array<AtlasPotential, 7> maslov_atlas_gas(const GasPoint& g) {
  const std::array<double, 3> x{g.E, g.V, g.m};
  const std::array<double, 3> y{1.0 / g.T, g.p / g.T, -g.eta / g.T};
  // Bit k set: y_{k+1} is a coordinate, x_{k+1} is a dependent "force".
  static constexpr std::array<unsigned, 7> masks{0b110, 0b101, 0b011, 0b001, 0b010, 0b100, 0b111};
  std::array<AtlasPotential, 7> out;
  for (std::size_t c = 0; c < masks.size(); ++c) {
    std::string label;
    double phi = g.S;
    // y-coordinates first, then x-coordinates, each in index order.
    for (int pass = 0; pass < 2; ++pass) {
      for (unsigned k = 0; k < 3; ++k) {
        bool is_y = (masks[c] >> k) & 1U;
        if (is_y != (pass == 0)) continue;
        if (!label.empty()) label += ",";
        label += (is_y ? "y" : "x") + std::to_string(k + 1);
        if (is_y) phi -= x[k] * y[k];
      }
    }
    out[c] = {label, phi};
  }
  return out;
}

/// Legendrian point from a potential in canonical coordinates:
///   z = phi - sum_{y-coords} y_j phi_{y_j},  y_i = phi_{x_i},  x_j = -phi_{y_j}.
/// `coord_names[k]` names the k-th canonical coordinate (x_k or y_k depending
/// on `is_y[k]`) inside `phi`.
struct LegendrianPoint {
  double z = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

inline LegendrianPoint maslov_point(const Expr& phi, const std::vector<std::string>& coord_names,
                                    const std::vector<bool>& is_y, std::span<const double> values) {
  const std::size_t n = coord_names.size();
  if (is_y.size() != n || values.size() != n) throw ThermoError("canonical chart size mismatch");
  Bindings b;
  for (std::size_t k = 0; k < n; ++k) b[coord_names[k]] = values[k];
  LegendrianPoint out;
  out.x.resize(n);
  out.y.resize(n);
  out.z = eval(phi, b);
  for (std::size_t k = 0; k < n; ++k) {
    double d = eval(differentiate(phi, coord_names[k]), b);
    if (is_y[k]) {
      out.y[k] = values[k];
      out.x[k] = -d;
      out.z -= values[k] * d;
    } else {
      out.x[k] = values[k];
      out.y[k] = d;
    }
  }
  return out;
}

/// Equations of state from the Helmholtz potential h(T, X):
///   E = h - T h_T,  Y = -h_X,  S = -h_T.
struct HelmholtzState {
  double E = 0.0;
  double S = 0.0;
  std::vector<double> Y;
};

inline HelmholtzState helmholtz_state(const Expr& h, double T, const std::vector<std::string>& x_names,
                                      std::span<const double> x) {
  Bindings b{{kTemperature, T}};
  for (std::size_t k = 0; k < x_names.size(); ++k) b[x_names[k]] = x[k];
  HelmholtzState s;
  double h_T = eval(differentiate(h, kTemperature), b);
  s.E = eval(h, b) - T * h_T;
  s.S = -h_T;
  for (const auto& name : x_names) s.Y.push_back(-eval(differentiate(h, name), b));
  return s;
}

/// Scale-invariant coordinates x'_k = x_k / x_{n+1}, z' = z / x_{n+1}.
struct ReducedCoordinates {
  double z = 0.0;
  std::vector<double> x;
};

inline ReducedCoordinates gibbs_duhem_reduce(double z, std::span<const double> x) {
  if (x.empty() || x.back() == 0.0) throw ThermoError("Gibbs-Duhem reduction needs a non-zero last extensive");
  const double last = x.back();
  ReducedCoordinates r;
  r.z = z / last;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) r.x.push_back(x[k] / last);
  return r;
}

/// theta' = dy_{n+1} + sum_k x'_k dy_k evaluated on a tangent vector dy.
inline double reduced_contact_form(std::span<const double> x_reduced, std::span<const double> dy) {
  if (dy.size() != x_reduced.size() + 1) throw ThermoError("reduced contact form size mismatch");
  double s = dy.back();
  for (std::size_t k = 0; k < x_reduced.size(); ++k) s += x_reduced[k] * dy[k];
  return s;
}

// ---------------------------------------------------------------------------
// Phase diagrams

enum class GasModel { ideal, van_der_waals };

struct PhaseNode {
  double v = 0.0;
  double T = 0.0;
  PhaseClass cls = PhaseClass::applicable;
  double kTT = 0.0;
  double kvv = 0.0;
};

/// Classification on node centres of an nv x nT grid over the open box
/// v_range x T_range. For van der Waals, a node is marked singular when the
/// coexistence curve crosses its T-cell, so the curve shows as a band.
inline std::vector<PhaseNode> phase_diagram(GasModel model, std::pair<double, double> v_range,
                                            std::pair<double, double> T_range, std::size_t nv, std::size_t nT,
                                            double R, double n) {
  if (nv == 0 || nT == 0) throw ThermoError("phase diagram grid must be non-empty");
  const double dv = (v_range.second - v_range.first) / static_cast<double>(nv);
  const double dT = (T_range.second - T_range.first) / static_cast<double>(nT);
  std::vector<PhaseNode> out;
  out.reserve(nv * nT);
  for (std::size_t i = 0; i < nv; ++i) {
    const double v = v_range.first + (static_cast<double>(i) + 0.5) * dv;
    for (std::size_t j = 0; j < nT; ++j) {
      const double T = T_range.first + (static_cast<double>(j) + 0.5) * dT;
      QuadFormSample q = model == GasModel::ideal ? ideal_gas_kappa(T, v, R, n) : vdw_kappa(T, v, R, n);
      PhaseNode node{v, T, q.classification, q.matrix(0, 0), q.matrix(1, 1)};
      if (model == GasModel::van_der_waals && std::fabs(T - vdw_coexistence_temperature(v)) <= 0.5 * dT) {
        node.cls = PhaseClass::singular;
      }
      out.push_back(node);
    }
  }
  return out;
}

}  // namespace riemedia
