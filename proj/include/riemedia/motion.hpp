#pragma once

// Residuals of the equations of motion of a medium on a Riemannian manifold
// (continuity, momentum, internal energy with Fourier heat flux), the kinetic
// and total energy identities, and a forward-Euler demonstrator on flat
// periodic grids.
//
// Stress is a (1,1)-tensor field sigma[i][k] (d_i (x) dx_k), like Delta.
// Pairings used below:
//   Tr(sigma Delta) = sum_{i,k} sigma[i][k] Delta[k][i]
//   sigma(X)_i      = sum_k sigma[i][k] X_k
// With these, div(sigma(X)) = (div sigma)(X) + Tr(sigma Delta).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riemedia/chart.hpp"
#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/geometry.hpp"
#include "riemedia/matrix.hpp"
#include "riemedia/thermo.hpp"

namespace riemedia {

/// Density, velocity and temperature as expressions in (t, x).
struct FlowState {
  Chart chart;
  Expr rho;
  ExprVector X;
  Expr T;

  ScalarField density() const { return {chart, rho}; }
  VectorField velocity() const { return make_vector(chart, X); }
  ScalarField temperature() const { return {chart, T}; }
};

/// Constitutive data: potential, thermal conductivity (1,1)-tensor, volume
/// force and mass source. Empty conductivity / force mean zero.
struct MediumClosure {
  PotentialMoving potential;
  ExprMatrix conductivity;
  ExprVector force;
  Expr source{0.0};
};

inline MediumClosure newtonian_closure(const NewtonianCoefficients& c, std::size_t n) {
  return {newtonian_potential(c, n), {}, {}, Expr(0.0)};
}

/// Trace pairing Tr(A B) of two (1,1)-tensors.
inline Expr trace_pairing(const ExprMatrix& a, const ExprMatrix& b) { return trace(a * b); }

/// Delta = d_nabla X
inline MixedTensorField deformation_field(const VectorField& X, const ChristoffelField& gamma) {
  return covariant_differential(X, gamma);
}

/// D rho / Dt + rho div X - S
inline ScalarField continuity_residual(const FlowState& s, const ChristoffelField& gamma, const ScalarField& source) {
  require_same_chart(s.chart, gamma.chart());
  require_same_chart(s.chart, source.chart);
  VectorField X = s.velocity();
  Expr r = material_derivative(s.density(), X).f + s.rho * divergence(X, gamma).f - source.f;
  return {s.chart, r};
}

/// J_q = -kappa grad T
inline VectorField fourier_flux(const MediumClosure& c, const FlowState& s, const MetricField& g) {
  const std::size_t n = s.chart.dim();
  if (c.conductivity.dim() == 0) return {s.chart, ExprVector(n, Expr(0.0))};
  detail::require_dim(s.chart, c.conductivity.dim(), "conductivity");
  VectorField grad = sharp(differential(s.temperature()), g);
  ExprVector q = mat_vec(c.conductivity, grad.c);
  for (auto& e : q) e = -e;
  return {s.chart, std::move(q)};
}

/// All fields of the equations of motion for one state and closure, built
/// once and shared by the residual operators.
class MotionSystem {
 public:
  MotionSystem(MetricField g, FlowState state, MediumClosure closure)
      : g_(std::move(g)), state_(std::move(state)), closure_(std::move(closure)), gamma_(christoffel(g_)) {
    const Chart& chart = state_.chart;
    require_same_chart(chart, g_.chart());
    if (!chart.has_time()) throw GeometryError("equations of motion need a chart with a time variable");
    const std::size_t n = chart.dim();
    detail::require_dim(chart, state_.X.size(), "velocity");
    if (closure_.potential.dim() != n) throw ThermoError("potential dimension does not match the chart");
    if (closure_.force.empty()) closure_.force.assign(n, Expr(0.0));
    detail::require_dim(chart, closure_.force.size(), "force");

    X_ = state_.velocity();
    delta_ = deformation_field(X_, gamma_);
    MovingStateEquations eqs(closure_.potential);
    auto f = eqs.substitute_fields(state_.rho, state_.T, delta_.a, g_.matrix(), g_.inverse());
    e_ = {chart, f.e};
    eta_ = {chart, f.eta};
    sigma_ = {chart, f.sigma};
    div_x_ = divergence(X_, gamma_);
    heat_ = fourier_flux(closure_, state_, g_);
    work_ = {chart, trace_pairing(sigma_.a, delta_.a)};
  }

  const MetricField& metric() const noexcept { return g_; }
  const ChristoffelField& christoffel_symbols() const noexcept { return gamma_; }
  const FlowState& state() const noexcept { return state_; }
  const MediumClosure& closure() const noexcept { return closure_; }
  const Chart& chart() const noexcept { return state_.chart; }

  const MixedTensorField& deformation() const noexcept { return delta_; }
  const MixedTensorField& stress() const noexcept { return sigma_; }
  const ScalarField& energy_density() const noexcept { return e_; }
  const ScalarField& chemical_potential() const noexcept { return eta_; }
  const VectorField& heat_flux() const noexcept { return heat_; }

  /// Tr(sigma Delta); the internal-energy production from stress work.
  const ScalarField& stress_power() const noexcept { return work_; }

  ScalarField continuity() const { return continuity_residual(state_, gamma_, {chart(), closure_.source}); }

  /// rho (d_t X + nabla_X X) - (div sigma)^sharp - F
  VectorField momentum() const {
    VectorField acc = acceleration(X_, gamma_);
    VectorField div_sigma = sharp(divergence(sigma_, gamma_), g_);
    ExprVector r(acc.c.size());
    for (std::size_t l = 0; l < r.size(); ++l) r[l] = state_.rho * acc.c[l] - div_sigma.c[l] - closure_.force[l];
    return {chart(), std::move(r)};
  }

  /// De/Dt + e div X + div J_q - Tr(sigma Delta)
  ScalarField energy() const {
    Expr r = material_derivative(e_, X_).f + e_.f * div_x_.f + divergence(heat_, gamma_).f - work_.f;
    return {chart(), r};
  }

  /// rho D/Dt (g(X,X)/2) - div(sigma(X)) + Tr(sigma Delta); equals
  /// g(momentum residual + F, X) for every state.
  ScalarField kinetic_balance() const {
    ScalarField half_sq{chart(), Expr(0.5) * inner(X_, X_, g_).f};
    Expr lhs = state_.rho * material_derivative(half_sq, X_).f;
    Expr r = lhs - divergence(apply(sigma_, X_), gamma_).f + work_.f;
    return {chart(), r};
  }

  /// u = rho g(X,X)/2 + e
  ScalarField total_energy() const { return {chart(), Expr(0.5) * state_.rho * inner(X_, X_, g_).f + e_.f}; }

  /// J = u X - sigma(X) + J_q
  VectorField total_flux() const {
    Expr u = total_energy().f;
    VectorField sx = apply(sigma_, X_);
    ExprVector j(X_.c.size());
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = u * X_.c[i] - sx.c[i] + heat_.c[i];
    return {chart(), std::move(j)};
  }

  /// d_t u + div J, which equals
  /// |X|^2/2 (r_mass + S) + g(r_mom + F, X) + r_energy.
  ScalarField energy_conservation() const {
    Expr r = differentiate(total_energy().f, *chart().time_var()) + divergence(total_flux(), gamma_).f;
    return {chart(), r};
  }

 private:
  MetricField g_;
  FlowState state_;
  MediumClosure closure_;
  ChristoffelField gamma_;
  VectorField X_;
  MixedTensorField delta_;
  MixedTensorField sigma_;
  ScalarField e_;
  ScalarField eta_;
  ScalarField div_x_;
  VectorField heat_;
  ScalarField work_;
};

inline MixedTensorField stress_field(const MediumClosure& c, const FlowState& s, const MetricField& g) {
  return MotionSystem(g, s, c).stress();
}

inline VectorField momentum_residual(const FlowState& s, const MediumClosure& c, const MetricField& g) {
  return MotionSystem(g, s, c).momentum();
}

inline ScalarField energy_residual(const FlowState& s, const MediumClosure& c, const MetricField& g) {
  return MotionSystem(g, s, c).energy();
}

inline ScalarField kinetic_balance_residual(const FlowState& s, const MediumClosure& c, const MetricField& g) {
  return MotionSystem(g, s, c).kinetic_balance();
}

inline ScalarField total_energy(const FlowState& s, const MediumClosure& c, const MetricField& g) {
  return MotionSystem(g, s, c).total_energy();
}

inline VectorField total_flux(const FlowState& s, const MediumClosure& c, const MetricField& g) {
  return MotionSystem(g, s, c).total_flux();
}

// ---------------------------------------------------------------------------
// Pointwise reports

struct ResidualSample {
  Bindings point;
  double r_mass = 0.0;
  Eigen::VectorXd r_momentum;
  double r_energy = 0.0;
};

struct ResidualReport {
  std::vector<ResidualSample> samples;
  double max_mass = 0.0;
  double max_momentum = 0.0;
  double max_energy = 0.0;
};

inline ResidualReport evaluate_residuals(const MotionSystem& sys, const std::vector<Bindings>& probes) {
  const Expr mass = sys.continuity().f;
  const ExprVector mom = sys.momentum().c;
  const Expr energy = sys.energy().f;
  ResidualReport rep;
  for (const auto& p : probes) {
    ResidualSample s{p, eval(mass, p), evaluate(mom, p), eval(energy, p)};
    if (!std::isfinite(s.r_mass) || !s.r_momentum.allFinite() || !std::isfinite(s.r_energy)) {
      throw EvalError(EvalError::Kind::domain_fault, "non-finite residual at a probe point");
    }
    rep.max_mass = std::max(rep.max_mass, std::fabs(s.r_mass));
    rep.max_momentum = std::max(rep.max_momentum, s.r_momentum.cwiseAbs().maxCoeff());
    rep.max_energy = std::max(rep.max_energy, std::fabs(s.r_energy));
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

/// Largest |kappa - kappa*| over the probes; the conductivity of a physical
/// medium is g-self-adjoint.
inline double conductivity_asymmetry(const MotionSystem& sys, const std::vector<Bindings>& probes) {
  const ExprMatrix& k = sys.closure().conductivity;
  if (k.dim() == 0) return 0.0;
  const ExprMatrix adj = sys.metric().inverse() * transpose(k) * sys.metric().matrix();
  double worst = 0.0;
  for (const auto& p : probes) {
    worst = std::max(worst, (evaluate(k, p) - evaluate(adj, p)).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Explicit simulator

/// Cell-centred periodic grid on a box; n = cells.size() in {1, 2}.
struct PeriodicGrid {
  std::vector<std::size_t> cells;
  std::vector<Interval> extent;

  std::size_t dim() const { return cells.size(); }
  std::size_t size() const {
    std::size_t s = 1;
    for (auto c : cells) s *= c;
    return s;
  }
  double spacing(std::size_t d) const { return (extent[d].hi - extent[d].lo) / static_cast<double>(cells[d]); }
  double cell_volume() const {
    double v = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) v *= spacing(d);
    return v;
  }
};

struct SimulationSetup {
  Chart chart;  // flat chart; the time variable, if any, is bound to the current time
  PeriodicGrid grid;
  Expr rho0;
  ExprVector X0;
  Expr T0;
  MediumClosure closure;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t snapshot_every = 0;  // 0 disables snapshots
};

struct Diagnostics {
  std::size_t step = 0;
  double time = 0.0;
  double total_mass = 0.0;
  double total_energy = 0.0;
};

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  std::vector<double> rho;
  std::vector<std::vector<double>> X;  // X[d][cell]
  std::vector<double> T;
};

struct SimulationResult {
  std::vector<Diagnostics> series;
  std::vector<Snapshot> snapshots;
  Snapshot final_state;
};

namespace detail {

class ExplicitSolver {
 public:
  explicit ExplicitSolver(const SimulationSetup& s) : s_(s), eqs_(s.closure.potential) {
    const std::size_t n = s.grid.dim();
    if (n != 1 && n != 2) throw SimulationError("simulator supports 1 or 2 dimensions", 0);
    if (s.chart.dim() != n || s.grid.extent.size() != n) throw SimulationError("grid and chart dimensions differ", 0);
    if (s.X0.size() != n) throw SimulationError("initial velocity has wrong dimension", 0);
    if (s.closure.potential.dim() != n) throw SimulationError("potential dimension does not match the grid", 0);
    for (auto c : s.grid.cells)
      if (c < 3) throw SimulationError("each grid direction needs at least 3 cells", 0);
    if (!(s.dt > 0.0)) throw SimulationError("time step must be positive", 0);

    slots_ = s.chart.space_vars();
    slots_.insert(slots_.begin(), s.chart.time_var().value_or("__t"));
    const std::size_t N = s.grid.size();
    centres_.assign(N, std::vector<double>(n));
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t d = 0; d < n; ++d)
        centres_[c][d] = s.grid.extent[d].lo + (static_cast<double>(coord(c, d)) + 0.5) * s.grid.spacing(d);

    rho_ = sample(s.rho0, 0.0);
    T_ = sample(s.T0, 0.0);
    vel_.resize(n);
    mom_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      vel_[d] = sample(s.X0[d], 0.0);
      mom_[d].resize(N);
      for (std::size_t c = 0; c < N; ++c) mom_[d][c] = rho_[c] * vel_[d][c];
    }
    delta_.assign(N, Eigen::MatrixXd::Zero(n, n));
    compute_deformation();
    e_.resize(N);
    for (std::size_t c = 0; c < N; ++c) e_[c] = eqs_.at(rho_[c], T_[c], delta_[c], identity()).e;
  }

  SimulationResult run() {
    SimulationResult out;
    record(0, 0.0, out);
    for (std::size_t step = 1; step <= s_.steps; ++step) {
      const double t = static_cast<double>(step - 1) * s_.dt;
      advance(t, step);
      record(step, static_cast<double>(step) * s_.dt, out);
    }
    out.final_state = snapshot(s_.steps, static_cast<double>(s_.steps) * s_.dt);
    return out;
  }

 private:
  std::size_t coord(std::size_t cell, std::size_t d) const {
    return d == 0 ? cell % s_.grid.cells[0] : cell / s_.grid.cells[0];
  }

  std::size_t shift(std::size_t cell, std::size_t d, int by) const {
    const std::size_t nx = s_.grid.cells[0];
    const std::size_t m = s_.grid.cells[d];
    std::size_t i = coord(cell, d);
    std::size_t j = by > 0 ? (i + 1) % m : (i + m - 1) % m;
    return d == 0 ? cell - i + j : (cell % nx) + j * nx;
  }

  /// Centred difference of a cell array along direction d.
  double ddx(const std::vector<double>& f, std::size_t cell, std::size_t d) const {
    return (f[shift(cell, d, 1)] - f[shift(cell, d, -1)]) / (2.0 * s_.grid.spacing(d));
  }

  Eigen::MatrixXd identity() const {
    const auto n = static_cast<Eigen::Index>(s_.grid.dim());
    return Eigen::MatrixXd::Identity(n, n);
  }

  std::vector<double> sample(const Expr& e, double t) const {
    CompiledExpr ce(e, slots_);
    std::vector<double> out(centres_.size());
    std::vector<double> in(slots_.size());
    in[0] = t;
    for (std::size_t c = 0; c < centres_.size(); ++c) {
      for (std::size_t d = 0; d < centres_[c].size(); ++d) in[d + 1] = centres_[c][d];
      out[c] = ce(in);
    }
    return out;
  }

  void compute_deformation() {
    const std::size_t n = s_.grid.dim();
    for (std::size_t c = 0; c < centres_.size(); ++c)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) delta_[c](i, j) = ddx(vel_[i], c, j);
  }

  /// Temperature with e(rho, T, Delta) = e_target by damped Newton iteration
  /// from the previous value. A step is accepted only if it reduces the
  /// mismatch. If e does not depend on T, the temperature is kept.
  double recover_temperature(std::size_t c, double T0, double e_target) const {
    auto energy = [&](double T) { return eqs_.at(rho_[c], T, delta_[c], identity()).e; };
    const double scale = 1.0 + std::fabs(e_target);
    double T = T0;
    double f = energy(T) - e_target;
    for (int it = 0; it < 50 && std::fabs(f) > 1e-14 * scale; ++it) {
      const double h = 1e-6 * T;
      const double slope = (energy(T + h) - energy(T - h)) / (2.0 * h);
      if (!(std::fabs(slope) * T > 1e-9 * scale)) return T;
      double step = -f / slope;
      bool improved = false;
      for (int half = 0; half < 30; ++half, step *= 0.5) {
        const double next = T + step;
        if (!(next > 0.0)) continue;
        const double fn = energy(next) - e_target;
        if (std::fabs(fn) < std::fabs(f)) {
          T = next;
          f = fn;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    return T;
  }

  void advance(double t, std::size_t step) {
    const std::size_t n = s_.grid.dim();
    const std::size_t N = centres_.size();
    const Eigen::MatrixXd I = identity();

    std::vector<Eigen::MatrixXd> sigma(N);
    for (std::size_t c = 0; c < N; ++c) sigma[c] = eqs_.at(rho_[c], T_[c], delta_[c], I).sigma;

    const std::vector<double> S = sample(s_.closure.source, t);
    std::vector<std::vector<double>> F(n);
    for (std::size_t d = 0; d < n; ++d) {
      F[d] = s_.closure.force.empty() ? std::vector<double>(N, 0.0) : sample(s_.closure.force[d], t);
    }

    // Heat flux J_q = -kappa grad T.
    std::vector<std::vector<double>> q(n, std::vector<double>(N, 0.0));
    if (s_.closure.conductivity.dim() != 0) {
      std::vector<std::vector<double>> kappa(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) kappa[i * n + k] = sample(s_.closure.conductivity(i, k), t);
      for (std::size_t c = 0; c < N; ++c)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < n; ++k) q[i][c] -= kappa[i * n + k][c] * ddx(T_, c, k);
    }

    // Fluxes: mass rho X_i, momentum rho X_i X_k - sigma[i][k], energy e X_i + q_i.
    std::vector<std::vector<double>> mass_flux(n, std::vector<double>(N));
    std::vector<std::vector<double>> energy_flux(n, std::vector<double>(N));
    std::vector<std::vector<double>> mom_flux(n * n, std::vector<double>(N));
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t i = 0; i < n; ++i) {
        mass_flux[i][c] = rho_[c] * vel_[i][c];
        energy_flux[i][c] = e_[c] * vel_[i][c] + q[i][c];
        for (std::size_t k = 0; k < n; ++k) {
          mom_flux[i * n + k][c] = rho_[c] * vel_[i][c] * vel_[k][c] - sigma[c](i, k);
        }
      }

    std::vector<double> rho_next(N);
    std::vector<double> e_next(N);
    std::vector<std::vector<double>> mom_next(n, std::vector<double>(N));
    for (std::size_t c = 0; c < N; ++c) {
      double div_mass = 0.0;
      double div_energy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        div_mass += ddx(mass_flux[i], c, i);
        div_energy += ddx(energy_flux[i], c, i);
      }
      const double work = (sigma[c] * delta_[c]).trace();
      rho_next[c] = rho_[c] + s_.dt * (S[c] - div_mass);
      e_next[c] = e_[c] + s_.dt * (work - div_energy);
      for (std::size_t k = 0; k < n; ++k) {
        double div_mom = 0.0;
        for (std::size_t i = 0; i < n; ++i) div_mom += ddx(mom_flux[i * n + k], c, i);
        mom_next[k][c] = mom_[k][c] + s_.dt * (F[k][c] + S[c] * vel_[k][c] - div_mom);
      }
    }

    for (std::size_t c = 0; c < N; ++c) {
      bool ok = std::isfinite(rho_next[c]) && std::isfinite(e_next[c]);
      for (std::size_t k = 0; k < n; ++k) ok = ok && std::isfinite(mom_next[k][c]);
      if (!ok) throw SimulationError("non-finite value in cell " + std::to_string(c), step);
      if (!(rho_next[c] > 0.0)) throw SimulationError("density became non-positive in cell " + std::to_string(c), step);
    }

    rho_ = std::move(rho_next);
    e_ = std::move(e_next);
    mom_ = std::move(mom_next);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < N; ++c) vel_[k][c] = mom_[k][c] / rho_[c];
    compute_deformation();
    for (std::size_t c = 0; c < N; ++c) {
      T_[c] = recover_temperature(c, T_[c], e_[c]);
      if (!std::isfinite(T_[c])) throw SimulationError("temperature recovery failed in cell " + std::to_string(c), step);
    }
  }

  Snapshot snapshot(std::size_t step, double time) const { return {step, time, rho_, vel_, T_}; }

  void record(std::size_t step, double time, SimulationResult& out) const {
    const double dv = s_.grid.cell_volume();
    Diagnostics d{step, time, 0.0, 0.0};
    for (std::size_t c = 0; c < centres_.size(); ++c) {
      double sq = 0.0;
      for (const auto& v : vel_) sq += v[c] * v[c];
      d.total_mass += rho_[c] * dv;
      d.total_energy += (0.5 * rho_[c] * sq + e_[c]) * dv;
    }
    out.series.push_back(d);
    if (s_.snapshot_every != 0 && step % s_.snapshot_every == 0) out.snapshots.push_back(snapshot(step, time));
  }

  const SimulationSetup& s_;
  MovingStateEquations eqs_;
  std::vector<std::string> slots_;
  std::vector<std::vector<double>> centres_;
  std::vector<double> rho_;
  std::vector<double> T_;
  std::vector<double> e_;
  std::vector<std::vector<double>> vel_;
  std::vector<std::vector<double>> mom_;
  std::vector<Eigen::MatrixXd> delta_;
};

}  // namespace detail

/// Forward Euler in time, centred differences in space, for (rho, rho X, e)
/// on a flat periodic grid. Mass and momentum are advanced in conservative
/// form, so discrete total mass is preserved when S = 0.
inline SimulationResult simulate_explicit(const SimulationSetup& setup) {
  return detail::ExplicitSolver(setup).run();
}

}  // namespace riemedia
