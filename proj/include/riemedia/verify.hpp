#pragma once

// Property suite run by `riemedia verify`. Every check evaluates an identity
// at seeded probe points and reports the worst deviation against its
// tolerance; the report text depends only on the scenario and the seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riemedia/chart.hpp"
#include "riemedia/csv.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/geometry.hpp"
#include "riemedia/motion.hpp"
#include "riemedia/parser.hpp"
#include "riemedia/random_expr.hpp"
#include "riemedia/rng.hpp"
#include "riemedia/scenario.hpp"
#include "riemedia/thermo.hpp"

namespace riemedia {

enum class CheckStatus { pass, fail, warn };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double worst = 0.0;
  double tol = 0.0;
  std::string note;
};

class VerifyReport {
 public:
  void add(CheckResult r) { checks_.push_back(std::move(r)); }

  const std::vector<CheckResult>& checks() const noexcept { return checks_; }

  bool all_pass() const {
    return std::none_of(checks_.begin(), checks_.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }

  std::string text() const {
    std::ostringstream os;
    for (const auto& c : checks_) {
      os << (c.status == CheckStatus::pass ? "PASS" : c.status == CheckStatus::fail ? "FAIL" : "WARN") << ' '
         << c.name << " worst=" << format_sci(c.worst) << " tol=" << format_sci(c.tol, 0);
      if (!c.note.empty()) os << " (" << c.note << ')';
      os << '\n';
    }
    std::size_t failed = std::count_if(checks_.begin(), checks_.end(),
                                       [](const auto& c) { return c.status == CheckStatus::fail; });
    os << (failed == 0 ? "OK" : "FAILED") << ' ' << checks_.size() - failed << '/' << checks_.size() << '\n';
    return os.str();
  }

 private:
  std::vector<CheckResult> checks_;
};

/// |a - b| / max(1, |b|)
inline double scaled_error(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

namespace detail {

/// Runs `body`, which returns the worst deviation; exceptions become failures.
inline void run_check(VerifyReport& rep, const std::string& name, double tol, const std::function<double()>& body) {
  CheckResult r{name, CheckStatus::pass, 0.0, tol, {}};
  try {
    r.worst = body();
    if (!(r.worst <= tol)) r.status = CheckStatus::fail;
  } catch (const std::exception& e) {
    r.status = CheckStatus::fail;
    r.worst = std::numeric_limits<double>::infinity();
    r.note = e.what();
  }
  rep.add(std::move(r));
}

/// Smooth test vector and covector fields in the spatial coordinates.
inline ExprVector test_vector(const Chart& chart) {
  const std::size_t n = chart.dim();
  ExprVector out;
  for (std::size_t i = 0; i < n; ++i) {
    Expr a = var(chart.space_var(i));
    Expr b = var(chart.space_var((i + 1) % n));
    out.push_back(sin(b) + Expr(0.5) * a * b + Expr(0.25 * static_cast<double>(i + 1)));
  }
  return out;
}

inline ExprVector test_covector(const Chart& chart) {
  const std::size_t n = chart.dim();
  ExprVector out;
  for (std::size_t k = 0; k < n; ++k) {
    Expr a = var(chart.space_var(k));
    Expr b = var(chart.space_var((k + 1) % n));
    out.push_back(cos(a) + Expr(0.25) * b * b - Expr(0.5));
  }
  return out;
}

inline double central_difference(const Expr& e, Bindings b, const std::string& v) {
  const double x = b.at(v);
  const double h = 1e-6 * std::max(1.0, std::fabs(x));
  b[v] = x + h;
  const double fp = eval(e, b);
  b[v] = x - h;
  const double fm = eval(e, b);
  return (fp - fm) / (2.0 * h);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Random g-orthogonal matrix: Q = L^{-T} O L^T with g = L L^T, O orthogonal.
inline Eigen::MatrixXd random_g_orthogonal(const Eigen::MatrixXd& g, SplitMix64& rng) {
  const auto n = g.rows();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd o = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(g).matrixL();
  return l.transpose().inverse() * o * l.transpose();
}

inline Eigen::MatrixXd random_matrix(std::size_t n, std::pair<double, double> range, SplitMix64& rng) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(range.first, range.second);
  return m;
}

inline void verify_expressions(const Scenario& sc, const std::vector<Bindings>& probes, VerifyReport& rep) {
  std::vector<Expr> exprs;
  if (sc.metric)
    for (std::size_t i = 0; i < sc.chart.dim(); ++i)
      for (std::size_t j = i; j < sc.chart.dim(); ++j) exprs.push_back(sc.metric->matrix()(i, j));
  if (sc.fields) {
    exprs.push_back(sc.fields->rho);
    exprs.push_back(sc.fields->T);
    for (const auto& x : sc.fields->X) exprs.push_back(x);
  }

  const std::vector<std::string> vars = sc.has_chart ? sc.chart.all_vars() : std::vector<std::string>{"x", "y"};
  RandomExprGenerator gen(vars, sc.seed);
  std::vector<Expr> random;
  for (int k = 0; k < 100; ++k) random.push_back(gen(4));

  // Random bindings in [-2, 2] for the random trees.
  SplitMix64 rng(sc.seed ^ 0x5eedULL);
  std::vector<Bindings> random_points;
  for (int k = 0; k < 10; ++k) {
    Bindings b;
    for (const auto& v : vars) b[v] = rng.uniform(-2.0, 2.0);
    random_points.push_back(std::move(b));
  }

  run_check(rep, "expr.print_roundtrip", 0.0, [&] {
    double worst = 0.0;
    auto check = [&](const Expr& e, const std::vector<Bindings>& pts) {
      Expr back = parse(to_string(e));
      for (const auto& p : pts) worst = std::max(worst, std::fabs(eval(back, p) - eval(e, p)));
    };
    for (const auto& e : exprs) check(e, probes);
    for (const auto& e : random) check(e, random_points);
    return worst;
  });

  run_check(rep, "expr.simplify_equivalence", 1e-12, [&] {
    double worst = 0.0;
    for (const auto& e : random) {
      Expr s = simplify(e);
      for (const auto& p : random_points) worst = std::max(worst, scaled_error(eval(s, p), eval(e, p)));
    }
    return worst;
  });

  run_check(rep, "expr.derivative_vs_fd", 1e-6, [&] {
    double worst = 0.0;
    auto check = [&](const Expr& e, const std::vector<Bindings>& pts) {
      for (const auto& v : vars) {
        Expr d = differentiate(e, v);
        for (const auto& p : pts) {
          double fd = central_difference(e, p, v);
          worst = std::max(worst, std::fabs(eval(d, p) - fd) / (1.0 + std::fabs(fd)));
        }
      }
    };
    for (const auto& e : exprs) check(e, probes);
    for (const auto& e : random) check(e, random_points);
    return worst;
  });
}

inline void verify_geometry(const Scenario& sc, const std::vector<Bindings>& probes, VerifyReport& rep) {
  const MetricField g = sc.metric_or_euclidean();
  const Chart& chart = sc.chart;
  const std::size_t n = chart.dim();
  const auto& x = chart.space_vars();

  run_check(rep, "geometry.metric_positive_definite", 0.0, [&] {
    for (const auto& p : probes) check_positive_definite(g, p);
    return 0.0;
  });

  run_check(rep, "geometry.inverse_metric", 1e-10, [&] {
    double worst = 0.0;
    const ExprMatrix prod = g.matrix() * g.inverse();
    for (const auto& p : probes) {
      worst = std::max(worst, max_abs(evaluate(prod, p) - Eigen::MatrixXd::Identity(n, n)));
    }
    return worst;
  });

  const ChristoffelField gamma = christoffel(g);

  run_check(rep, "geometry.torsion_free", 1e-12, [&] {
    double worst = 0.0;
    for (const auto& p : probes)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::fabs(eval(gamma(k, i, j), p) - eval(gamma(k, j, i), p)));
    return worst;
  });

  run_check(rep, "geometry.metric_compatible", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& p : probes) {
      Eigen::MatrixXd gv = evaluate(g.matrix(), p);
      for (std::size_t k = 0; k < n; ++k) {
        Eigen::MatrixXd G(n, n);
        for (std::size_t l = 0; l < n; ++l)
          for (std::size_t i = 0; i < n; ++i) G(l, i) = eval(gamma(l, k, i), p);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            double s = eval(differentiate(g(i, j), x[k]), p);
            for (std::size_t l = 0; l < n; ++l) s -= G(l, i) * gv(l, j) + G(l, j) * gv(i, l);
            worst = std::max(worst, std::fabs(s));
          }
      }
    }
    return worst;
  });

  const VectorField X = make_vector(chart, sc.fields ? sc.fields->X : test_vector(chart));
  const CovectorField w = make_covector(chart, test_covector(chart));
  const MixedTensorField dX = covariant_differential(X, gamma);
  const ScalarField divX = divergence(X, gamma);

  run_check(rep, "geometry.trace_identity", 1e-12, [&] {
    double worst = 0.0;
    const Expr tr = trace(dX.a);
    for (const auto& p : probes) worst = std::max(worst, std::fabs(eval(tr, p) - eval(divX.f, p)));
    return worst;
  });

  run_check(rep, "geometry.volume_form", 1e-10, [&] {
    const Expr vol = volume_density(g).f;
    Expr coord_div(0.0);
    for (std::size_t i = 0; i < n; ++i) coord_div += differentiate(vol * X.c[i], x[i]);
    double worst = 0.0;
    for (const auto& p : probes) {
      double v = eval(vol, p);
      if (!(v > 0.0)) throw GeometryError("volume density is not positive at a probe point");
      worst = std::max(worst, scaled_error(eval(divX.f, p) * v, eval(coord_div, p)));
    }
    return worst;
  });

  run_check(rep, "geometry.leibniz_tensor_divergence", 1e-10, [&] {
    const CovectorField lhs = divergence(tensor_product(X, w), gamma);
    const CovectorField nab = covariant_derivative(w, X, gamma);
    double worst = 0.0;
    for (const auto& p : probes) {
      const double d = eval(divX.f, p);
      for (std::size_t k = 0; k < n; ++k) {
        double rhs = d * eval(w.c[k], p) + eval(nab.c[k], p);
        worst = std::max(worst, scaled_error(eval(lhs.c[k], p), rhs));
      }
    }
    return worst;
  });

  run_check(rep, "geometry.sharp_flat_roundtrip", 1e-12, [&] {
    const VectorField back = sharp(flat(X, g), g);
    const CovectorField wback = flat(sharp(w, g), g);
    double worst = 0.0;
    for (const auto& p : probes)
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, scaled_error(eval(back.c[i], p), eval(X.c[i], p)));
        worst = std::max(worst, scaled_error(eval(wback.c[i], p), eval(w.c[i], p)));
      }
    return worst;
  });

  run_check(rep, "geometry.adjoint_pairing", 1e-12, [&] {
    SplitMix64 rng(sc.seed ^ 0xad101e7ULL);
    const MixedTensorField adj = g_adjoint(dX, g);
    double worst = 0.0;
    for (const auto& p : probes) {
      Eigen::MatrixXd A = evaluate(dX, p);
      Eigen::MatrixXd As = evaluate(adj, p);
      Eigen::MatrixXd gv = evaluate(g.matrix(), p);
      Eigen::VectorXd u(n);
      Eigen::VectorXd v(n);
      for (std::size_t i = 0; i < n; ++i) {
        u(i) = rng.uniform(-1.0, 1.0);
        v(i) = rng.uniform(-1.0, 1.0);
      }
      double lhs = (As * u).dot(gv * v);
      double rhs = u.dot(gv * (A * v));
      worst = std::max(worst, scaled_error(lhs, rhs));
    }
    return worst;
  });
}

inline void verify_closure(const Scenario& sc, const std::vector<Bindings>& probes, VerifyReport& rep) {
  const ClosureSpec& spec = *sc.closure;
  const std::size_t n = sc.chart.dim();
  const ThermoSpec ts = sc.thermo.value_or(ThermoSpec{});
  const MovingStateEquations eqs(spec.closure.potential);
  const MetricField g = sc.metric_or_euclidean();
  const Eigen::MatrixXd euclid = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd g_probe = probes.empty() ? euclid : evaluate(g.matrix(), probes.front());
  const std::pair<double, double> T_draw{std::max(ts.T_range.first, 1e-3), ts.T_range.second};

  struct Draw {
    double rho;
    double T;
    Eigen::MatrixXd delta;
  };
  SplitMix64 rng(sc.seed ^ 0x7e1701ULL);
  std::vector<Draw> draws;
  for (std::size_t k = 0; k < ts.samples; ++k) {
    double rho = rng.uniform(ts.rho_range.first, ts.rho_range.second);
    double T = rng.uniform(T_draw.first, T_draw.second);
    draws.push_back({rho, T, random_matrix(n, ts.delta_range, rng)});
  }

  run_check(rep, "thermo.euler_relation", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& d : draws) {
      worst = std::max(worst, euler_residual(eqs, eqs.at(d.rho, d.T, d.delta, euclid), euclid));
      worst = std::max(worst, euler_residual(eqs, eqs.at(d.rho, d.T, d.delta, g_probe), g_probe));
    }
    return worst;
  });

  run_check(rep, "thermo.chi_prime_vs_fd", 1e-5, [&] {
    const ChiPrimeForm form(spec.closure.potential, euclid);
    double worst = 0.0;
    const std::size_t m = form.coords().size();
    for (std::size_t k = 0; k < std::min<std::size_t>(20, draws.size()); ++k) {
      const auto& d = draws[k];
      QuadFormSample q = form.at(d.rho, d.T, d.delta);
      std::vector<double> c{1.0 / d.T, d.rho};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c.push_back(d.delta(i, j));
      auto phi = [&](const std::vector<double>& y) {
        Eigen::MatrixXd dl(n, n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) dl(i, j) = y[2 + i * n + j];
        return eqs.potential_value(y[1], 1.0 / y[0], dl, euclid);
      };
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
          if ((a == 0) != (b == 0)) continue;
          const double ha = 1e-4 * std::max(1.0, std::fabs(c[a]));
          const double hb = 1e-4 * std::max(1.0, std::fabs(c[b]));
          auto at = [&](double sa, double sb) {
            std::vector<double> y = c;
            y[a] += sa * ha;
            y[b] += sb * hb;
            return phi(y);
          };
          double fd = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * ha * hb);
          if (a == 0) fd = -fd;
          worst = std::max(worst, scaled_error(q.matrix(a, b), fd));
        }
    }
    return worst;
  });

  if (spec.newtonian) {
    const NewtonianCoefficients c = *spec.newtonian;
    run_check(rep, "thermo.newtonian_stress_chain_rule", 1e-10, [&] {
      double worst = 0.0;
      for (const auto& d : draws) {
        for (const Eigen::MatrixXd& gm : {euclid, g_probe}) {
          Eigen::MatrixXd direct = newtonian_stress(c, d.delta, gm, d.rho, d.T);
          Eigen::MatrixXd chain = eqs.at(d.rho, d.T, d.delta, gm).sigma;
          worst = std::max(worst, max_abs(direct - chain) / std::max(1.0, max_abs(direct)));
        }
      }
      return worst;
    });
  }

  if (spec.still && spec.pressure_matched) {
    run_check(rep, "thermo.still_limit", 1e-12, [&] {
      double worst = 0.0;
      const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
      for (const auto& d : draws) {
        double phi = eqs.potential_value(d.rho, d.T, zero, euclid);
        double psi = eval(spec.still->expr(), {{kRho, d.rho}, {kTemperature, d.T}});
        worst = std::max(worst, scaled_error(phi, d.rho * psi));
      }
      return worst;
    });
  }

  run_check(rep, "thermo.artin_procesi_invariance", 1e-9, [&] {
    const std::vector<TraceWord> words{kWordP1, kWordP2, kWordP11, TraceWord{{{2, 1}}}, TraceWord{{{1, 2}, {1, 0}}}};
    SplitMix64 qrng(sc.seed ^ 0x0a7715ULL);
    double worst = 0.0;
    for (const Eigen::MatrixXd& gm : {euclid, g_probe}) {
      for (int k = 0; k < 20; ++k) {
        Eigen::MatrixXd A = random_matrix(n, {-1.0, 1.0}, qrng);
        Eigen::MatrixXd Q = random_g_orthogonal(gm, qrng);
        Eigen::MatrixXd B = Q.inverse() * A * Q;
        for (const auto& w : words) {
          worst = std::max(worst, scaled_error(artin_procesi(B, gm, w), artin_procesi(A, gm, w)));
        }
      }
    }
    return worst;
  });
}

inline void verify_thermo_model(const Scenario& sc, VerifyReport& rep) {
  const ThermoSpec& t = *sc.thermo;
  SplitMix64 rng(sc.seed ^ 0x9a5ULL);
  if (*t.model == GasModel::ideal) {
    run_check(rep, "thermo.ideal_gas_kappa", 1e-15, [&] {
      double worst = 0.0;
      for (std::size_t k = 0; k < t.samples; ++k) {
        const double T = rng.uniform(t.T_range.first, t.T_range.second);
        const double v = rng.uniform(t.v_range.first, t.v_range.second);
        QuadFormSample q = ideal_gas_kappa(T, v, t.R, t.n);
        if (q.classification != PhaseClass::applicable) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, scaled_error(q.matrix(0, 0), -t.R * t.n / (2.0 * T * T)));
        worst = std::max(worst, scaled_error(q.matrix(1, 1), -t.R / (v * v)));
        worst = std::max(worst, std::fabs(q.matrix(0, 1)) + std::fabs(q.matrix(1, 0)));
      }
      return worst;
    });
    return;
  }

  const double v_lo = std::max(t.v_range.first, 1.0 / 3.0 + 1e-3);
  run_check(rep, "thermo.vdw_coexistence_singular", 1e-9, [&] {
    double worst = 0.0;
    for (auto [v, T] : vdw_coexistence_curve(v_lo, t.v_range.second, t.curve_samples)) {
      QuadFormSample q = vdw_kappa(T, v, t.R, t.n);
      if (q.classification != PhaseClass::singular) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::fabs(q.matrix(1, 1)));
    }
    return worst;
  });

  run_check(rep, "thermo.vdw_critical_point", 1e-8, [&] {
    auto [v, T] = vdw_critical_point();
    return std::max(std::fabs(v - 1.0), std::fabs(T - 1.0));
  });

  run_check(rep, "thermo.vdw_classification_sides", 0.0, [&] {
    double wrong = 0.0;
    for (std::size_t k = 0; k < t.samples; ++k) {
      const double v = rng.uniform(v_lo, t.v_range.second);
      const double T = rng.uniform(t.T_range.first, t.T_range.second);
      const double threshold = vdw_coexistence_temperature(v);
      if (std::fabs(T - threshold) < 1e-6) continue;
      PhaseClass expect = T > threshold ? PhaseClass::applicable : PhaseClass::non_applicable;
      if (vdw_kappa(T, v, t.R, t.n).classification != expect) wrong += 1.0;
    }
    return wrong;
  });
}

inline void verify_motion(const Scenario& sc, const std::vector<Bindings>& probes, VerifyReport& rep) {
  const MetricField g = sc.metric_or_euclidean();
  const MediumClosure& closure = sc.closure->closure;
  const std::size_t n = sc.chart.dim();
  std::optional<MotionSystem> sys;
  run_check(rep, "motion.assemble", 0.0, [&] {
    sys.emplace(g, *sc.fields, closure);
    return 0.0;
  });
  if (!sys) return;

  ResidualReport residuals;
  run_check(rep, "motion.residuals_finite", 0.0, [&] {
    residuals = evaluate_residuals(*sys, probes);
    return 0.0;
  });
  if (sc.residual_tol) {
    run_check(rep, "motion.residuals_vanish", *sc.residual_tol, [&] {
      return std::max({residuals.max_mass, residuals.max_momentum, residuals.max_energy});
    });
  }

  const VectorField X = sys->state().velocity();
  const ExprVector F = sys->closure().force;
  const ExprVector r_mom = sys->momentum().c;
  const Expr r_mass = sys->continuity().f;
  const Expr r_energy = sys->energy().f;

  run_check(rep, "motion.kinetic_identity", 1e-9, [&] {
    const Expr kin = sys->kinetic_balance().f;
    ExprVector mf(n);
    for (std::size_t i = 0; i < n; ++i) mf[i] = r_mom[i] + F[i];
    const Expr expect = inner({sc.chart, mf}, X, g).f;
    double worst = 0.0;
    for (const auto& p : probes) worst = std::max(worst, scaled_error(eval(kin, p), eval(expect, p)));
    return worst;
  });

  run_check(rep, "motion.energy_conservation_identity", 1e-8, [&] {
    const Expr lhs = sys->energy_conservation().f;
    ExprVector mf(n);
    for (std::size_t i = 0; i < n; ++i) mf[i] = r_mom[i] + F[i];
    const Expr half_sq = Expr(0.5) * inner(X, X, g).f;
    const Expr rhs = half_sq * (r_mass + closure.source) + inner({sc.chart, mf}, X, g).f + r_energy;
    double worst = 0.0;
    for (const auto& p : probes) worst = std::max(worst, scaled_error(eval(lhs, p), eval(rhs, p)));
    return worst;
  });

  run_check(rep, "motion.source_superposition", 1e-12, [&] {
    MediumClosure shifted = sys->closure();
    const ExprVector dF = test_vector(sc.chart);
    const Expr dS = cos(var(sc.chart.space_var(0)));
    for (std::size_t i = 0; i < n; ++i) shifted.force[i] = shifted.force[i] + dF[i];
    shifted.source = shifted.source + dS;
    MotionSystem other(g, *sc.fields, shifted);
    const ExprVector r_mom2 = other.momentum().c;
    const Expr r_mass2 = other.continuity().f;
    double worst = 0.0;
    for (const auto& p : probes) {
      worst = std::max(worst, scaled_error(eval(r_mass2, p) - eval(r_mass, p), -eval(dS, p)));
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, scaled_error(eval(r_mom2[i], p) - eval(r_mom[i], p), -eval(dF[i], p)));
      }
    }
    return worst;
  });

  if (closure.conductivity.dim() != 0) {
    CheckResult r{"motion.conductivity_self_adjoint", CheckStatus::pass, 0.0, 1e-12, {}};
    r.worst = conductivity_asymmetry(*sys, probes);
    if (!(r.worst <= r.tol)) {
      r.status = CheckStatus::warn;
      r.note = "conductivity is not g-self-adjoint";
    }
    rep.add(r);
  }
}

inline void verify_simulation(const Scenario& sc, VerifyReport& rep) {
  SimulationResult res;
  bool ran = false;
  run_check(rep, "simulate.run", 0.0, [&] {
    res = simulate_explicit(simulation_setup(sc));
    ran = true;
    return 0.0;
  });
  if (!ran) return;
  const Expr& S = sc.closure->closure.source;
  if (S.is_constant(0.0)) {
    run_check(rep, "simulate.mass_conservation", 1e-10, [&] {
      const double m0 = res.series.front().total_mass;
      double worst = 0.0;
      for (const auto& d : res.series) worst = std::max(worst, scaled_error(d.total_mass, m0));
      return worst;
    });
  }
}

}  // namespace detail

/// Runs every check that the scenario's sections make applicable.
inline VerifyReport verify_scenario(const Scenario& sc) {
  VerifyReport rep;
  std::vector<Bindings> probes;
  if (sc.has_chart) probes = sample_probes(sc.chart, sc.probes, sc.seed);
  detail::verify_expressions(sc, probes, rep);
  if (sc.has_chart) detail::verify_geometry(sc, probes, rep);
  if (sc.closure) detail::verify_closure(sc, probes, rep);
  if (sc.thermo && sc.thermo->model) detail::verify_thermo_model(sc, rep);
  if (sc.fields && sc.closure && sc.chart.has_time()) detail::verify_motion(sc, probes, rep);
  if (sc.simulate) detail::verify_simulation(sc, rep);
  return rep;
}

}  // namespace riemedia
