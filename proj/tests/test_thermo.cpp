#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "riemedia/parser.hpp"
#include "riemedia/rng.hpp"
#include "riemedia/thermo.hpp"

using namespace riemedia;

namespace {

Eigen::MatrixXd random_matrix(std::size_t n, SplitMix64& rng, double range = 1.0) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(-range, range);
  return m;
}

Eigen::MatrixXd random_spd(std::size_t n, SplitMix64& rng) {
  Eigen::MatrixXd a = random_matrix(n, rng);
  return a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
}

// Potential evaluated with invariants computed by plain matrix arithmetic.
double phi_numeric(const Expr& phi, double rho, double T, const Eigen::MatrixXd& d, const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd adj = g.inverse() * d.transpose() * g;
  Bindings b{{"rho", rho}, {"T", T}, {"P1", d.trace()}, {"P2", (d * d).trace()}, {"P11", (d * adj).trace()}};
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      b["D_" + std::to_string(i + 1) + std::to_string(j + 1)] = d(i, j);
  return eval(phi, b);
}

struct TestPotential {
  std::size_t n;
  std::string src;
};

std::vector<TestPotential> test_potentials() {
  return {
      {2, "-(1/T)*(0.5*(0.7*P2 + 0.3*P11 + 0.2*P1^2) - 1.5*rho*T*P1 + rho*T*log(rho))"},
      {2, "rho*1.5*log(T) - rho*log(rho) - (D_11^2 + D_22^2 + D_12*D_21)/T"},
      {3, "rho*(2*log(T) - log(rho)) - (P11 + sin(P1))/(1 + T^2)"},
      {1, "rho*log(T) - rho^2/T - D_11^2*rho/T"},
      {2, "-(exp(-T)*P2 + rho^2*P11)/T + log(T)*rho + D_12*D_21*rho"},
  };
}

}  // namespace

// ---------------------------------------------------------------------------
// Still media

TEST(StateStill, ConstantPotential) {
  StillState s = state_still(PotentialStill(Expr(3.0)), 2.0, 5.0);
  EXPECT_EQ(s.energy, 0.0);
  EXPECT_EQ(s.pressure, 0.0);
}

TEST(StateStill, LogTemperature) {
  StillState s = state_still(PotentialStill(parse("1.5*log(T)")), 0.7, 4.0);
  EXPECT_NEAR(s.energy, 1.5 * 4.0, 1e-15);
}

TEST(StateStill, IdealGasPressure) {
  PotentialStill psi(parse("log(T) - log(rho)"));
  SplitMix64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const double rho = rng.uniform(0.1, 5);
    const double T = rng.uniform(0.1, 5);
    EXPECT_NEAR(state_still(psi, rho, T).pressure, rho * T, 1e-13 * rho * T);
  }
}

TEST(StateStill, Errors) {
  PotentialStill psi(parse("log(T) - log(rho)"));
  EXPECT_THROW(state_still(psi, 1.0, 0.0), ThermoError);
  EXPECT_THROW(state_still(psi, -1.0, 1.0), ThermoError);
  EXPECT_THROW(PotentialStill(parse("x*T")), ThermoError);
  EXPECT_THROW(state_still(PotentialStill(parse("sqrt(T - 2)")), 1.0, 1.0), EvalError);
}

TEST(StillLegendrian, ReducedContactFormVanishesAlongCurves) {
  // theta' = d(-eta/T) + eps d(1/T) + v d(p/T) on the manifold generated by psi.
  PotentialStill psi(parse("1.5*log(T) - log(rho) - 0.3*rho/T"));
  auto curve = [&](double s) { return still_legendrian_point(psi, 1.0 + 0.5 * std::sin(s), 1.0 + s * s); };
  const double h = 1e-5;
  for (double s : {0.1, 0.7, 1.3}) {
    auto a = curve(s + h);
    auto b = curve(s - h);
    auto c = curve(s);
    std::vector<double> dy{(a.y[0] - b.y[0]) / (2 * h), (a.y[1] - b.y[1]) / (2 * h), (a.y[2] - b.y[2]) / (2 * h)};
    std::vector<double> x{c.x[0], c.x[1]};
    const double scale = std::fabs(dy[2]) + std::fabs(x[0] * dy[0]) + std::fabs(x[1] * dy[1]);
    EXPECT_LE(std::fabs(reduced_contact_form(x, dy)), 1e-9 * (1 + scale));
  }
}

// ---------------------------------------------------------------------------
// Moving media

TEST(StateMoving, NewtonianExampleStress) {
  NewtonianCoefficients c{Expr(1.0), Expr(2.0), Expr(0.0), Expr(-5.0), Expr(0.0)};
  StatePoint s = state_moving(newtonian_potential(c, 2), 1.0, 1.3, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LE((s.sigma + 2.0 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(StateMoving, DeltaFreePotentialHasNoStress) {
  PotentialMoving phi(2, parse("rho*1.5*log(T)"));
  SplitMix64 rng(3);
  StatePoint s = state_moving(phi, 0.8, 2.0, random_matrix(2, rng));
  EXPECT_EQ(s.sigma.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(s.e, 0.8 * 1.5 * 2.0, 1e-15);
}

TEST(StateMoving, DerivativesMatchFiniteDifferences) {
  SplitMix64 rng(7);
  for (const auto& tp : test_potentials()) {
    PotentialMoving phi(tp.n, parse(tp.src));
    MovingStateEquations eqs(phi);
    for (int k = 0; k < 10; ++k) {
      const double rho = rng.uniform(0.5, 2);
      const double T = rng.uniform(0.5, 2);
      Eigen::MatrixXd d = random_matrix(tp.n, rng, 0.5);
      Eigen::MatrixXd g = random_spd(tp.n, rng);
      StatePoint s = eqs.at(rho, T, d, g);
      const double h = 1e-6;
      auto f = [&](double r, double t, const Eigen::MatrixXd& dd) { return phi_numeric(phi.expr(), r, t, dd, g); };
      const double phi_T = (f(rho, T + h, d) - f(rho, T - h, d)) / (2 * h);
      const double phi_rho = (f(rho + h, T, d) - f(rho - h, T, d)) / (2 * h);
      EXPECT_NEAR(s.e, T * T * phi_T, 1e-7 * (1 + std::fabs(s.e)));
      EXPECT_NEAR(s.eta, -T * phi_rho, 1e-7 * (1 + std::fabs(s.eta)));
      Eigen::MatrixXd grad(tp.n, tp.n);
      for (std::size_t i = 0; i < tp.n; ++i)
        for (std::size_t j = 0; j < tp.n; ++j) {
          Eigen::MatrixXd a = d;
          Eigen::MatrixXd b = d;
          a(i, j) += h;
          b(i, j) -= h;
          grad(i, j) = (f(rho, T, a) - f(rho, T, b)) / (2 * h);
        }
      Eigen::MatrixXd sigma_ref = -T * g.inverse() * grad * g;
      EXPECT_LE((s.sigma - sigma_ref).cwiseAbs().maxCoeff(), 1e-6 * (1 + sigma_ref.cwiseAbs().maxCoeff())) << tp.src;
    }
  }
}

TEST(StateMoving, EulerRelation) {
  SplitMix64 rng(11);
  for (const auto& tp : test_potentials()) {
    PotentialMoving phi(tp.n, parse(tp.src));
    MovingStateEquations eqs(phi);
    for (int k = 0; k < 100; ++k) {
      Eigen::MatrixXd g = k % 2 ? random_spd(tp.n, rng) : Eigen::MatrixXd::Identity(tp.n, tp.n);
      StatePoint s = eqs.at(rng.uniform(0.2, 3), rng.uniform(0.2, 3), random_matrix(tp.n, rng), g);
      const double phi_v = phi_numeric(phi.expr(), s.rho, s.T, s.delta, g);
      const double pairing = (g.inverse() * s.sigma.transpose() * g * s.delta).trace();
      EXPECT_LE(std::fabs(phi_v - (s.p - pairing - s.rho * s.eta) / s.T), 1e-10);
      EXPECT_LE(euler_residual(eqs, s, g), 1e-10);
    }
  }
}

TEST(StateMoving, EntropyDensityFromEulerRelation) {
  // For a Delta-free potential phi = rho psi, the entropy density is rho times
  // the specific entropy -(d/dT)(-T psi).
  PotentialMoving phi(1, parse("rho*(1.5*log(T) - log(rho))"));
  StatePoint s = state_moving(phi, 2.0, 3.0, Eigen::MatrixXd::Zero(1, 1));
  const double psi = 1.5 * std::log(3.0) - std::log(2.0);
  const double specific = psi + 1.5;  // d(T psi)/dT
  EXPECT_NEAR(entropy_density(s, Eigen::MatrixXd::Identity(1, 1)), 2.0 * specific, 1e-13);
}

TEST(StateMoving, Errors) {
  EXPECT_THROW(PotentialMoving(2, parse("rho*D_13")), ThermoError);
  EXPECT_THROW(PotentialMoving(0, parse("rho")), ThermoError);
  EXPECT_THROW(PotentialMoving(5, parse("rho")), ThermoError);
  PotentialMoving phi(2, parse("rho*log(T)"));
  EXPECT_THROW(state_moving(phi, 1.0, -1.0, Eigen::MatrixXd::Zero(2, 2)), ThermoError);
  EXPECT_THROW(state_moving(phi, 1.0, 1.0, Eigen::MatrixXd::Zero(3, 3)), ThermoError);
}

// ---------------------------------------------------------------------------
// Invariants

TEST(ArtinProcesi, Example) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(artin_procesi(a, g, kWordP1), 2.0);
  EXPECT_EQ(artin_procesi(a, g, kWordP2), 2.0);
  EXPECT_EQ(artin_procesi(a, g, kWordP11), 6.0);
}

TEST(ArtinProcesi, IdentityGivesDimension) {
  SplitMix64 rng(2);
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    Eigen::MatrixXd g = random_spd(n, rng);
    for (const TraceWord& w : {kWordP1, kWordP2, kWordP11, TraceWord{{{2, 1}, {0, 3}}}}) {
      EXPECT_NEAR(artin_procesi(Eigen::MatrixXd::Identity(n, n), g, w), static_cast<double>(n), 1e-12);
    }
  }
}

TEST(ArtinProcesi, InvariantUnderMetricOrthogonalConjugation) {
  SplitMix64 rng(19);
  const std::vector<TraceWord> words{kWordP1, kWordP2, kWordP11, {{{2, 1}}}, {{{1, 2}, {1, 0}}}, {{{0, 1}, {2, 1}}}};
  for (std::size_t n : {2u, 3u}) {
    Eigen::MatrixXd g = random_spd(n, rng);
    Eigen::MatrixXd L = g.llt().matrixL();
    Eigen::MatrixXd a = random_matrix(n, rng);
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd O = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(n, rng)).householderQ();
      Eigen::MatrixXd Q = L.transpose().inverse() * O * L.transpose();
      ASSERT_LE((Q.transpose() * g * Q - g).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::MatrixXd b = Q.inverse() * a * Q;
      for (const auto& w : words) {
        const double ref = artin_procesi(a, g, w);
        EXPECT_LE(std::fabs(artin_procesi(b, g, w) - ref), 1e-9 * std::max(1.0, std::fabs(ref)));
      }
    }
  }
}

TEST(ArtinProcesi, AdjointDefinition) {
  SplitMix64 rng(4);
  Eigen::MatrixXd g = random_spd(3, rng);
  Eigen::MatrixXd a = random_matrix(3, rng);
  Eigen::MatrixXd adj = metric_adjoint(a, g);
  Eigen::VectorXd u = Eigen::VectorXd::Random(3);
  Eigen::VectorXd v = Eigen::VectorXd::Random(3);
  EXPECT_NEAR((adj * u).dot(g * v), u.dot(g * (a * v)), 1e-12);
  EXPECT_NEAR(artin_procesi(a, g, {{{0, 1}}}), a.trace(), 1e-12);
}

TEST(ArtinProcesi, RejectsSingularMetricAndEmptyWord) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(artin_procesi(a, Eigen::MatrixXd::Zero(2, 2), kWordP11), ThermoError);
  EXPECT_THROW(artin_procesi(a, Eigen::MatrixXd::Identity(2, 2), TraceWord{}), ThermoError);
}

TEST(ExpandInvariants, MatchesNumericInvariants) {
  SplitMix64 rng(5);
  Eigen::MatrixXd g = random_spd(2, rng);
  PotentialMoving phi(2, parse("P1 + 2*P2 - 3*P11 + P1*P2"));
  Expr raw = expand_invariants(phi, g);
  Eigen::MatrixXd d = random_matrix(2, rng);
  Bindings b{{"D_11", d(0, 0)}, {"D_12", d(0, 1)}, {"D_21", d(1, 0)}, {"D_22", d(1, 1)}};
  EXPECT_NEAR(eval(raw, b), phi_numeric(phi.expr(), 1, 1, d, g), 1e-12);
}

// ---------------------------------------------------------------------------
// Quadratic forms

TEST(Classify, EigenvalueRule) {
  EXPECT_EQ(classify((Eigen::MatrixXd(2, 2) << -1, 0, 0, -2).finished()), PhaseClass::applicable);
  EXPECT_EQ(classify((Eigen::MatrixXd(2, 2) << -1, 0, 0, 1e-10).finished()), PhaseClass::singular);
  EXPECT_EQ(classify((Eigen::MatrixXd(2, 2) << -1, 0, 0, -1e-10).finished()), PhaseClass::singular);
  EXPECT_EQ(classify((Eigen::MatrixXd(2, 2) << -1, 0, 0, 1e-8).finished()), PhaseClass::non_applicable);
  EXPECT_EQ(classify((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished()), PhaseClass::non_applicable);
  EXPECT_EQ(phase_letter(PhaseClass::applicable), 'A');
  EXPECT_EQ(phase_letter(PhaseClass::singular), 'S');
  EXPECT_EQ(phase_letter(PhaseClass::non_applicable), 'N');
}

TEST(ChiPrime, CoordinatesAreRowMajor) {
  ChiPrimeForm form(PotentialMoving(2, parse("rho*log(T)")), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(form.coords(), (std::vector<std::string>{"beta", "rho", "D_11", "D_12", "D_21", "D_22"}));
}

TEST(ChiPrime, MatchesFiniteDifferenceHessian) {
  SplitMix64 rng(13);
  for (const auto& tp : test_potentials()) {
    PotentialMoving phi(tp.n, parse(tp.src));
    for (int k = 0; k < 4; ++k) {
      Eigen::MatrixXd g = k % 2 ? random_spd(tp.n, rng) : Eigen::MatrixXd::Identity(tp.n, tp.n);
      ChiPrimeForm form(phi, g);
      const double rho = rng.uniform(0.5, 2);
      const double T = rng.uniform(0.5, 2);
      Eigen::MatrixXd d = random_matrix(tp.n, rng, 0.5);
      QuadFormSample q = form.at(rho, T, d);
      const std::size_t m = 2 + tp.n * tp.n;
      ASSERT_EQ(static_cast<std::size_t>(q.matrix.rows()), m);
      EXPECT_LE((q.matrix - q.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-13);
      // Coordinates w = (beta, rho, vec D).
      Eigen::VectorXd w(m);
      w(0) = 1.0 / T;
      w(1) = rho;
      for (std::size_t i = 0; i < tp.n * tp.n; ++i) w(2 + i) = d(i / tp.n, i % tp.n);
      auto f = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd dd(tp.n, tp.n);
        for (std::size_t i = 0; i < tp.n * tp.n; ++i) dd(i / tp.n, i % tp.n) = p(2 + i);
        return phi_numeric(phi.expr(), p(1), 1.0 / p(0), dd, g);
      };
      const double h = 1e-4;
      Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          if ((a == 0) != (b == 0)) continue;  // no cross terms with beta
          Eigen::VectorXd pp = w, pm = w, mp = w, mm = w;
          pp(a) += h; pp(b) += h;
          pm(a) += h; pm(b) -= h;
          mp(a) -= h; mp(b) += h;
          mm(a) -= h; mm(b) -= h;
          ref(a, b) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
      ref(0, 0) = -ref(0, 0);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          EXPECT_LE(std::fabs(q.matrix(a, b) - ref(a, b)), 1e-5 * std::max(1.0, std::fabs(ref(a, b))))
              << tp.src << " entry " << a << "," << b;
    }
  }
}

TEST(ChiPrime, ReducesToIdealGasKappa) {
  // phi = rho psi with psi = R((n/2) log T - log rho). Pulling chi' back along
  // beta = 1/T, rho = 1/v and dividing by rho gives kappa.
  const double R = 1.3;
  const double nf = 3.0;
  PotentialMoving phi(1, parse("rho*1.3*(1.5*log(T) - log(rho))"));
  ChiPrimeForm form(phi, Eigen::MatrixXd::Identity(1, 1));
  SplitMix64 rng(29);
  for (int k = 0; k < 20; ++k) {
    const double T = rng.uniform(0.2, 4);
    const double v = rng.uniform(0.2, 4);
    Eigen::MatrixXd chi = form.at(1.0 / v, T, Eigen::MatrixXd::Zero(1, 1)).matrix.topLeftCorner(2, 2);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, 2);
    J(0, 0) = -1.0 / (T * T);
    J(1, 1) = -1.0 / (v * v);
    Eigen::MatrixXd pulled = J.transpose() * chi * J * v;
    Eigen::MatrixXd kappa = ideal_gas_kappa(T, v, R, nf).matrix;
    EXPECT_LE((pulled - kappa).cwiseAbs().maxCoeff(), 1e-12 * (1 + kappa.cwiseAbs().maxCoeff()));
  }
}

TEST(ChiPrime, NegativeDefiniteQuadraticIsApplicable) {
  PotentialMoving phi(1, parse("log(T) - rho^2 - D_11^2 - 0.5*rho*D_11"));
  EXPECT_EQ(chi_prime(phi, 1.0, 2.0, Eigen::MatrixXd::Constant(1, 1, 0.3)).classification, PhaseClass::applicable);
}

TEST(IdealGas, Examples) {
  QuadFormSample a = ideal_gas_kappa(1, 1, 1, 3);
  EXPECT_EQ(a.matrix(0, 0), -1.5);
  EXPECT_EQ(a.matrix(1, 1), -1.0);
  EXPECT_EQ(a.matrix(0, 1), 0.0);
  QuadFormSample b = ideal_gas_kappa(2, 1, 1, 3);
  EXPECT_EQ(b.matrix(0, 0), -0.375);
  EXPECT_EQ(b.matrix(1, 1), -1.0);
  EXPECT_EQ(a.coords, (std::vector<std::string>{"T", "v"}));
}

TEST(IdealGas, AlwaysApplicable) {
  SplitMix64 rng(37);
  for (int k = 0; k < 100; ++k) {
    auto q = ideal_gas_kappa(rng.uniform(0.01, 100), rng.uniform(0.01, 100), rng.uniform(0.1, 10), 3);
    EXPECT_EQ(q.classification, PhaseClass::applicable);
  }
  EXPECT_THROW(ideal_gas_kappa(0, 1, 1, 3), ThermoError);
  EXPECT_THROW(ideal_gas_kappa(1, -1, 1, 3), ThermoError);
}

TEST(VanDerWaals, Examples) {
  EXPECT_EQ(vdw_kappa(1.0, 2.0, 1, 3).classification, PhaseClass::applicable);
  EXPECT_EQ(vdw_kappa(0.5, 2.0, 1, 3).classification, PhaseClass::non_applicable);
  EXPECT_EQ(vdw_kappa(1.0, 1.0, 1, 3).classification, PhaseClass::singular);
  EXPECT_THROW(vdw_kappa(1.0, 1.0 / 3.0, 1, 3), ThermoError);
}

TEST(VanDerWaals, MatchesExpandedDisplay) {
  SplitMix64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const double T = rng.uniform(0.1, 2);
    const double v = rng.uniform(0.4, 3);
    const double ref = -9.0 * (4 * T * v * v * v - 9 * v * v + 6 * v - 1) / (4 * T * v * v * v * std::pow(3 * v - 1, 2));
    EXPECT_NEAR(vdw_kappa(T, v, 1, 3).matrix(1, 1), ref, 1e-10 * (1 + std::fabs(ref)));
  }
}

TEST(VanDerWaals, CoexistenceCurve) {
  EXPECT_EQ(vdw_coexistence_temperature(1.0), 1.0);
  EXPECT_EQ(vdw_coexistence_temperature(2.0), 0.78125);
  EXPECT_LT(vdw_coexistence_temperature(1.0 / 3.0 + 1e-9), 1e-15);
  auto curve = vdw_coexistence_curve(0.4, 5.0, 500);
  ASSERT_EQ(curve.size(), 500u);
  EXPECT_EQ(curve.front().first, 0.4);
  EXPECT_EQ(curve.back().first, 5.0);
  for (auto [v, T] : curve) {
    QuadFormSample q = vdw_kappa(T, v, 1, 3);
    EXPECT_EQ(q.classification, PhaseClass::singular) << v;
    EXPECT_LE(std::fabs(q.matrix(1, 1)), 1e-9);
  }
  EXPECT_THROW(vdw_coexistence_curve(0.3, 1.0, 10), ThermoError);
  EXPECT_THROW(vdw_coexistence_curve(2.0, 1.0, 10), ThermoError);
  EXPECT_THROW(vdw_coexistence_curve(0.5, 1.0, 1), ThermoError);
}

TEST(VanDerWaals, ClassificationSides) {
  SplitMix64 rng(43);
  for (int k = 0; k < 500; ++k) {
    const double v = rng.uniform(0.35, 5);
    const double Tc = vdw_coexistence_temperature(v);
    const double off = rng.uniform(1e-6, 1.0);
    EXPECT_EQ(vdw_kappa(Tc + off, v, 1, 3).classification, PhaseClass::applicable);
    if (Tc - off > 0) {
      EXPECT_EQ(vdw_kappa(Tc - off, v, 1, 3).classification, PhaseClass::non_applicable);
    }
  }
}

TEST(VanDerWaals, CriticalPoint) {
  auto [v, T] = vdw_critical_point();
  EXPECT_NEAR(v, 1.0, 1e-10);
  EXPECT_NEAR(T, 1.0, 1e-10);
  const double h = 1e-6;
  EXPECT_LE(std::fabs((vdw_coexistence_temperature(v + h) - vdw_coexistence_temperature(v - h)) / (2 * h)), 1e-8);
}

TEST(PhaseDiagram, IdealIsAllApplicable) {
  auto nodes = phase_diagram(GasModel::ideal, {0.1, 3}, {0.1, 3}, 20, 30, 1, 3);
  ASSERT_EQ(nodes.size(), 600u);
  for (const auto& n : nodes) EXPECT_EQ(n.cls, PhaseClass::applicable);
}

TEST(PhaseDiagram, VanDerWaalsBandFollowsCurve) {
  const std::size_t N = 200;
  auto nodes = phase_diagram(GasModel::van_der_waals, {0.4, 3}, {0.2, 1.5}, N, N, 1, 3);
  ASSERT_EQ(nodes.size(), N * N);
  const double dT = 1.3 / N;
  std::size_t singular = 0;
  for (const auto& n : nodes) {
    const double gap = n.T - vdw_coexistence_temperature(n.v);
    if (std::fabs(gap) <= dT / 2) {
      EXPECT_EQ(n.cls, PhaseClass::singular);
      ++singular;
    } else {
      EXPECT_EQ(n.cls, gap > 0 ? PhaseClass::applicable : PhaseClass::non_applicable);
    }
  }
  // The curve stays inside the T range for most v, so about one node per column.
  EXPECT_GT(singular, N / 2);
  EXPECT_LE(singular, 2 * N);
}

// ---------------------------------------------------------------------------
// Newtonian media

TEST(Newtonian, ZeroCoefficients) {
  Expr phi = newtonian_potential({}, 2).expr();
  EXPECT_EQ(eval(phi, {{"T", 2.0}, {"P1", 1.0}, {"P2", 3.0}, {"P11", 4.0}, {"rho", 1.0}}), 0.0);
}

TEST(Newtonian, HandAssembledPotential) {
  NewtonianCoefficients c{parse("rho"), parse("T^2"), parse("0.5"), parse("-rho*T"), parse("log(rho)")};
  Expr phi = newtonian_potential(c, 2).expr();
  const double rho = 1.7, T = 0.6, p1 = 0.3, p2 = -1.1, p11 = 2.4;
  const double ref = -(1 / T) * (0.5 * (rho * p2 + T * T * p11 + 0.5 * p1 * p1) - rho * T * p1 + std::log(rho));
  EXPECT_NEAR(eval(phi, {{"rho", rho}, {"T", T}, {"P1", p1}, {"P2", p2}, {"P11", p11}}), ref, 1e-14);
}

TEST(Newtonian, StressDisplayMatchesChainRule) {
  SplitMix64 rng(47);
  NewtonianCoefficients c{parse("0.3 + rho"), parse("T/2"), parse("rho*T"), parse("-rho*T"), parse("rho*T*log(rho)")};
  for (std::size_t n : {1u, 2u, 3u}) {
    MovingStateEquations eqs(newtonian_potential(c, n));
    for (int k = 0; k < 50; ++k) {
      const double rho = rng.uniform(0.2, 3);
      const double T = rng.uniform(0.2, 3);
      Eigen::MatrixXd d = random_matrix(n, rng);
      Eigen::MatrixXd g = k % 2 ? random_spd(n, rng) : Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd display = newtonian_stress(c, d, g, rho, T);
      // Independent assembly of the display.
      Eigen::MatrixXd adj = g.inverse() * d.transpose() * g;
      Eigen::MatrixXd ref = (0.3 + rho) * adj + (T / 2) * d + (rho * T * d.trace() - rho * T) * Eigen::MatrixXd::Identity(n, n);
      EXPECT_LE((display - ref).cwiseAbs().maxCoeff(), 1e-13);
      EXPECT_LE((eqs.at(rho, T, d, g).sigma - display).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Newtonian, HydrostaticAndSkew) {
  NewtonianCoefficients c{Expr(0.4), Expr(0.9), Expr(0.1), Expr(-2.0), Expr(0.0)};
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(newtonian_stress(c, Eigen::MatrixXd::Zero(2, 2), I, 1, 1), -2.0 * I);
  Eigen::MatrixXd w(2, 2);
  w << 0, 1.5, -1.5, 0;
  Eigen::MatrixXd s = newtonian_stress(c, w, I, 1, 1);
  Eigen::MatrixXd ref = 0.4 * w.transpose() + 0.9 * w - 2.0 * I;
  EXPECT_LE((s - ref).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::MatrixXd traceless = s + 2.0 * I;
  EXPECT_LE((traceless + traceless.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PressureMatching, Examples) {
  auto [b1c, b2c] = pressure_matching(PotentialStill(Expr(2.5)));
  Bindings p{{"rho", 1.5}, {"T", 0.8}};
  EXPECT_EQ(eval(b1c, p), 0.0);
  EXPECT_NEAR(eval(b2c, p), -1.5 * 0.8 * 2.5, 1e-15);
  auto [b1, b2] = pressure_matching(PotentialStill(parse("-log(rho)")));
  EXPECT_NEAR(eval(b1, p), -1.5 * 0.8, 1e-15);
  (void)b2;
}

TEST(PressureMatching, HydrostaticPressureEqualsStillPressure) {
  PotentialStill psi(parse("1.5*log(T) - log(rho) - 0.2*rho/T"));
  auto [b1, b2] = pressure_matching(psi);
  for (double rho : {0.3, 1.0, 2.2})
    for (double T : {0.5, 1.7}) EXPECT_NEAR(-eval(b1, {{"rho", rho}, {"T", T}}), state_still(psi, rho, T).pressure, 1e-13);
}

TEST(PressureMatching, StillLimit) {
  PotentialStill psi(parse("1.5*log(T) - log(rho) - 0.2*rho/T"));
  auto [b1, b2] = pressure_matching(psi);
  NewtonianCoefficients c;
  c.b1 = b1;
  c.b2 = b2;
  PotentialMoving phi = newtonian_potential(c, 2);
  SplitMix64 rng(53);
  for (int k = 0; k < 50; ++k) {
    const double rho = rng.uniform(0.1, 3);
    const double T = rng.uniform(0.1, 3);
    const double lhs = MovingStateEquations(phi).potential_value(rho, T, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
    const double ref = rho * (1.5 * std::log(T) - std::log(rho) - 0.2 * rho / T);
    EXPECT_LE(std::fabs(lhs - ref), 1e-12 * std::max(1.0, std::fabs(ref)));
  }
}

// ---------------------------------------------------------------------------
// Canonical coordinates

TEST(MaslovAtlas, Example) {
  GasPoint g{10, 4, 1, 1, 2, 0, 0};
  auto atlas = maslov_atlas_gas(g);
  bool found = false;
  for (const auto& a : atlas) {
    if (a.chart == "y1,x2,x3") {
      EXPECT_EQ(a.phi, 8.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(MaslovAtlas, ZeroExtensivesGiveZ) {
  for (const auto& a : maslov_atlas_gas({7.5, 0, 0, 0, 3, 2, 1})) EXPECT_EQ(a.phi, 7.5);
}

TEST(MaslovAtlas, AllChartsAndFullLegendre) {
  const GasPoint g{10, 4, 2, 3, 2, 5, 0.7};
  auto atlas = maslov_atlas_gas(g);
  std::set<std::string> labels;
  for (const auto& a : atlas) labels.insert(a.chart);
  EXPECT_EQ(labels.size(), 7u);
  EXPECT_FALSE(labels.count("x1,x2,x3"));
  for (const auto& a : atlas) {
    if (a.chart == "y1,y2,y3") {
      EXPECT_NEAR(a.phi, 10 - 4.0 / 2 - 5.0 * 2 / 2 + 3 * 0.7 / 2, 1e-14);
    }
    if (a.chart == "y2,x1,x3") {
      EXPECT_NEAR(a.phi, 10 - 5.0 * 2 / 2, 1e-14);
    }
    if (a.chart == "y1,y3,x2") {
      EXPECT_NEAR(a.phi, 10 - 4.0 / 2 + 3 * 0.7 / 2, 1e-14);
    }
  }
}

TEST(MaslovPoint, ContactFormVanishesAlongCurves) {
  // Chart (y1, x2): phi(y1, x2) generates a Legendrian surface; theta = dz - y1 dx1 - y2 dx2.
  Expr phi = parse("log(y1)*x2 - y1^2 + 0.5*x2^2");
  const std::vector<std::string> names{"y1", "x2"};
  const std::vector<bool> is_y{true, false};
  auto point = [&](double s) {
    std::vector<double> v{1.0 + 0.3 * s, std::cos(s)};
    return maslov_point(phi, names, is_y, v);
  };
  const double h = 1e-5;
  for (double s : {0.2, 0.9, 1.6}) {
    auto a = point(s + h);
    auto b = point(s - h);
    auto c = point(s);
    EXPECT_EQ(c.y[0], 1.0 + 0.3 * s);
    EXPECT_EQ(c.x[1], std::cos(s));
    double theta = (a.z - b.z) / (2 * h);
    for (std::size_t k = 0; k < 2; ++k) theta -= c.y[k] * (a.x[k] - b.x[k]) / (2 * h);
    EXPECT_LE(std::fabs(theta), 1e-8);
  }
}

TEST(MaslovPoint, SizeMismatch) {
  std::vector<double> v{1.0};
  EXPECT_THROW(maslov_point(parse("x1"), {"x1", "x2"}, {false, false}, v), ThermoError);
}

TEST(Helmholtz, StateEquations) {
  // h = -c T log T - a X^2 / 2
  Expr h = parse("-2*T*log(T) - 0.75*X^2");
  std::vector<double> x{1.2};
  HelmholtzState s = helmholtz_state(h, 3.0, {"X"}, x);
  EXPECT_NEAR(s.E, 2 * 3.0 - 0.75 * 1.44, 1e-14);
  EXPECT_NEAR(s.S, 2 * std::log(3.0) + 2, 1e-14);
  ASSERT_EQ(s.Y.size(), 1u);
  EXPECT_NEAR(s.Y[0], 1.5 * 1.2, 1e-14);
}

TEST(GibbsDuhem, Reduction) {
  std::vector<double> x{4, 2, 2};
  ReducedCoordinates r = gibbs_duhem_reduce(6, x);
  EXPECT_EQ(r.x, (std::vector<double>{2, 1}));
  EXPECT_EQ(r.z, 3.0);
  for (double t : {0.5, 2.0, 10.0}) {
    std::vector<double> xs{4 * t, 2 * t, 2 * t};
    ReducedCoordinates q = gibbs_duhem_reduce(6 * t, xs);
    EXPECT_DOUBLE_EQ(q.z, r.z);
    EXPECT_DOUBLE_EQ(q.x[0], r.x[0]);
    EXPECT_DOUBLE_EQ(q.x[1], r.x[1]);
  }
  std::vector<double> bad{1, 0};
  EXPECT_THROW(gibbs_duhem_reduce(1, bad), ThermoError);
}

TEST(GibbsDuhem, ReducedFormAnnihilatesHomogeneousManifold) {
  // S(E, V, m) = m (1.5 log(E/m) + log(V/m)) is first-order homogeneous; its
  // Legendrian points reduce onto a curve family killed by theta'.
  auto point = [](double s) {
    const double E = 2 + std::sin(s), V = 1 + s * s, m = 1.5 + 0.2 * s;
    const double S = m * (1.5 * std::log(E / m) + std::log(V / m));
    const double y1 = 1.5 * m / E;                             // dS/dE
    const double y2 = m / V;                                   // dS/dV
    const double y3 = (S - y1 * E - y2 * V) / m;               // Euler relation
    std::vector<double> x{E, V, m};
    ReducedCoordinates r = gibbs_duhem_reduce(S, x);
    return std::pair{r, std::vector<double>{y1, y2, y3}};
  };
  const double h = 1e-5;
  for (double s : {0.3, 1.1}) {
    auto [ra, ya] = point(s + h);
    auto [rb, yb] = point(s - h);
    auto [rc, yc] = point(s);
    std::vector<double> dy{(ya[0] - yb[0]) / (2 * h), (ya[1] - yb[1]) / (2 * h), (ya[2] - yb[2]) / (2 * h)};
    EXPECT_LE(std::fabs(reduced_contact_form(rc.x, dy)), 1e-9);
  }
}
