#pragma once

// Scenario tasks behind the `riemedia` command-line tool.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "riemedia/csv.hpp"
#include "riemedia/error.hpp"
#include "riemedia/geometry.hpp"
#include "riemedia/motion.hpp"
#include "riemedia/scenario.hpp"
#include "riemedia/thermo.hpp"
#include "riemedia/verify.hpp"

namespace riemedia {

inline const std::array<std::string, 8> kTasks{"christoffel", "divergence",  "residuals", "phase-diagram",
                                               "state-equations", "coexistence", "simulate", "verify"};

struct CliOptions {
  std::string task;
  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::pair<std::size_t, std::size_t>> grid;
};

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitInput = 2, kExitDomain = 3 };

namespace detail {

class OutputFile {
 public:
  OutputFile(const std::string& dir, const std::string& name) : path_((std::filesystem::path(dir) / name).string()) {
    std::filesystem::create_directories(dir);
    os_.open(path_, std::ios::binary | std::ios::trunc);
    if (!os_) throw ScenarioError("cannot write '" + path_ + "'");
  }

  std::ostream& stream() { return os_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream os_;
};

inline std::vector<std::string> point_columns(const Chart& chart) { return chart.all_vars(); }

inline std::vector<std::string> point_values(const Chart& chart, const Bindings& p) {
  std::vector<std::string> out;
  for (const auto& v : chart.all_vars()) out.push_back(format_double(p.at(v)));
  return out;
}

inline void require_chart(const Scenario& sc, const char* task) {
  if (!sc.has_chart) throw ScenarioError(sc.name + ": task '" + task + "' needs a [chart] section");
}

inline void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

inline std::size_t task_christoffel(const Scenario& sc, const std::vector<Bindings>& probes, CsvWriter& csv) {
  require_chart(sc, "christoffel");
  const MetricField g = sc.metric_or_euclidean();
  const ChristoffelField gamma = christoffel(g);
  std::vector<std::string> header{"k", "i", "j", "expression", "probe"};
  append(header, point_columns(sc.chart));
  header.push_back("value");
  csv.row(header);
  std::size_t rows = 0;
  const std::size_t n = g.dim();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Expr& e = gamma(k, i, j);
        if (e.is_constant(0.0)) continue;
        const std::string text = to_string(e);
        for (std::size_t p = 0; p < probes.size(); ++p) {
          std::vector<std::string> row{std::to_string(k + 1), std::to_string(i + 1), std::to_string(j + 1), text,
                                       std::to_string(p)};
          append(row, point_values(sc.chart, probes[p]));
          row.push_back(format_double(eval(e, probes[p])));
          csv.row(row);
          ++rows;
        }
      }
  return rows;
}

inline std::size_t task_divergence(const Scenario& sc, const std::vector<Bindings>& probes, CsvWriter& csv) {
  require_chart(sc, "divergence");
  const MetricField g = sc.metric_or_euclidean();
  const ChristoffelField gamma = christoffel(g);
  const VectorField X = make_vector(sc.chart, sc.fields ? sc.fields->X : test_vector(sc.chart));
  const Expr div = divergence(X, gamma).f;
  const Expr tr = trace(covariant_differential(X, gamma).a);
  std::vector<std::string> header{"probe"};
  append(header, point_columns(sc.chart));
  append(header, {"div_X", "trace_dX"});
  csv.row(header);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::vector<std::string> row{std::to_string(p)};
    append(row, point_values(sc.chart, probes[p]));
    append(row, {format_double(eval(div, probes[p])), format_double(eval(tr, probes[p]))});
    csv.row(row);
  }
  return probes.size();
}

inline std::size_t task_residuals(const Scenario& sc, const std::vector<Bindings>& probes, CsvWriter& csv) {
  require_chart(sc, "residuals");
  if (!sc.fields || !sc.closure) throw ScenarioError(sc.name + ": task 'residuals' needs [fields] and [closure]");
  const MotionSystem sys(sc.metric_or_euclidean(), *sc.fields, sc.closure->closure);
  const ResidualReport rep = evaluate_residuals(sys, probes);
  const Expr kin = sys.kinetic_balance().f;
  const std::size_t n = sc.chart.dim();
  std::vector<std::string> header{"probe"};
  append(header, point_columns(sc.chart));
  header.push_back("r_mass");
  for (std::size_t i = 0; i < n; ++i) header.push_back("r_momentum_" + std::to_string(i + 1));
  append(header, {"r_energy", "kinetic_balance"});
  csv.row(header);
  for (std::size_t p = 0; p < rep.samples.size(); ++p) {
    const auto& s = rep.samples[p];
    std::vector<std::string> row{std::to_string(p)};
    append(row, point_values(sc.chart, s.point));
    row.push_back(format_double(s.r_mass));
    for (std::size_t i = 0; i < n; ++i) row.push_back(format_double(s.r_momentum(static_cast<Eigen::Index>(i))));
    append(row, {format_double(s.r_energy), format_double(eval(kin, s.point))});
    csv.row(row);
  }
  return rep.samples.size();
}

inline std::size_t task_phase_diagram(const Scenario& sc, const CliOptions& opt, CsvWriter& csv) {
  if (!sc.thermo) throw ScenarioError(sc.name + ": task 'phase-diagram' needs a [thermo] section");
  ThermoSpec t = *sc.thermo;
  if (!t.model) throw ScenarioError(sc.name + ": task 'phase-diagram' needs [thermo] model");
  if (opt.grid) std::tie(t.grid_v, t.grid_T) = *opt.grid;
  const auto nodes = phase_diagram(*t.model, t.v_range, t.T_range, t.grid_v, t.grid_T, t.R, t.n);
  csv.row({"v", "T", "class", "kTT", "kvv"});
  for (const auto& node : nodes) {
    csv.row({format_double(node.v), format_double(node.T), std::string(1, phase_letter(node.cls)),
             format_double(node.kTT), format_double(node.kvv)});
  }
  return nodes.size();
}

inline std::size_t task_coexistence(const Scenario& sc, CsvWriter& csv) {
  if (!sc.thermo) throw ScenarioError(sc.name + ": task 'coexistence' needs a [thermo] section");
  const ThermoSpec& t = *sc.thermo;
  const double v_lo = std::max(t.v_range.first, 1.0 / 3.0 + 1e-3);
  const auto curve = vdw_coexistence_curve(v_lo, t.v_range.second, t.curve_samples);
  csv.row({"v", "T", "class", "kvv"});
  for (auto [v, T] : curve) {
    QuadFormSample q = vdw_kappa(T, v, t.R, t.n);
    csv.row({format_double(v), format_double(T), std::string(1, phase_letter(q.classification)),
             format_double(q.matrix(1, 1))});
  }
  auto [vc, Tc] = vdw_critical_point();
  csv.row({format_double(vc), format_double(Tc), "critical", format_double(vdw_kappa(Tc, vc, t.R, t.n).matrix(1, 1))});
  return curve.size() + 1;
}

inline std::size_t task_state_equations(const Scenario& sc, CsvWriter& csv) {
  require_chart(sc, "state-equations");
  if (!sc.closure) throw ScenarioError(sc.name + ": task 'state-equations' needs a [closure] section");
  const std::size_t n = sc.chart.dim();
  const ThermoSpec t = sc.thermo.value_or(ThermoSpec{});
  const MovingStateEquations eqs(sc.closure->closure.potential);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  std::vector<std::string> header{"sample", "rho", "T"};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) header.push_back(delta_symbol(i, j));
  append(header, {"e", "eta", "p", "s"});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) header.push_back("sigma_" + std::to_string(i + 1) + std::to_string(j + 1));
  header.push_back("euler_residual");
  csv.row(header);
  SplitMix64 rng(sc.seed ^ 0x57a7eULL);
  for (std::size_t k = 0; k < t.samples; ++k) {
    const double rho = rng.uniform(t.rho_range.first, t.rho_range.second);
    const double T = rng.uniform(std::max(t.T_range.first, 1e-3), t.T_range.second);
    const Eigen::MatrixXd delta = random_matrix(n, t.delta_range, rng);
    const StatePoint s = eqs.at(rho, T, delta, g);
    std::vector<std::string> row{std::to_string(k), format_double(rho), format_double(T)};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) row.push_back(format_double(delta(i, j)));
    append(row, {format_double(s.e), format_double(s.eta), format_double(s.p), format_double(entropy_density(s, g))});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) row.push_back(format_double(s.sigma(i, j)));
    row.push_back(format_double(euler_residual(eqs, s, g)));
    csv.row(row);
  }
  return t.samples;
}

inline std::size_t task_simulate(const Scenario& sc, const CliOptions& opt, CsvWriter& csv, std::ostream& log) {
  const SimulationSetup setup = simulation_setup(sc);
  const SimulationResult res = simulate_explicit(setup);
  csv.row({"step", "time", "total_mass", "total_energy"});
  for (const auto& d : res.series) {
    csv.row({std::to_string(d.step), format_double(d.time), format_double(d.total_mass),
             format_double(d.total_energy)});
  }
  if (!res.snapshots.empty()) {
    OutputFile snap(opt.out_dir, "snapshots.csv");
    CsvWriter w(snap.stream());
    const std::size_t n = setup.grid.dim();
    std::vector<std::string> header{"step", "time", "cell"};
    append(header, sc.chart.space_vars());
    header.push_back("rho");
    for (std::size_t d = 0; d < n; ++d) header.push_back("X_" + std::to_string(d + 1));
    header.push_back("T");
    w.row(header);
    const std::size_t nx = setup.grid.cells[0];
    for (const auto& s : res.snapshots) {
      for (std::size_t c = 0; c < s.rho.size(); ++c) {
        std::vector<std::string> row{std::to_string(s.step), format_double(s.time), std::to_string(c)};
        for (std::size_t d = 0; d < n; ++d) {
          const std::size_t idx = d == 0 ? c % nx : c / nx;
          const double h = setup.grid.spacing(d);
          row.push_back(format_double(setup.grid.extent[d].lo + (static_cast<double>(idx) + 0.5) * h));
        }
        row.push_back(format_double(s.rho[c]));
        for (std::size_t d = 0; d < n; ++d) row.push_back(format_double(s.X[d][c]));
        row.push_back(format_double(s.T[c]));
        w.row(row);
      }
    }
    log << "wrote " << snap.path() << '\n';
  }
  return res.series.size();
}

}  // namespace detail

inline std::string task_output_name(const std::string& task) {
  if (task == "christoffel") return "christoffel.csv";
  if (task == "divergence") return "divergence.csv";
  if (task == "residuals") return "residuals.csv";
  if (task == "phase-diagram") return "phase_diagram.csv";
  if (task == "state-equations") return "state_equations.csv";
  if (task == "coexistence") return "coexistence.csv";
  if (task == "simulate") return "timeseries.csv";
  if (task == "verify") return "verify.txt";
  throw ScenarioError("unknown task '" + task + "'");
}

/// Runs one task and writes its output file. Errors propagate as exceptions;
/// see exit_code_for for the mapping used by the tool.
inline int run_task(const CliOptions& opt, std::ostream& log) {
  const std::string file = task_output_name(opt.task);
  Scenario sc = load_scenario(opt.scenario);
  if (opt.seed) sc.seed = *opt.seed;
  std::vector<Bindings> probes;
  if (sc.has_chart) probes = sample_probes(sc.chart, sc.probes, sc.seed);

  if (opt.task == "verify") {
    const VerifyReport rep = verify_scenario(sc);
    detail::OutputFile out(opt.out_dir, file);
    out.stream() << rep.text();
    log << rep.text() << "wrote " << out.path() << '\n';
    return rep.all_pass() ? kExitOk : kExitVerifyFailed;
  }

  // Compute into memory first so a failing task leaves no partial file.
  std::ostringstream buffer;
  CsvWriter csv(buffer);
  std::size_t rows = 0;
  if (opt.task == "christoffel") {
    rows = detail::task_christoffel(sc, probes, csv);
  } else if (opt.task == "divergence") {
    rows = detail::task_divergence(sc, probes, csv);
  } else if (opt.task == "residuals") {
    rows = detail::task_residuals(sc, probes, csv);
  } else if (opt.task == "phase-diagram") {
    rows = detail::task_phase_diagram(sc, opt, csv);
  } else if (opt.task == "state-equations") {
    rows = detail::task_state_equations(sc, csv);
  } else if (opt.task == "coexistence") {
    rows = detail::task_coexistence(sc, csv);
  } else if (opt.task == "simulate") {
    rows = detail::task_simulate(sc, opt, csv, log);
  }
  detail::OutputFile out(opt.out_dir, file);
  out.stream() << buffer.str();
  log << "wrote " << out.path() << " (" << rows << " rows)\n";
  return kExitOk;
}

/// Exit code for an exception escaping run_task.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ScenarioError*>(&e)) return kExitInput;
  return kExitDomain;
}

}  // namespace riemedia
