#pragma once

// Scenario files: flat key = value pairs grouped under [section] headers.
//
//   # or ; starts a comment line
//   [chart]     space = r, phi         time = t
//               domain.r = (0.5, 2)    (one open interval per variable)
//   [constants] name = number          (substituted into every expression)
//   [metric]    g_ij = "expr"          (1-based; unset entries are 0, the
//                                       default metric is Euclidean)
//   [fields]    rho = "expr"  X_i = "expr"  T = "expr"
//   [closure]   kind = potential | newtonian
//               phi = "expr"                        (potential)
//               a11 a12 a22 b1 b2 = "expr"          (newtonian)
//               psi = "expr"                        (still-medium potential;
//                                                    fills b1, b2 when unset)
//               kappa_ij = "expr"  F_i = "expr"  S = "expr"
//   [thermo]    model = ideal | vdw   R = 1   n = 3
//               v_range = (0.4, 3)  T_range = (0.2, 1.5)  grid = 200x200
//               rho_range = (0.5, 2)  delta_range = (-1, 1)
//               samples = 100  curve_samples = 101
//   [simulate]  cells = 64 | 32x32  dt = 1e-3  steps = 500  snapshot_every = 0
//               (the grid box is the chart's spatial domains)
//   [run]       probes = 50  seed = 1  residual_tol = 1e-12
//
// Expression values may be quoted with double quotes.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "riemedia/chart.hpp"
#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/geometry.hpp"
#include "riemedia/motion.hpp"
#include "riemedia/parser.hpp"
#include "riemedia/thermo.hpp"

namespace riemedia {

struct ScenarioValue {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;  // 1-based column of the first character of text
};

using ScenarioSection = std::map<std::string, ScenarioValue, std::less<>>;

struct ClosureSpec {
  enum class Kind { potential, newtonian };
  Kind kind = Kind::potential;
  MediumClosure closure;
  std::optional<NewtonianCoefficients> newtonian;
  std::optional<PotentialStill> still;
  bool pressure_matched = false;  // b1, b2 both taken from pressure_matching(still)
};

struct ThermoSpec {
  std::optional<GasModel> model;  // gas-model checks and phase tasks need one
  double R = 1.0;
  double n = 3.0;
  std::pair<double, double> v_range{0.4, 3.0};
  std::pair<double, double> T_range{0.2, 1.5};
  std::size_t grid_v = 200;
  std::size_t grid_T = 200;
  std::pair<double, double> rho_range{0.5, 2.0};
  std::pair<double, double> delta_range{-1.0, 1.0};
  std::size_t samples = 100;
  std::size_t curve_samples = 101;
};

struct SimulateSpec {
  std::vector<std::size_t> cells;
  double dt = 1e-3;
  std::size_t steps = 100;
  std::size_t snapshot_every = 0;
};

struct Scenario {
  std::string name;
  Chart chart;
  bool has_chart = false;
  std::optional<MetricField> metric;
  std::optional<FlowState> fields;
  std::optional<ClosureSpec> closure;
  std::optional<ThermoSpec> thermo;
  std::optional<SimulateSpec> simulate;
  std::size_t probes = 50;
  std::uint64_t seed = 1;
  std::optional<double> residual_tol;

  /// Metric of the scenario, Euclidean when no [metric] section is given.
  MetricField metric_or_euclidean() const { return metric ? *metric : MetricField::euclidean(chart); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

class ScenarioReader {
 public:
  ScenarioReader(std::string name, std::string_view text) : name_(std::move(name)) { split(text); }

  Scenario build() {
    for (const auto& [section, _] : sections_) {
      static const std::set<std::string> known{"chart", "constants", "metric", "fields", "closure",
                                               "thermo", "simulate", "run"};
      if (!known.count(section)) fail_at(section_lines_[section], 1, "unknown section [" + section + "]");
    }
    Scenario sc;
    sc.name = name_;
    read_constants();
    read_run(sc);
    if (has("chart")) {
      read_chart(sc);
      sc.has_chart = true;
    }
    if (has("metric")) {
      require_chart(sc, "metric");
      read_metric(sc);
    }
    if (has("fields")) {
      require_chart(sc, "fields");
      read_fields(sc);
    }
    if (has("closure")) {
      require_chart(sc, "closure");
      read_closure(sc);
    }
    if (has("thermo")) read_thermo(sc);
    if (has("simulate")) {
      require_chart(sc, "simulate");
      read_simulate(sc);
    }
    for (const auto& [section, entries] : sections_)
      for (const auto& [key, v] : entries)
        if (!used_.count(section + "." + key)) fail_at(v.line, 1, "unknown key '" + key + "' in [" + section + "]");
    return sc;
  }

 private:
  [[noreturn]] void fail_at(std::size_t line, std::size_t column, const std::string& what) const {
    throw ScenarioError(name_ + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }

  void split(std::string_view text) {
    std::string current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(pos, end - pos);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++line_no;
      pos = end + 1;
      std::string line = trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail_at(line_no, 1, "malformed section header");
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (sections_.count(current)) fail_at(line_no, 1, "duplicate section [" + current + "]");
        sections_[current];
        section_lines_[current] = line_no;
        continue;
      }
      if (current.empty()) fail_at(line_no, 1, "key outside of any section");
      std::size_t eq = raw.find('=');
      if (eq == std::string_view::npos) fail_at(line_no, 1, "expected 'key = value'");
      std::string key = trim(raw.substr(0, eq));
      if (key.empty()) fail_at(line_no, 1, "empty key");
      std::size_t vstart = eq + 1;
      while (vstart < raw.size() && std::isspace(static_cast<unsigned char>(raw[vstart]))) ++vstart;
      std::string value = trim(raw.substr(vstart));
      std::size_t column = vstart + 1;
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
        ++column;
      }
      auto& sec = sections_[current];
      if (sec.count(key)) fail_at(line_no, 1, "duplicate key '" + key + "'");
      sec[key] = {value, line_no, column};
    }
  }

  bool has(const std::string& section) const { return sections_.count(section) != 0; }

  const ScenarioValue* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto it = s->second.find(key);
    if (it == s->second.end()) return nullptr;
    used_.insert(section + "." + key);
    return &it->second;
  }

  const ScenarioValue& require(const std::string& section, const std::string& key) {
    const ScenarioValue* v = find(section, key);
    if (!v) fail_at(section_lines_.at(section), 1, "missing key '" + key + "' in [" + section + "]");
    return *v;
  }

  void require_chart(const Scenario& sc, const char* section) const {
    if (!sc.has_chart) fail_at(section_lines_.at(section), 1, std::string("[") + section + "] needs a [chart] section");
  }

  double number(const ScenarioValue& v) const {
    const std::string& s = v.text;
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail_at(v.line, v.column, "expected a number");
    return x;
  }

  std::uint64_t unsigned_number(const ScenarioValue& v) const {
    const std::string& s = v.text;
    std::uint64_t x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      fail_at(v.line, v.column, "expected a non-negative integer");
    }
    return x;
  }

  std::pair<double, double> interval(const ScenarioValue& v) const {
    const std::string& s = v.text;
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') fail_at(v.line, v.column, "expected '(lo, hi)'");
    std::size_t comma = s.find(',');
    if (comma == std::string::npos) fail_at(v.line, v.column, "expected '(lo, hi)'");
    ScenarioValue lo{trim(std::string_view(s).substr(1, comma - 1)), v.line, v.column};
    ScenarioValue hi{trim(std::string_view(s).substr(comma + 1, s.size() - comma - 2)), v.line, v.column};
    double a = number(lo);
    double b = number(hi);
    if (!(a < b)) fail_at(v.line, v.column, "interval must satisfy lo < hi");
    return {a, b};
  }

  std::vector<std::size_t> dims(const ScenarioValue& v) const {
    std::vector<std::size_t> out;
    std::string_view s = v.text;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t x = s.find('x', pos);
      if (x == std::string_view::npos) x = s.size();
      ScenarioValue part{trim(s.substr(pos, x - pos)), v.line, v.column};
      std::uint64_t k = unsigned_number(part);
      if (k == 0) fail_at(v.line, v.column, "grid sizes must be positive");
      out.push_back(static_cast<std::size_t>(k));
      pos = x + 1;
    }
    return out;
  }

  Expr expression(const ScenarioValue& v) const {
    Expr e;
    try {
      e = parse(v.text);
    } catch (const ParseError& err) {
      std::size_t col = err.line() == 1 ? v.column + err.column() - 1 : err.column();
      std::string what = err.what();
      fail_at(v.line + err.line() - 1, col, what);
    }
    return simplify(substitute(e, constants_));
  }

  std::vector<std::string> names(const ScenarioValue& v) const {
    std::vector<std::string> out;
    std::stringstream ss(v.text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail_at(v.line, v.column, "empty variable name");
      out.push_back(item);
    }
    return out;
  }

  void read_constants() {
    if (!has("constants")) return;
    for (const auto& [key, v] : sections_.at("constants")) {
      used_.insert("constants." + key);
      constants_[key] = Expr(number(v));
    }
  }

  void read_run(Scenario& sc) {
    if (!has("run")) return;
    if (auto* v = find("run", "probes")) sc.probes = static_cast<std::size_t>(unsigned_number(*v));
    if (auto* v = find("run", "seed")) sc.seed = unsigned_number(*v);
    if (auto* v = find("run", "residual_tol")) sc.residual_tol = number(*v);
  }

  void read_chart(Scenario& sc) {
    const ScenarioValue& space = require("chart", "space");
    std::optional<std::string> time;
    if (auto* t = find("chart", "time")) time = trim(t->text);
    try {
      sc.chart = Chart(names(space), time);
    } catch (const GeometryError& e) {
      fail_at(space.line, space.column, e.what());
    }
    for (const auto& v : sc.chart.all_vars()) {
      const ScenarioValue& d = require("chart", "domain." + v);
      auto [lo, hi] = interval(d);
      sc.chart.set_domain(v, {lo, hi});
    }
  }

  void read_metric(Scenario& sc) {
    const std::size_t n = sc.chart.dim();
    ExprMatrix g = ExprMatrix::identity(n);
    bool any = false;
    std::map<std::pair<std::size_t, std::size_t>, const ScenarioValue*> given;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::string key = "g_" + std::to_string(i + 1) + std::to_string(j + 1);
        if (auto* v = find("metric", key)) {
          given[{i, j}] = v;
          any = true;
        }
      }
    if (any) g = ExprMatrix(n, Expr(0.0));
    for (auto [ij, v] : given) {
      auto [i, j] = ij;
      Expr e = expression(*v);
      if (given.count({j, i}) && i > j) {
        if (to_string(e) != to_string(expression(*given.at({j, i})))) {
          fail_at(v->line, v->column, "metric must be symmetric");
        }
      }
      g(i, j) = e;
      g(j, i) = e;
    }
    try {
      sc.metric = MetricField(sc.chart, g);
    } catch (const GeometryError& e) {
      fail_at(section_lines_.at("metric"), 1, e.what());
    }
  }

  void read_fields(Scenario& sc) {
    const std::size_t n = sc.chart.dim();
    FlowState f;
    f.chart = sc.chart;
    f.rho = expression(require("fields", "rho"));
    f.T = expression(require("fields", "T"));
    for (std::size_t i = 0; i < n; ++i) f.X.push_back(expression(require("fields", "X_" + std::to_string(i + 1))));
    const auto vars = sc.chart.all_vars();
    check_vars(f.rho, vars, require("fields", "rho"));
    check_vars(f.T, vars, require("fields", "T"));
    for (std::size_t i = 0; i < n; ++i) check_vars(f.X[i], vars, require("fields", "X_" + std::to_string(i + 1)));
    sc.fields = std::move(f);
  }

  void check_vars(const Expr& e, const std::vector<std::string>& allowed, const ScenarioValue& where) const {
    for (const auto& v : variables(e)) {
      if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        fail_at(where.line, where.column, "unknown symbol '" + v + "'");
      }
    }
  }

  void read_closure(Scenario& sc) {
    const std::size_t n = sc.chart.dim();
    ClosureSpec spec;
    const ScenarioValue& kind = require("closure", "kind");
    if (kind.text == "potential") {
      spec.kind = ClosureSpec::Kind::potential;
    } else if (kind.text == "newtonian") {
      spec.kind = ClosureSpec::Kind::newtonian;
    } else {
      fail_at(kind.line, kind.column, "closure kind must be 'potential' or 'newtonian'");
    }
    if (auto* v = find("closure", "psi")) {
      try {
        spec.still = PotentialStill(expression(*v));
      } catch (const ThermoError& e) {
        fail_at(v->line, v->column, e.what());
      }
    }
    try {
      if (spec.kind == ClosureSpec::Kind::potential) {
        const ScenarioValue& phi = require("closure", "phi");
        try {
          spec.closure.potential = PotentialMoving(n, expression(phi));
        } catch (const ThermoError& e) {
          fail_at(phi.line, phi.column, e.what());
        }
      } else {
        NewtonianCoefficients c;
        if (spec.still) {
          std::tie(c.b1, c.b2) = pressure_matching(*spec.still);
          const auto& sec = sections_.at("closure");
          spec.pressure_matched = !sec.count("b1") && !sec.count("b2");
        }
        auto coeff = [&](const char* key, Expr& slot) {
          if (auto* v = find("closure", key)) {
            slot = expression(*v);
            check_vars(slot, {kRho, kTemperature}, *v);
          }
        };
        coeff("a11", c.a11);
        coeff("a12", c.a12);
        coeff("a22", c.a22);
        coeff("b1", c.b1);
        coeff("b2", c.b2);
        spec.newtonian = c;
        spec.closure.potential = newtonian_potential(c, n);
      }
    } catch (const ThermoError& e) {
      fail_at(kind.line, kind.column, e.what());
    }
    const auto vars = sc.chart.all_vars();
    bool any_kappa = false;
    ExprMatrix kappa(n, Expr(0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (auto* v = find("closure", "kappa_" + std::to_string(i + 1) + std::to_string(j + 1))) {
          kappa(i, j) = expression(*v);
          check_vars(kappa(i, j), vars, *v);
          any_kappa = true;
        }
    if (any_kappa) spec.closure.conductivity = kappa;
    bool any_force = false;
    ExprVector force(n, Expr(0.0));
    for (std::size_t i = 0; i < n; ++i)
      if (auto* v = find("closure", "F_" + std::to_string(i + 1))) {
        force[i] = expression(*v);
        check_vars(force[i], vars, *v);
        any_force = true;
      }
    if (any_force) spec.closure.force = force;
    if (auto* v = find("closure", "S")) {
      spec.closure.source = expression(*v);
      check_vars(spec.closure.source, vars, *v);
    }
    sc.closure = std::move(spec);
  }

  void read_thermo(Scenario& sc) {
    ThermoSpec t;
    if (auto* v = find("thermo", "model")) {
      if (v->text == "ideal") {
        t.model = GasModel::ideal;
      } else if (v->text == "vdw") {
        t.model = GasModel::van_der_waals;
      } else {
        fail_at(v->line, v->column, "model must be 'ideal' or 'vdw'");
      }
    }
    if (auto* v = find("thermo", "R")) t.R = number(*v);
    if (auto* v = find("thermo", "n")) t.n = number(*v);
    if (auto* v = find("thermo", "v_range")) t.v_range = interval(*v);
    if (auto* v = find("thermo", "T_range")) t.T_range = interval(*v);
    if (auto* v = find("thermo", "rho_range")) t.rho_range = interval(*v);
    if (auto* v = find("thermo", "delta_range")) t.delta_range = interval(*v);
    if (auto* v = find("thermo", "grid")) {
      auto d = dims(*v);
      if (d.size() != 2) fail_at(v->line, v->column, "grid must be NxM");
      t.grid_v = d[0];
      t.grid_T = d[1];
    }
    if (auto* v = find("thermo", "samples")) t.samples = static_cast<std::size_t>(unsigned_number(*v));
    if (auto* v = find("thermo", "curve_samples")) t.curve_samples = static_cast<std::size_t>(unsigned_number(*v));
    sc.thermo = t;
  }

  void read_simulate(Scenario& sc) {
    SimulateSpec s;
    const ScenarioValue& cells = require("simulate", "cells");
    s.cells = dims(cells);
    if (s.cells.size() != sc.chart.dim()) fail_at(cells.line, cells.column, "cells must match the chart dimension");
    if (auto* v = find("simulate", "dt")) s.dt = number(*v);
    if (auto* v = find("simulate", "steps")) s.steps = static_cast<std::size_t>(unsigned_number(*v));
    if (auto* v = find("simulate", "snapshot_every")) {
      s.snapshot_every = static_cast<std::size_t>(unsigned_number(*v));
    }
    sc.simulate = s;
  }

  std::string name_;
  std::map<std::string, ScenarioSection, std::less<>> sections_;
  std::map<std::string, std::size_t> section_lines_;
  std::set<std::string> used_;
  std::map<std::string, Expr, std::less<>> constants_;
};

}  // namespace detail

inline Scenario parse_scenario(std::string_view text, std::string name = "<scenario>") {
  return detail::ScenarioReader(std::move(name), text).build();
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

/// Simulation setup from a scenario: the grid box is the product of the
/// spatial domains and the initial fields are [fields] at t = 0.
inline SimulationSetup simulation_setup(const Scenario& sc) {
  if (!sc.simulate) throw ScenarioError(sc.name + ": no [simulate] section");
  if (!sc.fields) throw ScenarioError(sc.name + ": simulation needs [fields]");
  if (!sc.closure) throw ScenarioError(sc.name + ": simulation needs [closure]");
  if (sc.metric) {
    ExprMatrix id = ExprMatrix::identity(sc.chart.dim());
    for (std::size_t i = 0; i < sc.chart.dim(); ++i)
      for (std::size_t j = 0; j < sc.chart.dim(); ++j)
        if (to_string(sc.metric->matrix()(i, j)) != to_string(id(i, j))) {
          throw ScenarioError(sc.name + ": simulation needs a flat (Euclidean) metric");
        }
  }
  SimulationSetup s;
  s.chart = sc.chart;
  for (std::size_t d = 0; d < sc.chart.dim(); ++d) {
    s.grid.cells.push_back(sc.simulate->cells[d]);
    s.grid.extent.push_back(sc.chart.domain(sc.chart.space_var(d)));
  }
  s.rho0 = sc.fields->rho;
  s.X0 = sc.fields->X;
  s.T0 = sc.fields->T;
  s.closure = sc.closure->closure;
  s.dt = sc.simulate->dt;
  s.steps = sc.simulate->steps;
  s.snapshot_every = sc.simulate->snapshot_every;
  return s;
}

}  // namespace riemedia
