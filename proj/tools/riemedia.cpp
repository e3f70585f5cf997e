#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riemedia/cli.hpp"

namespace {

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--grid", "expected NxM");
  try {
    std::size_t used = 0;
    const unsigned long a = std::stoul(s.substr(0, x), &used);
    if (used != x) throw CLI::ValidationError("--grid", "expected NxM");
    const unsigned long b = std::stoul(s.substr(x + 1), &used);
    if (used != s.size() - x - 1 || a == 0 || b == 0) throw CLI::ValidationError("--grid", "expected NxM");
    return {a, b};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--grid", "expected NxM");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian media toolkit: geometry, thermodynamic state equations and equations of motion"};
  app.name("riemedia");
  riemedia::CliOptions opt;
  std::string grid;
  std::uint64_t seed = 0;
  const std::vector<std::string> tasks(riemedia::kTasks.begin(), riemedia::kTasks.end());
  app.add_option("task", opt.task, "christoffel | divergence | residuals | phase-diagram | state-equations | "
                                   "coexistence | simulate | verify")
      ->required()
      ->check(CLI::IsMember(tasks));
  app.add_option("--scenario", opt.scenario, "scenario file")->required();
  app.add_option("--out", opt.out_dir, "output directory (default: current directory)");
  auto* seed_opt = app.add_option("--seed", seed, "probe RNG seed (overrides [run] seed)");
  app.add_option("--grid", grid, "phase-diagram grid NxM (overrides [thermo] grid)");

  try {
    app.parse(argc, argv);
    if (!grid.empty()) opt.grid = parse_grid(grid);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return riemedia::kExitInput;
  }
  if (*seed_opt) opt.seed = seed;

  try {
    return riemedia::run_task(opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "riemedia: " << e.what() << '\n';
    return riemedia::exit_code_for(e);
  }
}
