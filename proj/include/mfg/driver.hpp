#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/elliptic.hpp"
#include "mfg/flow.hpp"
#include "mfg/grid.hpp"

namespace mfg {

enum ExitCode : int { exit_ok = 0, exit_not_converged = 2, exit_config = 3, exit_solver = 4 };

/// Bad or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a driver run needs. Unset optionals take per-preset defaults.
struct RunConfig {
  std::string preset = "linear-4x";
  /// Overrides for the preset coefficients, as expressions in x and y.
  std::string f_expr, p_expr, k_expr;
  std::optional<int> dim;
  std::optional<int> grid;
  std::string variant = "best-response";
  std::optional<double> eps0;
  double eps_min = 1e-15;
  int max_outer = 100;
  /// A number, or "dx" for the grid spacing.
  std::string tau = "dx";
  std::uint64_t seed = 1;
  std::optional<double> fixed_eps;
  std::filesystem::path out = "out";
  bool dump_eikonal = false;
  /// "uniform" or "random" (1D random_density from seed).
  std::string init = "uniform";
  double mu = 0.1;

  int levels = 6;
  double horizon = 1.0;
  int samples = 100;
  int seeds = 12;
};

struct Problem {
  std::string name;
  ModelSpec model;
  Grid grid;
  /// Coefficient description for the run log.
  std::string description;
};

/// Names accepted by --preset.
std::vector<std::string> preset_names();

/// Resolves the preset and overrides into a model on its grid.
/// linear-interp resolves to its first case. Throws ConfigError.
Problem build_problem(const RunConfig& cfg);

/// Flow settings for the problem: eps0 defaults to 0.1 in 1D, 0.5 (linear)
/// or 0.25 (nonlinear) in 2D; tau "dx" binds to the grid spacing.
FlowConfig flow_config(const RunConfig& cfg, const Problem& problem);

/// Subcommands. Each writes its CSVs under cfg.out, prints a summary to
/// `log`, and returns an ExitCode. Library errors propagate as exceptions.
int run_solve(const RunConfig& cfg, std::ostream& log);
int run_refine(const RunConfig& cfg, std::ostream& log);
int run_stress(const RunConfig& cfg, std::ostream& log);
int run_trace(const RunConfig& cfg, std::ostream& log);
int run_validate(const RunConfig& cfg, std::ostream& log);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Solver verification: manufactured-solution order of the linear solver,
/// constant solutions of both models, eikonal against brute force.
std::vector<Check> validation_suite();

/// %.17g
std::string format_double(double v);

}  // namespace mfg
