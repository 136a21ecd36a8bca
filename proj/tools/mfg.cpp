#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "mfg/driver.hpp"
#include "mfg/elliptic.hpp"

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mfg;
  RunConfig cfg;
  CLI::App app{"Best-response and eikonal flows for spatial payoff games"};
  app.set_config("--config", "", "key = value file with any of the options below");
  app.require_subcommand(1);
  app.fallthrough();

  std::string out = cfg.out.string();
  app.add_option("--preset", cfg.preset, "Problem preset: " + join(preset_names()))
      ->capture_default_str();
  app.add_option("--variant", cfg.variant, "best-response or eikonal")->capture_default_str();
  app.add_option("--dim", cfg.dim, "Override the preset dimension (1 or 2)");
  app.add_option("--grid", cfg.grid, "Intervals per axis (default 1000 in 1D, 100 in 2D)");
  app.add_option("--eps0", cfg.eps0, "Initial step mass");
  app.add_option("--eps-min", cfg.eps_min, "Smallest step mass before giving up")
      ->capture_default_str();
  app.add_option("--max-outer", cfg.max_outer, "Outer iteration cap")->capture_default_str();
  app.add_option("--tau", cfg.tau, "Nash-gap tolerance, a number or dx")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for random data")
      ->envname("MFG_SEED")
      ->capture_default_str();
  app.add_option("--fixed-eps", cfg.fixed_eps, "Run with a fixed step mass");
  app.add_option("--out", out, "Output directory")->envname("MFG_OUT_DIR")->capture_default_str();
  app.add_flag("--dump-eikonal", cfg.dump_eikonal, "Write the distance field of every step");
  app.add_option("--init", cfg.init, "Initial density: uniform or random")
      ->capture_default_str();
  app.add_option("--f", cfg.f_expr, "Linear model income f(x, y)");
  app.add_option("--P", cfg.p_expr, "Linear model potential P(x, y)");
  app.add_option("--K", cfg.k_expr, "Nonlinear model capacity K(x, y)");
  app.add_option("--mu", cfg.mu, "Diffusion coefficient")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Run the flow and write density.csv, iterations.csv");
  auto* refine = app.add_subcommand("refine", "Fixed-step refinement study, refinement.csv");
  refine->add_option("--levels", cfg.levels, "Number of consecutive level pairs")
      ->capture_default_str();
  refine->add_option("--horizon", cfg.horizon, "Transported mass to follow")
      ->capture_default_str();
  refine->add_option("--samples", cfg.samples, "Samples of the mass parameter")
      ->capture_default_str();
  auto* stress = app.add_subcommand("stress", "Random initial densities, stress.csv");
  stress->add_option("--seeds", cfg.seeds, "Number of seeds starting at --seed")
      ->capture_default_str();
  auto* trace = app.add_subcommand("trace", "Functional against transported mass, trace.csv");
  auto* validate = app.add_subcommand("validate", "Solver verification checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }
  cfg.out = out;

  try {
    if (solve->parsed()) return run_solve(cfg, std::cout);
    if (refine->parsed()) return run_refine(cfg, std::cout);
    if (stress->parsed()) return run_stress(cfg, std::cout);
    if (trace->parsed()) return run_trace(cfg, std::cout);
    if (validate->parsed()) return run_validate(cfg, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return exit_solver;
  }
  return exit_config;
}
