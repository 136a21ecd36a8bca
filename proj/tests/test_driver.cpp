#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfg/driver.hpp"

using namespace mfg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfg_driver_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("presets resolve") {
  for (const auto& name : preset_names()) {
    RunConfig cfg;
    cfg.preset = name;
    cfg.grid = 20;
    CAPTURE(name);
    const Problem p = build_problem(cfg);
    CHECK(p.grid.intervals() == 20);
    const FlowConfig fc = flow_config(cfg, p);
    CHECK(fc.tau == p.grid.spacing());
    if (p.grid.dim() == 1) CHECK(fc.eps0 == 0.1);
  }
  RunConfig cfg;
  cfg.preset = "linear-gauss2d";
  const Problem lin = build_problem(cfg);
  CHECK(lin.grid.dim() == 2);
  CHECK(lin.grid.intervals() == 100);
  CHECK(flow_config(cfg, lin).eps0 == 0.5);
  cfg.preset = "nonlinear-gauss2d";
  CHECK(flow_config(cfg, build_problem(cfg)).eps0 == 0.25);
}

TEST_CASE("random cosine preset depends on the seed") {
  RunConfig cfg;
  cfg.preset = "linear-randcos2d";
  cfg.grid = 10;
  const Problem a = build_problem(cfg);
  const Problem b = build_problem(cfg);
  cfg.seed = 2;
  const Problem c = build_problem(cfg);
  CHECK(a.model.f == b.model.f);
  CHECK(a.model.f != c.model.f);
  CHECK(a.description != c.description);
}

TEST_CASE("configuration errors") {
  RunConfig cfg;
  cfg.preset = "nope";
  CHECK_THROWS_AS(build_problem(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.f_expr = "4*x +";
  CHECK_THROWS_AS(build_problem(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.k_expr = "4";
  CHECK_THROWS_AS(build_problem(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.f_expr = "-1";
  CHECK_THROWS_AS(build_problem(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.tau = "small";
  CHECK_THROWS_AS(flow_config(cfg, build_problem(cfg)), ConfigError);
  cfg = RunConfig{};
  cfg.variant = "newton";
  CHECK_THROWS_AS(flow_config(cfg, build_problem(cfg)), ConfigError);
  cfg = RunConfig{};
  cfg.grid = 1;
  CHECK_THROWS_AS(build_problem(cfg), ConfigError);
}

TEST_CASE("overrides replace the preset coefficients") {
  RunConfig cfg;
  cfg.f_expr = "2";
  cfg.p_expr = "0.5";
  cfg.grid = 10;
  const Problem p = build_problem(cfg);
  for (double v : p.model.f) CHECK(v == 2.0);
  cfg.tau = "1e-4";
  CHECK(flow_config(cfg, p).tau == 1e-4);
}

TEST_CASE("solve writes its CSVs") {
  RunConfig cfg;
  cfg.out = scratch("solve");
  cfg.grid = 200;
  std::ostringstream log;
  CHECK(run_solve(cfg, log) == exit_ok);
  CHECK(log.str().find("converged") != std::string::npos);
  const auto density = lines(cfg.out / "density.csv");
  REQUIRE(density.size() == 202);
  CHECK(density[0] == "x,m,theta");
  const auto iters = lines(cfg.out / "iterations.csv");
  REQUIRE(iters.size() >= 2);
  CHECK(iters[0] == "iter,epsilon,residual,sup_theta,min_theta_supp,tv_step,mass_cum,halvings");
  CHECK(iters[1].rfind("1,0.10000000000000001,", 0) == 0);

  const std::string first = slurp(cfg.out / "density.csv");
  CHECK(run_solve(cfg, log) == exit_ok);
  CHECK(slurp(cfg.out / "density.csv") == first);
  fs::remove_all(cfg.out);
}

TEST_CASE("solve reports non-convergence and dumps distances") {
  RunConfig cfg;
  cfg.out = scratch("cos");
  cfg.preset = "linear-cos";
  cfg.grid = 200;
  cfg.fixed_eps = 1.0;
  cfg.eps0 = 1.0;
  std::ostringstream log;
  CHECK(run_solve(cfg, log) == exit_not_converged);
  CHECK(lines(cfg.out / "iterations.csv").size() == 101);

  cfg = RunConfig{};
  cfg.out = scratch("dump");
  cfg.grid = 100;
  cfg.variant = "eikonal";
  cfg.dump_eikonal = true;
  CHECK(run_solve(cfg, log) == exit_ok);
  const auto first = lines(cfg.out / "eikonal" / "step_0001.csv");
  REQUIRE(first.size() == 102);
  CHECK(first[0] == "x,v");
  fs::remove_all(cfg.out);
}

TEST_CASE("2D solve writes both coordinates") {
  RunConfig cfg;
  cfg.out = scratch("gauss");
  cfg.preset = "linear-gauss2d";
  cfg.grid = 20;
  std::ostringstream log;
  run_solve(cfg, log);
  const auto density = lines(cfg.out / "density.csv");
  REQUIRE(density.size() == 442);
  CHECK(density[0] == "x,y,m,theta");
  fs::remove_all(cfg.out);
}

TEST_CASE("trace, refine and stress outputs") {
  std::ostringstream log;
  RunConfig cfg;
  cfg.out = scratch("trace");
  cfg.preset = "linear-interp";
  cfg.grid = 200;
  CHECK(run_trace(cfg, log) == exit_ok);
  for (const char* sub : {"4x+1", "sin"}) {
    const auto t = lines(cfg.out / sub / "trace.csv");
    REQUIRE(t.size() >= 3);
    CHECK(t[0] == "t,phi");
    double prev = 1e300;
    for (std::size_t j = 1; j < t.size(); ++j) {
      const double phi = std::stod(t[j].substr(t[j].find(',') + 1));
      CHECK(phi < prev);
      prev = phi;
    }
  }
  fs::remove_all(cfg.out);

  cfg = RunConfig{};
  cfg.out = scratch("refine");
  cfg.grid = 100;
  cfg.levels = 2;
  cfg.horizon = 0.3;
  CHECK(run_refine(cfg, log) == exit_ok);
  const auto r = lines(cfg.out / "refinement.csv");
  REQUIRE(r.size() == 3);
  CHECK(r[0] == "level,epsilon,sup_tv");
  CHECK(r[1].rfind("0,0.10000000000000001,", 0) == 0);
  fs::remove_all(cfg.out);

  cfg = RunConfig{};
  cfg.out = scratch("stress");
  cfg.grid = 100;
  cfg.seeds = 2;
  run_stress(cfg, log);
  const auto s = lines(cfg.out / "stress.csv");
  REQUIRE(s.size() == 5);
  CHECK(s[0] == "seed,variant,iterations,converged,final_residual");
  CHECK(s[1].rfind("1,best-response,", 0) == 0);
  CHECK(s[2].rfind("1,eikonal,", 0) == 0);
  fs::remove_all(cfg.out);

  cfg.preset = "linear-gauss2d";
  CHECK_THROWS_AS(run_stress(cfg, log), ConfigError);
}

TEST_CASE("validation suite passes") {
  for (const auto& c : validation_suite()) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("format_double keeps 17 digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
}
