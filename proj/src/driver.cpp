#include "mfg/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>

#include "mfg/diagnostics.hpp"
#include "mfg/eikonal.hpp"
#include "mfg/expr.hpp"
#include "mfg/measures.hpp"

namespace mfg {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

struct PresetDef {
  const char* name;
  int dim;
  ModelKind kind;
  const char* coefficient;  // f (linear) or K (nonlinear)
  const char* potential;    // P, linear only
};

constexpr const char* kFourX = "4*x";
constexpr const char* kSin = "max(0, 9*x*sin(5*pi*x))";
constexpr const char* kCos = "15*(cos(2*pi*x) + 1)";
constexpr const char* kGauss = "5*exp(-((x-1)^2 + (y-1)^2)/0.5)";

const PresetDef kPresets[] = {
    {"linear-4x", 1, ModelKind::linear, kFourX, "0.5"},
    {"linear-sin", 1, ModelKind::linear, kSin, "0.5"},
    {"linear-cos", 1, ModelKind::linear, kCos, "0.5"},
    {"nonlinear-4x", 1, ModelKind::nonlinear, kFourX, nullptr},
    {"nonlinear-sin", 1, ModelKind::nonlinear, kSin, nullptr},
    {"nonlinear-cos", 1, ModelKind::nonlinear, kCos, nullptr},
    {"linear-gauss2d", 2, ModelKind::linear, kGauss, "1"},
    {"nonlinear-gauss2d", 2, ModelKind::nonlinear, kGauss, nullptr},
    {"linear-randcos2d", 2, ModelKind::linear, nullptr, "1"},
    {"nonlinear-randcos2d", 2, ModelKind::nonlinear, nullptr, nullptr},
};

// Functional-decay cases run together by the linear-interp preset.
struct InterpCase {
  const char* label;
  const char* f;
};
const InterpCase kInterpCases[] = {{"4x+1", "4*x + 1"}, {"sin", kSin}};

// max(0, 4 sum_{i=1}^4 cos(a_i pi x) cos(b_i pi y)), a_i, b_i ~ U[0,10].
std::string random_cosine(std::uint64_t seed) {
  Rng rng(seed, 0x2d);
  std::string sum;
  for (int i = 0; i < 4; ++i) {
    const double a = rng.uniform(0.0, 10.0);
    const double b = rng.uniform(0.0, 10.0);
    if (i) sum += " + ";
    sum += "cos(" + format_double(a) + "*pi*x)*cos(" + format_double(b) + "*pi*y)";
  }
  return "max(0, 4*(" + sum + "))";
}

Field sample(const std::string& text, const Grid& grid, const char* what) {
  Expression e = [&] {
    try {
      return Expression::parse(text);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string(what) + ": " + err.what());
    }
  }();
  Field out = grid.sample([&](double x, double y) { return e(x, y); });
  for (double v : out) {
    if (!std::isfinite(v)) {
      throw ConfigError(std::string(what) + " '" + text + "' is not finite on the grid");
    }
  }
  return out;
}

struct Case {
  Problem problem;
  fs::path dir;
};

Problem make_problem(const RunConfig& cfg, const std::string& name, int preset_dim,
                     ModelKind kind, std::string coefficient, std::string potential) {
  const int dim = cfg.dim.value_or(preset_dim);
  const int n = cfg.grid.value_or(default_intervals(dim));
  Grid grid = [&] {
    try {
      return make_grid(dim, n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!(cfg.mu > 0.0)) throw ConfigError("mu must be positive");

  std::string description;
  ModelSpec model;
  if (kind == ModelKind::linear) {
    if (!cfg.k_expr.empty()) throw ConfigError("--K applies to nonlinear presets only");
    if (!cfg.f_expr.empty()) coefficient = cfg.f_expr;
    if (!cfg.p_expr.empty()) potential = cfg.p_expr;
    model = ModelSpec::linear(cfg.mu, sample(potential, grid, "P"),
                              sample(coefficient, grid, "f"));
    description = "linear f = " + coefficient + ", P = " + potential;
  } else {
    if (!cfg.f_expr.empty() || !cfg.p_expr.empty()) {
      throw ConfigError("--f and --P apply to linear presets only");
    }
    if (!cfg.k_expr.empty()) coefficient = cfg.k_expr;
    model = ModelSpec::nonlinear(cfg.mu, sample(coefficient, grid, "K"));
    description = "nonlinear K = " + coefficient;
  }
  try {
    model.validate(grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return Problem{name, std::move(model), grid, std::move(description)};
}

std::vector<Case> resolve_cases(const RunConfig& cfg) {
  if (cfg.preset == "linear-interp") {
    std::vector<Case> cases;
    for (const auto& c : kInterpCases) {
      cases.push_back({make_problem(cfg, cfg.preset, 1, ModelKind::linear, c.f, "0.5"),
                       cfg.out / c.label});
    }
    return cases;
  }
  for (const auto& p : kPresets) {
    if (cfg.preset != p.name) continue;
    std::string coefficient = p.coefficient ? p.coefficient : random_cosine(cfg.seed);
    std::string potential = p.potential ? p.potential : "";
    return {{make_problem(cfg, p.name, p.dim, p.kind, coefficient, potential), cfg.out}};
  }
  throw ConfigError("unknown preset '" + cfg.preset + "'");
}

Density initial_density(const RunConfig& cfg, const Grid& grid) {
  if (cfg.init == "uniform") return Density::uniform(grid);
  if (cfg.init == "random") {
    if (grid.dim() != 1) throw ConfigError("random initial density is 1D only");
    return random_density(cfg.seed, grid);
  }
  throw ConfigError("unknown init '" + cfg.init + "' (expected uniform or random)");
}

Variant variant_of(const RunConfig& cfg) {
  try {
    return parse_variant(cfg.variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::ofstream open_csv(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_field_csv(const fs::path& path, const Grid& grid,
                     const std::vector<std::pair<const char*, std::span<const double>>>& cols) {
  auto out = open_csv(path);
  out << (grid.dim() == 2 ? "x,y" : "x");
  for (const auto& [name, _] : cols) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << format_double(grid.x(k));
    if (grid.dim() == 2) out << ',' << format_double(grid.y(k));
    for (const auto& [_, values] : cols) out << ',' << format_double(values[k]);
    out << '\n';
  }
}

void write_iterations(const fs::path& path, const FlowResult& r) {
  auto out = open_csv(path);
  out << "iter,epsilon,residual,sup_theta,min_theta_supp,tv_step,mass_cum,halvings\n";
  for (const auto& rec : r.records) {
    out << rec.iter << ',' << format_double(rec.eps) << ',' << format_double(rec.residual)
        << ',' << format_double(rec.sup_theta) << ',' << format_double(rec.min_theta_support)
        << ',' << format_double(rec.tv_step) << ',' << format_double(rec.mass_cum) << ','
        << rec.halvings << '\n';
  }
}

void log_run(std::ostream& log, const Case& c, const FlowConfig& fc, const FlowResult& r) {
  log << c.problem.name << " (" << c.problem.description << "), "
      << to_string(fc.variant) << ", grid " << c.problem.grid.intervals() << "^"
      << c.problem.grid.dim() << ": " << (r.converged ? "converged" : "not converged")
      << " [" << to_string(r.reason) << "] after " << r.records.size()
      << " iterations, residual " << format_double(r.final_residual()) << '\n';
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  names.emplace_back("linear-interp");
  return names;
}

Problem build_problem(const RunConfig& cfg) { return resolve_cases(cfg).front().problem; }

FlowConfig flow_config(const RunConfig& cfg, const Problem& problem) {
  FlowConfig fc;
  fc.variant = variant_of(cfg);
  const bool plane = problem.grid.dim() == 2;
  fc.eps0 = cfg.eps0.value_or(
      !plane ? 0.1 : (problem.model.kind == ModelKind::linear ? 0.5 : 0.25));
  fc.eps_min = cfg.eps_min;
  fc.max_outer = cfg.max_outer;
  if (cfg.tau == "dx") {
    fc.tau = problem.grid.spacing();
  } else {
    char* end = nullptr;
    fc.tau = std::strtod(cfg.tau.c_str(), &end);
    if (cfg.tau.empty() || *end != '\0') {
      throw ConfigError("tau must be a number or 'dx', got '" + cfg.tau + "'");
    }
  }
  fc.fixed_eps = cfg.fixed_eps;
  try {
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return fc;
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  bool all_converged = true;
  for (const Case& c : resolve_cases(cfg)) {
    const FlowConfig fc = flow_config(cfg, c.problem);
    const Density m0 = initial_density(cfg, c.problem.grid);
    const PayoffSolver solver(c.problem.model, c.problem.grid);
    FlowObserver dump;
    if (cfg.dump_eikonal && fc.variant == Variant::eikonal) {
      dump = [&](const IterationRecord& rec, const Density&, std::span<const double>,
                 std::span<const double> v) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%04d.csv", rec.iter);
        write_field_csv(c.dir / "eikonal" / name, c.problem.grid, {{"v", v}});
      };
    }
    const FlowResult r = run_flow(solver, m0, fc, dump);
    write_field_csv(c.dir / "density.csv", c.problem.grid,
                    {{"m", r.m.values()}, {"theta", r.theta}});
    write_iterations(c.dir / "iterations.csv", r);
    log_run(log, c, fc, r);
    all_converged = all_converged && r.converged;
  }
  return all_converged ? exit_ok : exit_not_converged;
}

int run_trace(const RunConfig& cfg, std::ostream& log) {
  bool all_converged = true;
  for (const Case& c : resolve_cases(cfg)) {
    const FlowConfig fc = flow_config(cfg, c.problem);
    const PayoffSolver solver(c.problem.model, c.problem.grid);
    const FlowResult r = run_flow(solver, initial_density(cfg, c.problem.grid), fc);
    auto out = open_csv(c.dir / "trace.csv");
    out << "t,phi\n";
    for (const auto& p : functional_trace(r, fc.variant)) {
      out << format_double(p.t) << ',' << format_double(p.phi) << '\n';
    }
    log_run(log, c, fc, r);
    all_converged = all_converged && r.converged;
  }
  return all_converged ? exit_ok : exit_not_converged;
}

int run_refine(const RunConfig& cfg, std::ostream& log) {
  if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (cfg.samples < 2) throw ConfigError("samples must be >= 2");
  for (const Case& c : resolve_cases(cfg)) {
    const FlowConfig fc = flow_config(cfg, c.problem);
    const PayoffSolver solver(c.problem.model, c.problem.grid);
    RefinementOptions opts;
    opts.variant = fc.variant;
    opts.eps0 = fc.eps0;
    opts.pairs = cfg.levels;
    opts.horizon = cfg.horizon;
    opts.samples = cfg.samples;
    opts.tau = fc.tau;
    const RefinementStudy study =
        refinement_study(solver, initial_density(cfg, c.problem.grid), opts);
    auto out = open_csv(c.dir / "refinement.csv");
    out << "level,epsilon,sup_tv\n";
    for (std::size_t k = 0; k < study.sup_tv.size(); ++k) {
      out << k << ',' << format_double(study.levels[k].eps) << ','
          << format_double(study.sup_tv[k]) << '\n';
    }
    log << c.problem.name << ", " << to_string(fc.variant) << ": " << study.sup_tv.size()
        << " level pairs over t in [0, " << format_double(study.t_grid.back())
        << "], trend violations " << trend_violations(study.sup_tv) << '\n';
    for (const auto& level : study.levels) {
      log << "  level " << level.level << " eps " << format_double(level.eps) << ": "
          << level.steps << " steps [" << to_string(level.reason) << "] in "
          << level.seconds << " s\n";
    }
  }
  return exit_ok;
}

int run_stress(const RunConfig& cfg, std::ostream& log) {
  if (cfg.seeds < 1) throw ConfigError("seeds must be >= 1");
  bool all_converged = true;
  for (const Case& c : resolve_cases(cfg)) {
    if (c.problem.grid.dim() != 1) throw ConfigError("stress runs are 1D only");
    const FlowConfig fc = flow_config(cfg, c.problem);
    const PayoffSolver solver(c.problem.model, c.problem.grid);
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < cfg.seeds; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
    const auto rows = stress_test(solver, fc, seeds);
    auto out = open_csv(c.dir / "stress.csv");
    out << "seed,variant,iterations,converged,final_residual\n";
    int converged = 0;
    for (const auto& row : rows) {
      out << row.seed << ',' << to_string(row.variant) << ',' << row.iterations << ','
          << (row.converged ? "true" : "false") << ',' << format_double(row.final_residual)
          << '\n';
      converged += row.converged;
    }
    log << c.problem.name << ": " << converged << " of " << rows.size()
        << " runs converged\n";
    all_converged = all_converged && converged == static_cast<int>(rows.size());
  }
  return all_converged ? exit_ok : exit_not_converged;
}

std::vector<Check> validation_suite() {
  std::vector<Check> checks;
  const double pi = std::numbers::pi;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // theta = 0.5 cos(pi x) [cos(pi y)] + 2 with m = 1, P = 0.5, mu = 0.1.
  for (int dim : {1, 2}) {
    const double mu = 0.1, P = 0.5, amp = 0.5, base = 2.0, m = 1.0;
    const double lambda = (dim == 1 ? 1.0 : 2.0) * pi * pi;
    std::vector<double> errors;
    const std::vector<int> ns = dim == 1 ? std::vector<int>{100, 200, 400}
                                         : std::vector<int>{25, 50, 100};
    for (int n : ns) {
      const Grid grid = make_grid(dim, n);
      auto shape = [&](double x, double y) {
        return std::cos(pi * x) * (dim == 2 ? std::cos(pi * y) : 1.0);
      };
      const Field exact = grid.sample([&](double x, double y) { return amp * shape(x, y) + base; });
      const Field f = grid.sample([&](double x, double y) {
        return (mu * lambda + P) * amp * shape(x, y) + P * base + m;
      });
      const ModelSpec model = ModelSpec::linear(mu, Field(grid.size(), P), f);
      const Field theta = PayoffSolver(model, grid).solve(Field(grid.size(), m));
      double err = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) err = std::max(err, std::abs(theta[k] - exact[k]));
      errors.push_back(err);
    }
    const double order = std::log2(errors[ns.size() - 2] / errors.back());
    add("manufactured solution order (" + std::to_string(dim) + "D)", order >= 1.9,
        "errors " + format_double(errors[0]) + ", " + format_double(errors[1]) + ", " +
            format_double(errors[2]) + "; order " + format_double(order));
  }

  {
    const Grid grid = make_grid(1, 200);
    const ModelSpec model = ModelSpec::linear(0.1, Field(grid.size(), 0.5), Field(grid.size(), 3.0));
    const Field theta = PayoffSolver(model, grid).solve(Field(grid.size(), 1.0));
    double err = 0.0;
    for (double t : theta) err = std::max(err, std::abs(t - 4.0));
    add("linear constant solution", err <= 1e-9, "max error " + format_double(err));
  }
  {
    const Grid grid = make_grid(1, 200);
    const ModelSpec model = ModelSpec::nonlinear(0.1, Field(grid.size(), 3.0));
    const Field theta = PayoffSolver(model, grid).solve(Field(grid.size(), 1.0));
    double err = 0.0;
    for (double t : theta) err = std::max(err, std::abs(t - 2.0));
    add("nonlinear constant solution", err <= 1e-6, "max error " + format_double(err));
  }
  {
    const Grid grid = make_grid(1, 1000);
    TargetSet target;
    target.nodes = {grid.index(100), grid.index(700)};
    const Field v = solve_eikonal(grid, target);
    const Field ref = brute_force_distance(grid, target);
    double err = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) err = std::max(err, std::abs(v[k] - ref[k]));
    add("eikonal distance (1D)", err <= 2.0 * grid.spacing(), "max error " + format_double(err));
  }
  {
    std::vector<double> errors;
    for (int n : {25, 50, 100}) {
      const Grid grid = make_grid(2, n);
      TargetSet target;
      target.nodes = {grid.index(n / 5, n / 5), grid.index(4 * n / 5, 3 * n / 5)};
      const Field v = solve_eikonal(grid, target);
      double err = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        double d = 1e300;
        for (std::size_t t : target.nodes) {
          d = std::min(d, std::hypot(grid.x(k) - grid.x(t), grid.y(k) - grid.y(t)));
        }
        err = std::max(err, std::abs(v[k] - d));
      }
      errors.push_back(err);
    }
    add("eikonal distance (2D) under refinement",
        errors[1] < errors[0] && errors[2] < errors[1],
        "errors " + format_double(errors[0]) + ", " + format_double(errors[1]) + ", " +
            format_double(errors[2]));
  }
  return checks;
}

int run_validate(const RunConfig&, std::ostream& log) {
  bool ok = true;
  for (const auto& c : validation_suite()) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? exit_ok : exit_not_converged;
}

}  // namespace mfg
