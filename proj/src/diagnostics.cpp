#include "mfg/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfg {

std::vector<TracePoint> functional_trace(const FlowResult& result, Variant variant) {
  const bool gap = variant == Variant::best_response;
  std::vector<TracePoint> out;
  out.reserve(result.records.size() + 1);
  out.push_back({0.0, gap ? result.initial_residual : result.initial_sup_theta});
  for (const auto& rec : result.records) {
    out.push_back({rec.mass_cum, gap ? rec.residual : rec.sup_theta});
  }
  return out;
}

RefinementStudy refinement_study(const PayoffSolver& solver, const Density& m0,
                                 const RefinementOptions& opts) {
  if (opts.pairs < 1) throw std::invalid_argument("refinement: need at least one pair");
  if (!(opts.eps0 > 0.0 && opts.eps0 <= 1.0)) {
    throw std::invalid_argument("refinement: eps0 must lie in (0, 1]");
  }
  if (!(opts.horizon > 0.0)) throw std::invalid_argument("refinement: horizon must be positive");
  if (opts.samples < 2) throw std::invalid_argument("refinement: need at least 2 samples");

  RefinementStudy study;
  study.eps0 = opts.eps0;
  std::vector<std::vector<Density>> paths;
  std::vector<std::vector<double>> moved;
  for (int k = 0; k <= opts.pairs; ++k) {
    const double eps = std::ldexp(opts.eps0, -k);
    FlowConfig cfg;
    cfg.variant = opts.variant;
    cfg.eps0 = eps;
    cfg.eps_min = std::min(eps, 1e-15);
    cfg.tau = opts.tau;
    cfg.fixed_eps = eps;
    cfg.max_outer = static_cast<int>(std::ceil(opts.horizon / eps - 1e-9));

    std::vector<Density> path{m0};
    std::vector<double> cum{0.0};
    const auto start = std::chrono::steady_clock::now();
    std::optional<FlowResult> run;
    try {
      run = run_flow(solver, m0, cfg,
                     [&](const IterationRecord& rec, const Density& m, std::span<const double>,
                         std::span<const double>) {
                       path.push_back(m);
                       cum.push_back(rec.mass_cum);
                     });
    } catch (const std::exception& e) {
      throw std::runtime_error("refinement level " + std::to_string(k) + " failed: " + e.what());
    }
    if (run->reason == Termination::infeasible) {
      throw std::runtime_error("refinement level " + std::to_string(k) +
                               " failed: step mass could not be placed");
    }
    RefinementLevel level;
    level.level = k;
    level.eps = eps;
    level.steps = static_cast<int>(run->records.size());
    level.transported = cum.back();
    level.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    level.reason = run->reason;
    study.levels.push_back(level);
    paths.push_back(std::move(path));
    moved.push_back(std::move(cum));
  }

  double horizon = study.levels.front().transported;
  for (const auto& level : study.levels) horizon = std::min(horizon, level.transported);
  study.t_grid.resize(opts.samples);
  for (int s = 0; s < opts.samples; ++s) {
    study.t_grid[s] = horizon * s / (opts.samples - 1);
  }

  const Grid& grid = solver.grid();
  // Last iterate whose cumulative transported mass does not exceed t.
  auto at = [&](int k, double t) -> const Density& {
    const auto& cum = moved[k];
    const auto it = std::upper_bound(cum.begin(), cum.end(), t * (1.0 + 1e-12) + 1e-15);
    return paths[k][static_cast<std::size_t>(it - cum.begin()) - 1];
  };
  for (int k = 0; k < opts.pairs; ++k) {
    double worst = 0.0;
    for (double t : study.t_grid) {
      worst = std::max(worst, tv_distance(at(k, t).values(), at(k + 1, t).values(), grid));
    }
    study.sup_tv.push_back(worst);
  }
  return study;
}

int trend_violations(std::span<const double> sup_tv) {
  int bad = 0;
  for (std::size_t k = 1; k < sup_tv.size(); ++k) {
    if (sup_tv[k] > sup_tv[k - 1]) ++bad;
  }
  return bad;
}

std::vector<StressRow> stress_test(const PayoffSolver& solver, FlowConfig cfg,
                                   std::span<const std::uint64_t> seeds) {
  const Grid& grid = solver.grid();
  if (grid.dim() != 1) throw std::invalid_argument("stress_test: 1D grids only");
  std::vector<StressRow> rows;
  for (std::uint64_t seed : seeds) {
    const Density m0 = random_density(seed, grid);
    for (Variant v : {Variant::best_response, Variant::eikonal}) {
      cfg.variant = v;
      const FlowResult r = run_flow(solver, m0, cfg);
      rows.push_back({seed, v, static_cast<int>(r.records.size()), r.converged,
                      r.final_residual()});
    }
  }
  return rows;
}

NashCertificate nash_certificate(const Density& m, std::span<const double> theta,
                                 const Grid& grid) {
  check_shape(m.values(), grid, "nash_certificate");
  check_shape(theta, grid, "nash_certificate");
  NashCertificate cert;
  cert.eps_nash = nash_gap(theta, m.values());
  const double top = *std::max_element(theta.begin(), theta.end());
  const double floor = top - cert.eps_nash - grid.spacing();
  const auto w = grid.weights();
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (theta[k] < floor) cert.support_violation += w[k] * m[k];
  }
  return cert;
}

double plateau_deviation(const ModelSpec& model, const Density& m,
                         std::span<const double> theta, double rel_threshold) {
  const double top = *std::max_element(theta.begin(), theta.end());
  double worst = 0.0;
  for (std::size_t k : support(m.values(), rel_threshold)) {
    worst = std::max(worst, std::abs(m[k] - model.plateau_height(k, top)));
  }
  return worst;
}

}  // namespace mfg
