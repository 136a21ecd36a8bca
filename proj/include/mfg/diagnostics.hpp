#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfg/elliptic.hpp"
#include "mfg/flow.hpp"
#include "mfg/measures.hpp"

namespace mfg {

struct TracePoint {
  double t = 0.0;  // cumulative transported mass
  double phi = 0.0;
};

/// Objective of each variant against transported mass, starting at t = 0:
/// the Nash gap for best_response, sup theta for eikonal.
std::vector<TracePoint> functional_trace(const FlowResult& result, Variant variant);

struct RefinementLevel {
  int level = 0;
  double eps = 0.0;
  int steps = 0;
  double transported = 0.0;
  double seconds = 0.0;
  Termination reason = Termination::max_outer;
};

struct RefinementStudy {
  double eps0 = 0.0;
  std::vector<RefinementLevel> levels;
  /// sup over t_grid of TV(m_k(t), m_{k+1}(t)), one entry per consecutive pair.
  std::vector<double> sup_tv;
  std::vector<double> t_grid;
};

struct RefinementOptions {
  Variant variant = Variant::best_response;
  double eps0 = 0.1;
  /// Number of consecutive-level comparisons; levels 0..pairs are run.
  int pairs = 6;
  /// Each level runs at most ceil(horizon / eps_k) steps.
  double horizon = 1.0;
  int samples = 100;
  double tau = 1e-3;
};

/// Runs the flow with fixed eps0 / 2^k for every level and compares the
/// trajectories m_k(t), the last iterate whose cumulative transported mass is
/// at most t (m^{floor(t / eps_k)} when no step was cut down), on a uniform
/// grid covering [0, min over levels of the transported mass].
/// Throws std::runtime_error naming the level when a level run fails.
RefinementStudy refinement_study(const PayoffSolver& solver, const Density& m0,
                                 const RefinementOptions& opts);

/// Number of k >= 1 with sup_tv[k] > sup_tv[k-1].
int trend_violations(std::span<const double> sup_tv);

struct StressRow {
  std::uint64_t seed = 0;
  Variant variant = Variant::best_response;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
};

/// Both variants from random_density(seed) for every seed, seed-major order.
std::vector<StressRow> stress_test(const PayoffSolver& solver, FlowConfig cfg,
                                   std::span<const std::uint64_t> seeds);

struct NashCertificate {
  double eps_nash = 0.0;
  /// Mass of m outside {theta >= max theta - eps_nash - dx}.
  double support_violation = 0.0;
};

NashCertificate nash_certificate(const Density& m, std::span<const double> theta,
                                 const Grid& grid);

/// max over supp(m) of |m - plateau height at max theta|.
double plateau_deviation(const ModelSpec& model, const Density& m,
                         std::span<const double> theta,
                         double rel_threshold = kDefaultSupportThreshold);

}  // namespace mfg
