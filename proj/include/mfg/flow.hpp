#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/elliptic.hpp"
#include "mfg/grid.hpp"
#include "mfg/measures.hpp"

namespace mfg {

/// best_response relocates the lowest-income mass; eikonal relocates the
/// mass farthest (in distance) from the payoff maximisers.
enum class Variant { best_response, eikonal };

std::string_view to_string(Variant v);
/// Accepts "best-response"/"best_response"/"br" and "eikonal"/"gf".
Variant parse_variant(std::string_view name);

/// Nash gap: max theta - min over supp(m) of theta.
double nash_gap(std::span<const double> theta, std::span<const double> m,
                double rel_threshold = kDefaultSupportThreshold);

/// Requested mass exceeds what the field can supply.
class MassShortfall : public std::runtime_error {
 public:
  MassShortfall(const std::string& what, double available)
      : std::runtime_error(what), available_(available) {}
  double available() const { return available_; }

 private:
  double available_;
};

struct Selection {
  Field minus;  // removed mass, integral == eps
  Field plus;   // m - minus
  double level = 0.0;
  /// select_farthest only: every bit of mass already sits at distance 0.
  bool empty = false;
};

/// Removes mass eps from the lowest values of theta: minus = m on
/// {theta < eta}, a common fraction of m on the tie group {theta == eta}.
/// Throws std::invalid_argument unless 0 < eps <= mass of m.
Selection select_lowest_income(std::span<const double> m,
                               std::span<const double> theta, double eps,
                               const Grid& grid);

/// As select_lowest_income but takes the largest distances {v >= eta}.
/// Reports empty (and removes nothing) when m has no mass where v > 0.
Selection select_farthest(std::span<const double> m, std::span<const double> v,
                          double eps, const Grid& grid);

struct Redistribution {
  Field nu;
  double level = 0.0;      // C
  double theta_bar = 0.0;  // max theta
};

/// Places mass eps on the highest-payoff nodes {theta >= C}, filling each to
/// the plateau height of the model (clamped at zero): nu = (h(theta_bar) -
/// m_plus)_+ with a common fraction on the crossing tie group.
/// Nodes within tie_width of max theta form one group and are filled
/// together. Throws MassShortfall when the whole domain can absorb less than
/// eps.
Redistribution redistribute(std::span<const double> m_plus,
                            std::span<const double> theta,
                            const ModelSpec& model, double eps,
                            const Grid& grid, double tie_width = 0.0);

struct StepOptions {
  double support_rel_threshold = kDefaultSupportThreshold;
  std::optional<double> target_zeta;
  double fill_tie = 0.0;
  /// Treat a removal region touching the refill as a failed trial.
  bool reject_overlap = false;
};

enum class StepStatus { accepted_candidate, fixed_point, shortfall, overlap };

struct StepOutcome {
  StepStatus status = StepStatus::accepted_candidate;
  std::optional<Density> m_next;
  Field theta_next;
  double residual = 0.0;
  double tv_step = 0.0;
  /// Some node was both emptied and refilled.
  bool overlap = false;
  /// Eikonal variant: distance field used for the selection.
  Field distance;
  /// Shortfall only: mass the refill could have placed.
  double absorbable = 0.0;
};

/// One trial move of size eps from (m, theta). Solves the payoff of the new
/// density; the caller decides acceptance.
StepOutcome flow_step(const PayoffSolver& solver, const Density& m,
                      std::span<const double> theta, double eps,
                      Variant variant, const StepOptions& opts = {});

struct FlowConfig {
  Variant variant = Variant::best_response;
  double eps0 = 0.1;
  double eps_min = 1e-15;
  int max_outer = 100;
  double tau = 1e-3;
  double support_rel_threshold = kDefaultSupportThreshold;
  /// When set every step uses this mass and is accepted unconditionally.
  std::optional<double> fixed_eps;
  /// Argmax tolerance for the eikonal target; tau when unset.
  std::optional<double> target_zeta;
  /// Width of the top tie group in the refill; tau / 100 when unset.
  std::optional<double> fill_tie;
  bool reject_overlap = false;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double eps = 0.0;
  double residual = 0.0;
  double sup_theta = 0.0;
  double min_theta_support = 0.0;
  double tv_step = 0.0;
  double mass_cum = 0.0;
  int halvings = 0;
  /// Trials (rejected or accepted) where removal and refill shared a node.
  int overlaps = 0;
};

enum class Termination { converged, max_outer, eps_exhausted, infeasible, fixed_point };
std::string_view to_string(Termination t);

struct FlowResult {
  Density m;
  Field theta;
  bool converged = false;
  Termination reason = Termination::max_outer;
  double initial_residual = 0.0;
  double initial_sup_theta = 0.0;
  std::vector<IterationRecord> records{};

  double final_residual() const {
    return records.empty() ? initial_residual : records.back().residual;
  }
};

/// Called with (record, density, theta, distance-or-empty) after every
/// accepted step.
using FlowObserver = std::function<void(const IterationRecord&, const Density&,
                                        std::span<const double>,
                                        std::span<const double>)>;

/// Runs the minimizing-movement flow until the Nash gap is <= tau.
///
/// Adaptive mode restarts every outer iteration at eps0 and halves until a
/// trial strictly lowers the gap; it stops when eps falls to eps_min.
/// Fixed mode accepts every step and stops only on convergence, max_outer,
/// or when the plateau can absorb no more than eps_min. A step larger than
/// the plateau can absorb is cut down to the absorbable mass; records carry
/// the mass actually moved.
FlowResult run_flow(const PayoffSolver& solver, const Density& m0,
                    const FlowConfig& cfg, const FlowObserver& observer = {});

FlowResult run_flow(const ModelSpec& model, const Grid& grid, const Density& m0,
                    const FlowConfig& cfg);

}  // namespace mfg
