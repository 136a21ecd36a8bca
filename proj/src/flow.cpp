#include "mfg/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfg/eikonal.hpp"

namespace mfg {

std::string_view to_string(Variant v) {
  return v == Variant::best_response ? "best-response" : "eikonal";
}

Variant parse_variant(std::string_view name) {
  if (name == "best-response" || name == "best_response" || name == "br") {
    return Variant::best_response;
  }
  if (name == "eikonal" || name == "gf") return Variant::eikonal;
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "' (expected best-response or eikonal)");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_outer: return "max_outer";
    case Termination::eps_exhausted: return "eps_exhausted";
    case Termination::infeasible: return "infeasible";
    case Termination::fixed_point: return "fixed_point";
  }
  return "unknown";
}

double nash_gap(std::span<const double> theta, std::span<const double> m,
                double rel_threshold) {
  if (theta.size() != m.size()) {
    throw std::invalid_argument("nash_gap: theta and m differ in size");
  }
  const auto nodes = support(m, rel_threshold);
  if (nodes.empty()) throw std::invalid_argument("nash_gap: density has empty support");
  const double top = *std::max_element(theta.begin(), theta.end());
  double low = top;
  for (std::size_t k : nodes) low = std::min(low, theta[k]);
  return top - low;
}

namespace {

struct OrderedTake {
  Field taken;
  double level = 0.0;
};

// Takes `amount` of quadrature mass from cap, visiting nodes in key order
// (lowest or highest first). Nodes sharing the crossing key are scaled by one
// common fraction so the taken mass matches `amount` to rounding.
OrderedTake take_ordered(std::span<const double> cap, std::span<const double> key,
                         bool highest_first, double amount, const Grid& grid) {
  const auto w = grid.weights();
  std::vector<std::size_t> order;
  order.reserve(cap.size());
  for (std::size_t k = 0; k < cap.size(); ++k) {
    if (cap[k] > 0.0) order.push_back(k);
  }
  auto before = [&](std::size_t a, std::size_t b) {
    return highest_first ? key[a] > key[b] : key[a] < key[b];
  };
  std::stable_sort(order.begin(), order.end(), before);

  // Tie groups over the sorted order with their cumulative masses.
  std::vector<std::size_t> group_start;
  std::vector<double> cumulative;
  double running = 0.0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (p == 0 || key[order[p]] != key[order[p - 1]]) {
      if (p > 0) cumulative.push_back(running);
      group_start.push_back(p);
    }
    running += w[order[p]] * cap[order[p]];
  }
  if (!order.empty()) cumulative.push_back(running);
  const double available = running;
  if (amount > available * (1.0 + 1e-12) + 1e-300) {
    throw MassShortfall("requested mass exceeds available mass", available);
  }

  OrderedTake out;
  out.taken.assign(cap.size(), 0.0);
  if (order.empty()) return out;
  // Bisection over the sorted group levels for the first cumulative >= amount.
  auto it = std::lower_bound(cumulative.begin(), cumulative.end(), amount);
  const std::size_t g = it == cumulative.end()
                            ? cumulative.size() - 1
                            : static_cast<std::size_t>(it - cumulative.begin());
  const std::size_t begin = group_start[g];
  const std::size_t end = g + 1 < group_start.size() ? group_start[g + 1] : order.size();
  const double mass_before = g == 0 ? 0.0 : cumulative[g - 1];
  const double group_mass = cumulative[g] - mass_before;
  const double fraction =
      std::clamp((amount - mass_before) / group_mass, 0.0, 1.0);
  for (std::size_t p = 0; p < begin; ++p) out.taken[order[p]] = cap[order[p]];
  for (std::size_t p = begin; p < end; ++p) {
    out.taken[order[p]] = fraction * cap[order[p]];
  }
  out.level = key[order[begin]];
  return out;
}

void check_selection_request(std::span<const double> m, double eps,
                             const Grid& grid) {
  if (!(eps > 0.0)) throw std::invalid_argument("selection: eps must be positive");
  const double mass = integrate(m, grid);
  if (eps > mass * (1.0 + 1e-12)) {
    throw std::invalid_argument("selection: eps exceeds the total mass");
  }
}

Selection finish_selection(std::span<const double> m, OrderedTake take) {
  Selection sel;
  sel.level = take.level;
  sel.plus.resize(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    sel.plus[k] = std::max(0.0, m[k] - take.taken[k]);
  }
  sel.minus = std::move(take.taken);
  return sel;
}

}  // namespace

Selection select_lowest_income(std::span<const double> m,
                               std::span<const double> theta, double eps,
                               const Grid& grid) {
  check_shape(m, grid, "select_lowest_income");
  check_shape(theta, grid, "select_lowest_income");
  check_selection_request(m, eps, grid);
  return finish_selection(m, take_ordered(m, theta, false, eps, grid));
}

Selection select_farthest(std::span<const double> m, std::span<const double> v,
                          double eps, const Grid& grid) {
  check_shape(m, grid, "select_farthest");
  check_shape(v, grid, "select_farthest");
  check_selection_request(m, eps, grid);
  bool off_target = false;
  for (std::size_t k = 0; k < m.size() && !off_target; ++k) {
    off_target = m[k] > 0.0 && v[k] > 0.0;
  }
  if (!off_target) {
    Selection sel;
    sel.minus.assign(m.size(), 0.0);
    sel.plus.assign(m.begin(), m.end());
    sel.empty = true;
    return sel;
  }
  return finish_selection(m, take_ordered(m, v, true, eps, grid));
}

Redistribution redistribute(std::span<const double> m_plus,
                            std::span<const double> theta,
                            const ModelSpec& model, double eps,
                            const Grid& grid, double tie_width) {
  check_shape(m_plus, grid, "redistribute");
  check_shape(theta, grid, "redistribute");
  if (!(eps > 0.0)) throw std::invalid_argument("redistribute: eps must be positive");
  if (!(tie_width >= 0.0)) throw std::invalid_argument("redistribute: negative tie width");
  Redistribution out;
  out.theta_bar = *std::max_element(theta.begin(), theta.end());
  Field room(theta.size());
  Field key(theta.begin(), theta.end());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    room[k] = std::max(0.0, model.plateau_height(k, out.theta_bar) - m_plus[k]);
    if (key[k] >= out.theta_bar - tie_width) key[k] = out.theta_bar;
  }
  OrderedTake take = take_ordered(room, key, true, eps, grid);
  out.nu = std::move(take.taken);
  out.level = take.level;
  return out;
}

StepOutcome flow_step(const PayoffSolver& solver, const Density& m,
                      std::span<const double> theta, double eps,
                      Variant variant, const StepOptions& opts) {
  const Grid& grid = solver.grid();
  StepOutcome out;
  const TargetSet target = extract_target(theta, opts.target_zeta);
  std::vector<char> on_target(m.size(), 0);
  for (std::size_t k : target.nodes) on_target[k] = 1;
  bool off_target = false;
  for (std::size_t k = 0; k < m.size() && !off_target; ++k) {
    off_target = !on_target[k] && m[k] > 0.0;
  }
  if (!off_target) {
    out.status = StepStatus::fixed_point;
    out.m_next = m;
    out.theta_next.assign(theta.begin(), theta.end());
    out.residual = nash_gap(theta, m.values(), opts.support_rel_threshold);
    return out;
  }

  Selection sel;
  if (variant == Variant::best_response) {
    sel = select_lowest_income(m.values(), theta, eps, grid);
  } else {
    out.distance = solve_eikonal(grid, target);
    sel = select_farthest(m.values(), out.distance, eps, grid);
  }

  Redistribution fill;
  try {
    fill = redistribute(sel.plus, theta, solver.model(), eps, grid, opts.fill_tie);
  } catch (const MassShortfall& e) {
    out.status = StepStatus::shortfall;
    out.absorbable = e.available();
    return out;
  }

  bool overlap = false;
  Field next(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    next[k] = sel.plus[k] + fill.nu[k];
    overlap = overlap || (sel.minus[k] > 0.0 && fill.nu[k] > 0.0);
  }
  out.overlap = overlap;
  if (overlap && opts.reject_overlap) {
    out.status = StepStatus::overlap;
    return out;
  }

  out.m_next = Density::adopt(std::move(next), grid);
  out.theta_next = solver.solve(out.m_next->values(), theta);
  out.residual = nash_gap(out.theta_next, out.m_next->values(),
                          opts.support_rel_threshold);
  out.tv_step = tv_distance(out.m_next->values(), m.values(), grid);
  return out;
}

void FlowConfig::validate() const {
  if (!(eps_min > 0.0) || !(eps_min <= eps0) || !(eps0 <= 1.0)) {
    throw std::invalid_argument("flow config: need 0 < eps_min <= eps0 <= 1");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("flow config: tau must be positive");
  if (max_outer < 1) throw std::invalid_argument("flow config: max_outer must be >= 1");
  if (fixed_eps && !(*fixed_eps > 0.0 && *fixed_eps <= 1.0)) {
    throw std::invalid_argument("flow config: fixed eps must lie in (0, 1]");
  }
  if (support_rel_threshold < 0.0 || support_rel_threshold >= 1.0) {
    throw std::invalid_argument("flow config: support threshold must lie in [0, 1)");
  }
  if ((target_zeta && !(*target_zeta >= 0.0)) || (fill_tie && !(*fill_tie >= 0.0))) {
    throw std::invalid_argument("flow config: tolerances must be nonnegative");
  }
}

FlowResult run_flow(const PayoffSolver& solver, const Density& m0,
                    const FlowConfig& cfg, const FlowObserver& observer) {
  cfg.validate();
  const Grid& grid = solver.grid();
  check_shape(m0.values(), grid, "run_flow");

  Field theta = solver.solve(m0.values());
  FlowResult result{.m = m0, .theta = theta};
  result.initial_residual = nash_gap(theta, m0.values(), cfg.support_rel_threshold);
  result.initial_sup_theta = *std::max_element(theta.begin(), theta.end());

  StepOptions step_opts;
  step_opts.support_rel_threshold = cfg.support_rel_threshold;
  step_opts.target_zeta = cfg.target_zeta.value_or(cfg.tau);
  step_opts.fill_tie = cfg.fill_tie.value_or(0.01 * cfg.tau);
  step_opts.reject_overlap = cfg.reject_overlap && !cfg.fixed_eps;

  double residual = result.initial_residual;
  double mass_cum = 0.0;
  result.reason = Termination::max_outer;
  for (int j = 0; residual > cfg.tau; ++j) {
    if (j >= cfg.max_outer) {
      result.reason = Termination::max_outer;
      break;
    }
    IterationRecord rec;
    rec.iter = j + 1;
    std::optional<StepOutcome> accepted;
    bool fixed_point = false;
    double eps = cfg.fixed_eps.value_or(cfg.eps0);
    int caps = 0;
    while (eps > cfg.eps_min || cfg.fixed_eps) {
      StepOutcome trial = flow_step(solver, result.m, result.theta, eps,
                                    cfg.variant, step_opts);
      if (trial.status == StepStatus::fixed_point) {
        fixed_point = true;
        break;
      }
      if (cfg.fixed_eps) {
        // Shrink to what the plateau can absorb; the smaller removal leaves
        // less room, so this may take a few rounds.
        if (trial.status == StepStatus::shortfall && trial.absorbable > cfg.eps_min &&
            trial.absorbable < eps && ++caps <= 100) {
          eps = trial.absorbable * (1.0 - 1e-9);
          continue;
        }
        if (trial.status == StepStatus::accepted_candidate) accepted = std::move(trial);
        break;
      }
      if (trial.status == StepStatus::accepted_candidate && trial.residual < residual) {
        if (trial.overlap) ++rec.overlaps;
        accepted = std::move(trial);
        break;
      }
      if (trial.status == StepStatus::overlap) ++rec.overlaps;
      eps *= 0.5;
      ++rec.halvings;
    }
    if (fixed_point) {
      result.reason = Termination::fixed_point;
      break;
    }
    if (!accepted) {
      result.reason = cfg.fixed_eps ? Termination::infeasible : Termination::eps_exhausted;
      break;
    }

    mass_cum += eps;
    rec.eps = eps;
    rec.residual = accepted->residual;
    rec.tv_step = accepted->tv_step;
    rec.mass_cum = mass_cum;
    rec.sup_theta = *std::max_element(accepted->theta_next.begin(),
                                      accepted->theta_next.end());
    rec.min_theta_support = rec.sup_theta - accepted->residual;
    result.m = std::move(*accepted->m_next);
    result.theta = std::move(accepted->theta_next);
    residual = accepted->residual;
    result.records.push_back(rec);
    if (observer) observer(rec, result.m, result.theta, accepted->distance);
  }
  result.converged = residual <= cfg.tau;
  if (result.converged) result.reason = Termination::converged;
  return result;
}

FlowResult run_flow(const ModelSpec& model, const Grid& grid, const Density& m0,
                    const FlowConfig& cfg) {
  return run_flow(PayoffSolver(model, grid), m0, cfg);
}

}  // namespace mfg
