#include "mfg/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mfg {

namespace {

double max_abs(std::span<const double> v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Trapezoid weight along one axis, including the spacing.
double axis_weight(int i, int n, double h) {
  return (i == 0 || i == n) ? 0.5 * h : h;
}

}  // namespace

ModelSpec ModelSpec::linear(double mu, Field P, Field f) {
  ModelSpec spec;
  spec.kind = ModelKind::linear;
  spec.mu = mu;
  spec.P = std::move(P);
  spec.f = std::move(f);
  return spec;
}

ModelSpec ModelSpec::nonlinear(double mu, Field K) {
  ModelSpec spec;
  spec.kind = ModelKind::nonlinear;
  spec.mu = mu;
  spec.K = std::move(K);
  return spec;
}

void ModelSpec::validate(const Grid& grid) const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("model: viscosity mu must be positive");
  }
  if (kind == ModelKind::linear) {
    check_shape(P, grid, "model P");
    check_shape(f, grid, "model f");
    if (!all_finite(P) || !all_finite(f)) {
      throw std::invalid_argument("model: P and f must be finite");
    }
    if (*std::min_element(P.begin(), P.end()) < 0.0 ||
        *std::min_element(f.begin(), f.end()) < 0.0) {
      throw std::invalid_argument("model: P and f must be nonnegative");
    }
    if (!(integrate(P, grid) > 0.0) || !(integrate(f, grid) > 0.0)) {
      throw std::invalid_argument("model: P and f must not vanish identically");
    }
  } else {
    check_shape(K, grid, "model K");
    if (!all_finite(K)) throw std::invalid_argument("model: K must be finite");
  }
}

double ModelSpec::plateau_height(std::size_t node, double theta_bar) const {
  if (kind == ModelKind::linear) return f[node] - P[node] * theta_bar;
  return K[node] - theta_bar;
}

Field apply_laplacian(std::span<const double> u, const Grid& grid) {
  check_shape(u, grid, "apply_laplacian");
  const int n = grid.intervals();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  Field out(u.size());
  auto second_diff = [n](double left, double mid, double right, int i) {
    if (i == 0) return 2.0 * (right - mid);
    if (i == n) return 2.0 * (left - mid);
    return left - 2.0 * mid + right;
  };
  if (grid.dim() == 1) {
    for (int i = 0; i <= n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i < n ? u[i + 1] : 0.0;
      out[i] = second_diff(left, u[i], right, i) * inv_h2;
    }
    return out;
  }
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const std::size_t k = grid.index(i, j);
      const double west = i > 0 ? u[k - 1] : 0.0;
      const double east = i < n ? u[k + 1] : 0.0;
      const double south = j > 0 ? u[grid.index(i, j - 1)] : 0.0;
      const double north = j < n ? u[grid.index(i, j + 1)] : 0.0;
      out[k] = (second_diff(west, u[k], east, i) +
                second_diff(south, u[k], north, j)) *
               inv_h2;
    }
  }
  return out;
}

double pde_residual(const ModelSpec& model, std::span<const double> m,
                    std::span<const double> theta, const Grid& grid) {
  check_shape(m, grid, "pde_residual");
  check_shape(theta, grid, "pde_residual");
  const Field lap = apply_laplacian(theta, grid);
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    double r = -model.mu * lap[k];
    if (model.kind == ModelKind::linear) {
      r += model.P[k] * theta[k] - model.f[k] + m[k];
    } else {
      r -= theta[k] * (model.K[k] - theta[k]) - m[k] * theta[k];
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

// ---------------------------------------------------------------------------

struct ScreenedPoisson::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
  std::vector<double> weights;
};

ScreenedPoisson::ScreenedPoisson(const Grid& grid, double mu,
                                 std::span<const double> shift)
    : impl_(std::make_unique<Impl>()) {
  check_shape(shift, grid, "ScreenedPoisson shift");
  const int n = grid.intervals();
  const double h = grid.spacing();
  const double c = mu / (h * h);
  const auto size = static_cast<Eigen::Index>(grid.size());

  auto& w = impl_->weights;
  w.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double wk = axis_weight(grid.ix(k), n, h);
    if (grid.dim() == 2) wk *= axis_weight(grid.iy(k), n, h);
    w[k] = wk;
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(grid.size() * (grid.dim() == 2 ? 5 : 3));
  auto couple = [&](std::size_t k, std::size_t other, int i) {
    const double factor = (i == 0 || i == n) ? 2.0 : 1.0;
    entries.emplace_back(static_cast<Eigen::Index>(k),
                         static_cast<Eigen::Index>(other), -w[k] * c * factor);
  };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int i = grid.ix(k);
    double diag = shift[k] + 2.0 * c;
    if (i > 0) couple(k, k - 1, i);
    if (i < n) couple(k, k + 1, i);
    if (grid.dim() == 2) {
      const int j = grid.iy(k);
      const std::size_t stride = static_cast<std::size_t>(n + 1);
      diag += 2.0 * c;
      if (j > 0) couple(k, k - stride, j);
      if (j < n) couple(k, k + stride, j);
    }
    entries.emplace_back(static_cast<Eigen::Index>(k),
                         static_cast<Eigen::Index>(k), w[k] * diag);
  }
  Eigen::SparseMatrix<double> mat(size, size);
  mat.setFromTriplets(entries.begin(), entries.end());
  impl_->factor.compute(mat);
  if (impl_->factor.info() != Eigen::Success) {
    throw SolverFailure("screened Poisson operator is singular");
  }
}

ScreenedPoisson::~ScreenedPoisson() = default;
ScreenedPoisson::ScreenedPoisson(ScreenedPoisson&&) noexcept = default;
ScreenedPoisson& ScreenedPoisson::operator=(ScreenedPoisson&&) noexcept = default;

Field ScreenedPoisson::solve(std::span<const double> rhs) const {
  const auto& w = impl_->weights;
  Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    b[static_cast<Eigen::Index>(k)] = w[k] * rhs[k];
  }
  Eigen::VectorXd x = impl_->factor.solve(b);
  if (impl_->factor.info() != Eigen::Success) {
    throw SolverFailure("screened Poisson back-substitution failed");
  }
  return Field(x.data(), x.data() + x.size());
}

std::span<const double> ScreenedPoisson::energy_weights() const {
  return impl_->weights;
}

// ---------------------------------------------------------------------------

void NonlinearSolveOptions::validate() const {
  if (!(grad_tol > 0.0) || max_iters < 1 || !(init_floor > 0.0)) {
    throw std::invalid_argument(
        "nonlinear options: need grad_tol > 0, max_iters >= 1, init_floor > 0");
  }
}

PayoffSolver::PayoffSolver(ModelSpec model, const Grid& grid,
                           NonlinearSolveOptions opts)
    : model_(std::move(model)), grid_(grid), opts_(opts) {
  model_.validate(grid_);
  if (model_.kind == ModelKind::linear) {
    linear_op_.emplace(grid_, model_.mu, model_.P);
  } else {
    opts_.validate();
    preconditioner_shift_ = std::max(1.0, max_abs(model_.K));
    preconditioner_.emplace(grid_, model_.mu,
                            Field(grid_.size(), preconditioner_shift_));
  }
}

Field PayoffSolver::solve(std::span<const double> m,
                          std::optional<std::span<const double>> warm_start) const {
  check_shape(m, grid_, "payoff solve");
  if (model_.kind == ModelKind::linear) return solve_linear(m);
  NonlinearSolution sol = solve_nonlinear(m, warm_start);
  if (!sol.converged) {
    throw SolverFailure("nonlinear payoff solve stalled after " +
                        std::to_string(sol.iterations) +
                        " iterations, residual " + std::to_string(sol.residual));
  }
  return std::move(sol.theta);
}

Field PayoffSolver::solve_linear(std::span<const double> m) const {
  Field rhs(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) rhs[k] = model_.f[k] - m[k];
  Field theta = linear_op_->solve(rhs);
  const double scale = std::max(1.0, max_abs(rhs));
  double res = pde_residual(model_, m, theta, grid_);
  if (res > 1e-9 * scale) {
    // One step of iterative refinement.
    const Field lap = apply_laplacian(theta, grid_);
    Field defect(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
      defect[k] = rhs[k] - (-model_.mu * lap[k] + model_.P[k] * theta[k]);
    }
    const Field corr = linear_op_->solve(defect);
    for (std::size_t k = 0; k < m.size(); ++k) theta[k] += corr[k];
    res = pde_residual(model_, m, theta, grid_);
  }
  if (!(res <= 1e-9 * scale) || !all_finite(theta)) {
    throw SolverFailure("linear payoff solve residual " + std::to_string(res) +
                        " exceeds tolerance");
  }
  return theta;
}

// Minimises the discrete energy
//   J(theta) = 1/2 <theta, -mu Lap theta>_w - sum_k w_k F_k(theta_k),
//   F_k(s) = (K_k - m_k) s^2 / 2 - s^3 / 3,
// over theta >= 0, whose weighted gradient is the strong residual
//   G(theta) = -mu Lap theta - (K - m) theta + theta^2.
// Directions are Polak-Ribiere+ conjugate gradients preconditioned by
// (-mu Lap + sigma); the step solves the cubic line-search problem exactly
// and is capped where a component would turn negative.
NonlinearSolution PayoffSolver::solve_nonlinear(
    std::span<const double> m,
    std::optional<std::span<const double>> warm_start) const {
  if (model_.kind != ModelKind::nonlinear) {
    throw std::logic_error("solve_nonlinear called on a linear model");
  }
  check_shape(m, grid_, "solve_nonlinear");
  const std::size_t size = m.size();
  const auto w = preconditioner_->energy_weights();
  const double mu = model_.mu;

  Field growth(size);
  for (std::size_t k = 0; k < size; ++k) growth[k] = model_.K[k] - m[k];

  NonlinearSolution out;
  Field& theta = out.theta;
  theta.resize(size);
  if (warm_start) {
    check_shape(*warm_start, grid_, "solve_nonlinear warm start");
    for (std::size_t k = 0; k < size; ++k) {
      theta[k] = std::max((*warm_start)[k], opts_.init_floor);
    }
  } else {
    for (std::size_t k = 0; k < size; ++k) {
      theta[k] = std::max(growth[k], opts_.init_floor);
    }
  }

  auto dot = [&](const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < size; ++k) s += w[k] * a[k] * b[k];
    return s;
  };
  auto gradient = [&](const Field& t) {
    Field g = apply_laplacian(t, grid_);
    for (std::size_t k = 0; k < size; ++k) {
      g[k] = -mu * g[k] - growth[k] * t[k] + t[k] * t[k];
    }
    return g;
  };
  auto projected_norm = [&](const Field& t, const Field& g) {
    double worst = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const double gk = (t[k] <= 0.0) ? std::min(g[k], 0.0) : g[k];
      worst = std::max(worst, std::abs(gk));
    }
    return worst;
  };

  Field g = gradient(theta);
  Field z, z_prev, d;
  double gz_prev = 0.0;
  bool restart = true;

  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    out.residual = projected_norm(theta, g);
    if (out.residual <= opts_.grad_tol) {
      out.converged = true;
      break;
    }
    if (iter >= opts_.max_iters) break;

    z = preconditioner_->solve(g);
    const double gz = dot(g, z);
    if (restart || iter == 0) {
      d = z;
      for (double& v : d) v = -v;
    } else {
      double num = 0.0;
      for (std::size_t k = 0; k < size; ++k) num += w[k] * g[k] * (z[k] - z_prev[k]);
      const double beta = std::max(0.0, num / gz_prev);
      for (std::size_t k = 0; k < size; ++k) d[k] = -z[k] + beta * d[k];
    }
    // Freeze components pinned at the bound and pushing outward.
    for (std::size_t k = 0; k < size; ++k) {
      if (theta[k] <= 0.0 && d[k] < 0.0) d[k] = 0.0;
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      d = z;
      for (std::size_t k = 0; k < size; ++k) {
        d[k] = (theta[k] <= 0.0 && z[k] > 0.0) ? 0.0 : -z[k];
      }
      slope = dot(g, d);
      if (!(slope < 0.0)) break;  // no feasible descent left
    }

    // phi'(a) = slope + curvature * a + cubic * a^2 along theta + a d.
    const Field lap_d = apply_laplacian(d, grid_);
    double curvature = 0.0;
    double cubic = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const double hd = -mu * lap_d[k] - growth[k] * d[k] + 2.0 * theta[k] * d[k];
      curvature += w[k] * d[k] * hd;
      cubic += w[k] * d[k] * d[k] * d[k];
    }
    double step = std::numeric_limits<double>::infinity();
    if (std::abs(cubic) <= 1e-14 * std::abs(curvature)) {
      if (curvature > 0.0) step = -slope / curvature;
    } else {
      const double disc = curvature * curvature - 4.0 * cubic * slope;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // Stable roots of cubic a^2 + curvature a + slope = 0.
        const double q = -0.5 * (curvature + std::copysign(sq, curvature));
        for (double root : {q / cubic, slope / q}) {
          if (root > 0.0 && curvature + 2.0 * cubic * root > 0.0) {
            step = std::min(step, root);
          }
        }
      }
    }
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size; ++k) {
      if (d[k] < 0.0) cap = std::min(cap, -theta[k] / d[k]);
    }
    restart = false;
    if (!(step < cap)) {
      if (!std::isfinite(cap)) break;
      step = cap;
      restart = true;
    }
    for (std::size_t k = 0; k < size; ++k) {
      theta[k] = std::max(0.0, theta[k] + step * d[k]);
      if (restart && d[k] < 0.0 && theta[k] <= 1e-300) theta[k] = 0.0;
    }
    g = gradient(theta);
    z_prev = std::move(z);
    gz_prev = gz;
  }

  out.trivial = max_abs(theta) <= 1e-12;
  if (out.trivial) std::fill(theta.begin(), theta.end(), 0.0);
  return out;
}

Field solve_linear(const ModelSpec& model, std::span<const double> m,
                   const Grid& grid) {
  if (model.kind != ModelKind::linear) {
    throw std::invalid_argument("solve_linear: model is not linear");
  }
  return PayoffSolver(model, grid).solve(m);
}

NonlinearSolution solve_nonlinear(const ModelSpec& model,
                                  std::span<const double> m, const Grid& grid,
                                  const NonlinearSolveOptions& opts) {
  if (model.kind != ModelKind::nonlinear) {
    throw std::invalid_argument("solve_nonlinear: model is not nonlinear");
  }
  return PayoffSolver(model, grid, opts).solve_nonlinear(m);
}

}  // namespace mfg
