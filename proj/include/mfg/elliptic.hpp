#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "mfg/grid.hpp"

namespace mfg {

enum class ModelKind { linear, nonlinear };

/// Payoff PDE descriptor.
///
/// linear:     -mu Lap(theta) + P theta = f - m
/// nonlinear:  -mu Lap(theta) = theta (K - theta) - m theta
///
/// Both carry homogeneous Neumann conditions on the unit box.
struct ModelSpec {
  ModelKind kind = ModelKind::linear;
  double mu = 0.1;
  Field P;  // linear only
  Field f;  // linear only
  Field K;  // nonlinear only

  static ModelSpec linear(double mu, Field P, Field f);
  static ModelSpec nonlinear(double mu, Field K);

  /// Checks mu > 0, coefficient shapes, and for the linear model P, f >= 0
  /// with positive integrals. Throws std::invalid_argument.
  void validate(const Grid& grid) const;

  /// Height the density takes on a plateau where theta == theta_bar:
  /// f - P theta_bar (linear) or K - theta_bar (nonlinear). Not clamped.
  double plateau_height(std::size_t node, double theta_bar) const;
};

/// Raised when a payoff solve breaks down or fails to converge.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Ghost-node (reflection) five/three point Laplacian.
Field apply_laplacian(std::span<const double> u, const Grid& grid);

/// Max-norm of the discrete PDE residual of theta for density m.
double pde_residual(const ModelSpec& model, std::span<const double> m,
                    std::span<const double> theta, const Grid& grid);

/// Solver for (-mu Lap + diag(c)) u = r with Neumann reflection.
///
/// The operator is self-adjoint in the inner product weighted by the tensor
/// trapezoid weights, so the weighted matrix is factorised once with a sparse
/// LDL^T and reused for every right-hand side.
class ScreenedPoisson {
 public:
  ScreenedPoisson(const Grid& grid, double mu, std::span<const double> shift);
  ~ScreenedPoisson();
  ScreenedPoisson(ScreenedPoisson&&) noexcept;
  ScreenedPoisson& operator=(ScreenedPoisson&&) noexcept;

  Field solve(std::span<const double> rhs) const;

  /// Tensor-product trapezoid weights making the operator symmetric.
  std::span<const double> energy_weights() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct NonlinearSolveOptions {
  /// Stop once the max-norm of the projected strong residual is below this.
  double grad_tol = 1e-8;
  int max_iters = 100000;
  /// Lower bound used when building the positive starting guess.
  double init_floor = 1e-3;

  void validate() const;
};

struct NonlinearSolution {
  Field theta;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Descent collapsed onto theta == 0.
  bool trivial = false;
};

/// Solves theta[m] for either model kind. Construction validates the model
/// and caches the factorised operator(s) for the grid.
class PayoffSolver {
 public:
  PayoffSolver(ModelSpec model, const Grid& grid,
               NonlinearSolveOptions opts = {});

  const ModelSpec& model() const { return model_; }
  const Grid& grid() const { return grid_; }

  /// Linear: direct solve. Nonlinear: variational descent started from
  /// max(K - m, init_floor), or from max(warm_start, init_floor) if given.
  /// Throws SolverFailure when the solve does not meet its tolerance.
  Field solve(std::span<const double> m,
              std::optional<std::span<const double>> warm_start = {}) const;

  /// Nonlinear solve with its convergence report; never throws on
  /// non-convergence.
  NonlinearSolution solve_nonlinear(
      std::span<const double> m,
      std::optional<std::span<const double>> warm_start = {}) const;

 private:
  Field solve_linear(std::span<const double> m) const;

  ModelSpec model_;
  Grid grid_;
  NonlinearSolveOptions opts_;
  std::optional<ScreenedPoisson> linear_op_;
  std::optional<ScreenedPoisson> preconditioner_;
  double preconditioner_shift_ = 1.0;
};

/// One-shot wrappers around PayoffSolver.
Field solve_linear(const ModelSpec& model, std::span<const double> m,
                   const Grid& grid);
NonlinearSolution solve_nonlinear(const ModelSpec& model,
                                  std::span<const double> m, const Grid& grid,
                                  const NonlinearSolveOptions& opts = {});

}  // namespace mfg
