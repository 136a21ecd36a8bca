#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mfg/elliptic.hpp"
#include "mfg/measures.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

const double pi = std::numbers::pi;

ModelSpec linear_const(const Grid& g, double P, double f) {
  return ModelSpec::linear(0.1, Field(g.size(), P), Field(g.size(), f));
}

}  // namespace

TEST_CASE("linear constant solutions") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(dim, dim == 1 ? 200 : 30);
    const Field theta = solve_linear(linear_const(g, 0.5, 2.0), Field(g.size(), 1.0), g);
    CHECK(oracle::max_abs_diff(theta, Field(g.size(), 2.0)) <= 1e-9);
  }
}

TEST_CASE("linear manufactured solution converges at second order") {
  const double mu = 0.1;
  auto error = [&](int n) {
    const Grid g = make_grid(1, n);
    const Field f = g.sample([&](double x, double) {
      return 2.0 + mu * pi * pi * std::cos(pi * x) + std::cos(pi * x);
    });
    const ModelSpec model = ModelSpec::linear(mu, Field(g.size(), 1.0), f);
    const Field theta = solve_linear(model, Field(g.size(), 1.0), g);
    const Field exact = g.sample([](double x, double) { return std::cos(pi * x) + 1.0; });
    return oracle::max_abs_diff(theta, exact);
  };
  const double e100 = error(100), e200 = error(200), e400 = error(400);
  CHECK(e100 <= 1e-3);
  CHECK(std::log2(e100 / e200) >= 1.9);
  CHECK(std::log2(e200 / e400) >= 1.9);
}

TEST_CASE("linear payoff for increasing f peaks at the right end") {
  const Grid g = make_grid(1, 1000);
  const ModelSpec model = ModelSpec::linear(0.1, Field(g.size(), 0.5),
                                            g.sample([](double x, double) { return 4 * x; }));
  const Field theta = solve_linear(model, Density::uniform(g).values(), g);
  CHECK(std::max_element(theta.begin(), theta.end()) - theta.begin() == 1000);
  CHECK(pde_residual(model, Density::uniform(g).values(), theta, g) <= 1e-9 * 4.0);
}

TEST_CASE("nonlinear constant solutions") {
  const Grid g = make_grid(1, 200);
  const ModelSpec model = ModelSpec::nonlinear(0.1, Field(g.size(), 4.0));
  const NonlinearSolution occupied = solve_nonlinear(model, Field(g.size(), 1.0), g);
  CHECK(occupied.converged);
  CHECK(oracle::max_abs_diff(occupied.theta, Field(g.size(), 3.0)) <= 1e-6);
  const NonlinearSolution empty = solve_nonlinear(model, Field(g.size(), 0.0), g);
  CHECK(oracle::max_abs_diff(empty.theta, Field(g.size(), 4.0)) <= 1e-6);
}

TEST_CASE("nonlinear K = 4x gives a positive nontrivial payoff") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(dim, dim == 1 ? 1000 : 50);
    const ModelSpec model =
        ModelSpec::nonlinear(0.1, g.sample([](double x, double) { return 4 * x; }));
    const Density m = Density::uniform(g);
    const NonlinearSolution s = solve_nonlinear(model, m.values(), g);
    CHECK(s.converged);
    CHECK(!s.trivial);
    CHECK(*std::max_element(s.theta.begin(), s.theta.end()) > 0.5);
    CHECK(*std::min_element(s.theta.begin(), s.theta.end()) >= 0.0);
    CHECK(pde_residual(model, m.values(), s.theta, g) <= 1e-5);
    const PayoffSolver solver(model, g);
    const Field warm = solver.solve(m.values(), s.theta);
    CHECK(oracle::max_abs_diff(warm, s.theta) <= 1e-6);
  }
}

TEST_CASE("pde_residual") {
  const Grid g = make_grid(1, 100);
  const ModelSpec lin = linear_const(g, 0.5, 2.0);
  const Field m(g.size(), 1.0);
  CHECK(pde_residual(lin, m, Field(g.size(), 2.0), g) <= 1e-12);
  CHECK(pde_residual(lin, m, Field(g.size(), 3.0), g) >= 0.5);

  const ModelSpec non = ModelSpec::nonlinear(0.1, Field(g.size(), 4.0));
  CHECK(pde_residual(non, m, Field(g.size(), 3.0), g) <= 1e-12);

  Rng rng(11);
  for (int dim : {1, 2}) {
    const Grid h = make_grid(dim, dim == 1 ? 50 : 12);
    Field theta(h.size()), dens(h.size()), P(h.size()), f(h.size()), K(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
      theta[k] = rng.uniform(-1, 1);
      dens[k] = rng.uniform(0, 2);
      P[k] = rng.uniform(0, 1);
      f[k] = rng.uniform(0, 3);
      K[k] = rng.uniform(0, 5);
    }
    const Field lap = oracle::laplacian(theta, h);
    CHECK(oracle::max_abs_diff(apply_laplacian(theta, h), lap) <= 1e-9);
    double lin_ref = 0.0, non_ref = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      lin_ref = std::max(lin_ref,
                         std::abs(-0.1 * lap[k] + P[k] * theta[k] - f[k] + dens[k]));
      non_ref = std::max(non_ref, std::abs(-0.1 * lap[k] - theta[k] * (K[k] - theta[k]) +
                                           dens[k] * theta[k]));
    }
    CHECK(pde_residual(ModelSpec::linear(0.1, P, f), dens, theta, h) ==
          doctest::Approx(lin_ref).epsilon(1e-9));
    CHECK(pde_residual(ModelSpec::nonlinear(0.1, K), dens, theta, h) ==
          doctest::Approx(non_ref).epsilon(1e-9));
  }
}

TEST_CASE("model validation") {
  const Grid g = make_grid(1, 10);
  CHECK_THROWS_AS(linear_const(g, 0.0, 1.0).validate(g), std::invalid_argument);
  CHECK_THROWS_AS(linear_const(g, 1.0, 0.0).validate(g), std::invalid_argument);
  CHECK_THROWS_AS(linear_const(g, -1.0, 1.0).validate(g), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::nonlinear(0.0, Field(g.size(), 1.0)).validate(g),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::nonlinear(0.1, Field(3, 1.0)).validate(g), std::invalid_argument);
  CHECK_THROWS_AS(PayoffSolver(linear_const(g, 0.0, 1.0), g), std::invalid_argument);
  NonlinearSolveOptions bad;
  bad.grad_tol = 0.0;
  CHECK_THROWS_AS(PayoffSolver(ModelSpec::nonlinear(0.1, Field(g.size(), 1.0)), g, bad),
                  std::invalid_argument);
}

TEST_CASE("linear payoff is Lipschitz in W1 and bounded by the Green kernel") {
  const Grid g = make_grid(1, 200);
  const ModelSpec model = ModelSpec::linear(0.1, Field(g.size(), 0.5),
                                            g.sample([](double x, double) { return 4 * x; }));
  const oracle::GreenKernel kernel = oracle::green_kernel(model, g);
  const PayoffSolver solver(model, g);
  const double f_mass = integrate(model.f, g);
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const Density a = random_density(s, g);
    const Density b = random_density(1000 + s, g);
    const Field ta = solver.solve(a.values());
    const Field tb = solver.solve(b.values());
    CHECK(oracle::max_abs_diff(ta, tb) <= 1.1 * kernel.max_slope * w1_distance_1d(a, b, g));
    CHECK(oracle::sup_norm(ta) <= kernel.max_value * (f_mass + 1.0) * (1 + 1e-12));
  }
}

TEST_CASE("sup norm of the linear payoff is convex along interpolations") {
  const Grid g = make_grid(1, 400);
  const ModelSpec model = ModelSpec::linear(
      0.1, Field(g.size(), 0.5),
      g.sample([](double x, double) { return 15 * (std::cos(2 * pi * x) + 1); }));
  const PayoffSolver solver(model, g);
  Rng rng(3);
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const Density m0 = random_density(s, g);
    const Density m1 = random_density(500 + s, g);
    const double t = rng.uniform(0, 1);
    Field mix(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) mix[k] = (1 - t) * m0[k] + t * m1[k];
    const double lhs = oracle::sup_norm(solver.solve(mix));
    const double rhs = (1 - t) * oracle::sup_norm(solver.solve(m0.values())) +
                       t * oracle::sup_norm(solver.solve(m1.values()));
    CHECK(lhs <= rhs + 1e-12);
  }
}
