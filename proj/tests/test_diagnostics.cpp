#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfg/diagnostics.hpp"

using namespace mfg;

namespace {

ModelSpec four_x(const Grid& g) {
  return ModelSpec::linear(0.1, Field(g.size(), 0.5),
                           g.sample([](double x, double) { return 4 * x; }));
}

}  // namespace

TEST_CASE("functional trace") {
  const Grid g = make_grid(1, 1000);
  const PayoffSolver solver(four_x(g), g);
  FlowConfig cfg;
  cfg.tau = g.spacing();
  const FlowResult r = run_flow(solver, Density::uniform(g), cfg);
  REQUIRE(r.converged);
  const auto trace = functional_trace(r, Variant::best_response);
  REQUIRE(trace.size() == r.records.size() + 1);
  CHECK(trace.front().t == 0.0);
  for (std::size_t j = 1; j < trace.size(); ++j) {
    CHECK(trace[j].phi < trace[j - 1].phi);
    CHECK(trace[j].t > trace[j - 1].t);
  }
  CHECK(trace.back().phi <= cfg.tau);

  const FlowResult still = run_flow(solver, r.m, cfg);
  CHECK(functional_trace(still, Variant::best_response).size() == 1);
  const auto sup = functional_trace(still, Variant::eikonal);
  REQUIRE(sup.size() == 1);
  CHECK(sup[0].phi == doctest::Approx(*std::max_element(r.theta.begin(), r.theta.end())));
}

TEST_CASE("refinement study structure") {
  const Grid g = make_grid(1, 200);
  const PayoffSolver solver(four_x(g), g);
  RefinementOptions opts;
  opts.pairs = 3;
  opts.horizon = 0.5;
  opts.samples = 20;
  opts.tau = g.spacing();
  const RefinementStudy s = refinement_study(solver, Density::uniform(g), opts);
  REQUIRE(s.levels.size() == 4);
  REQUIRE(s.sup_tv.size() == 3);
  CHECK(s.t_grid.size() == 20);
  for (int k = 0; k < 4; ++k) CHECK(s.levels[k].eps == std::ldexp(0.1, -k));
  for (double d : s.sup_tv) CHECK(d >= 0.0);
  CHECK(s.t_grid.front() == 0.0);

  opts.pairs = 0;
  CHECK_THROWS_AS(refinement_study(solver, Density::uniform(g), opts), std::invalid_argument);
}

TEST_CASE("trend_violations") {
  const std::vector<double> down{0.5, 0.4, 0.4, 0.1};
  CHECK(trend_violations(down) == 0);
  const std::vector<double> bump{0.5, 0.6, 0.4, 0.45};
  CHECK(trend_violations(bump) == 2);
  CHECK(trend_violations(std::vector<double>{}) == 0);
}

TEST_CASE("stress test is deterministic and order independent") {
  const Grid g = make_grid(1, 400);
  const PayoffSolver solver(four_x(g), g);
  FlowConfig cfg;
  cfg.tau = g.spacing();
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto a = stress_test(solver, cfg, seeds);
  const auto b = stress_test(solver, cfg, seeds);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == seeds[i / 2]);
    CHECK(a[i].variant == (i % 2 ? Variant::eikonal : Variant::best_response));
    CHECK(a[i].iterations == b[i].iterations);
    CHECK(a[i].final_residual == b[i].final_residual);
  }
  const std::vector<std::uint64_t> shuffled{3, 1, 2};
  const auto c = stress_test(solver, cfg, shuffled);
  auto total = [](const std::vector<StressRow>& rows) {
    int it = 0, conv = 0;
    for (const auto& r : rows) {
      it += r.iterations;
      conv += r.converged;
    }
    return std::pair{it, conv};
  };
  CHECK(total(a) == total(c));
  CHECK_THROWS_AS(stress_test(PayoffSolver(four_x(make_grid(2, 10)), make_grid(2, 10)), cfg, seeds),
                  std::invalid_argument);
}

TEST_CASE("nash certificate") {
  const Grid g = make_grid(1, 1000);
  const PayoffSolver solver(four_x(g), g);
  const Density u = Density::uniform(g);
  const Field theta = solver.solve(u.values());
  const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
  CHECK(nash_certificate(u, theta, g).eps_nash == doctest::Approx(*hi - *lo));
  CHECK(nash_certificate(u, theta, g).support_violation == 0.0);

  Field top(g.size(), 0.0);
  top.back() = 1.0;
  const Density peak = normalize(top, g);
  const auto cert = nash_certificate(peak, g.sample([](double x, double) { return x; }), g);
  CHECK(cert.eps_nash == 0.0);
  CHECK(cert.support_violation == 0.0);

  FlowConfig cfg;
  cfg.tau = g.spacing();
  const FlowResult r = run_flow(solver, u, cfg);
  const auto eq = nash_certificate(r.m, r.theta, g);
  CHECK(eq.eps_nash <= cfg.tau);
  CHECK(eq.support_violation <= 1e-3);
}

TEST_CASE("plateau deviation of a constant equilibrium") {
  const Grid g = make_grid(1, 100);
  const ModelSpec model = ModelSpec::linear(0.1, Field(g.size(), 0.5), Field(g.size(), 2.0));
  const Density u = Density::uniform(g);
  const Field theta(g.size(), 2.0);
  CHECK(plateau_deviation(model, u, theta, kDefaultSupportThreshold) <= 1e-12);
  CHECK(plateau_deviation(model, u, Field(g.size(), 1.0), kDefaultSupportThreshold) ==
        doctest::Approx(0.5));
}
