#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pmaflow/error.hpp"
#include "pmaflow/flow/flow_ma.hpp"
#include "pmaflow/grid/hessian.hpp"
#include "test_support.hpp"

using namespace pmaflow;
using std::numbers::pi;

namespace {

FlowParams params(double T, double dt) {
  FlowParams p;
  p.T = T;
  p.dt = dt;
  return p;
}

double manufactured_error(int N, double dt, double T, double curvature) {
  TorusGrid g(1, N);
  auto traj =
      solve_flow(ScalarField(g, 0.0), RhsSpec::manufactured(curvature), params(T, dt));
  double e = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    e = std::max(e, sup_distance(traj[k], manufactured_solution(g, traj.times()[k], curvature)));
  }
  return e;
}

void check_flow_invariants(const Trajectory& traj, const FlowParams& p) {
  const double slack = 10.0 * p.newton_tol;
  const double sup0 = traj[0].max();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(traj[k].max() <= sup0 + slack);
    CHECK(hessian_eigenvalues(complex_hessian(traj[k])).min() >= p.admissibility_floor);
    if (k > 0) CHECK((traj[k] - traj[k - 1]).max() <= slack);
  }
}

}  // namespace

TEST_CASE("flow params") {
  CHECK(params(1.0, 0.01).step_count() == 100);
  CHECK(params(1.0, 0.3).step_count() == 4);
  CHECK_THROWS_AS(params(1.0, 2.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(0.0, 0.1).validate(), InvalidArgument);
  FlowParams bad = params(1.0, 0.1);
  bad.newton_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("ma_residual") {
  TorusGrid g(1, 16);
  const ScalarField zero(g, 0.0);
  auto r0 = ma_residual(zero, ScalarField(g, -0.01), 0.01, zero);
  CHECK(r0.sup_abs() < 1e-14);
  auto r1 = ma_residual(zero, zero, 0.01, zero);
  for (double v : r1.values()) CHECK(v == doctest::Approx(-1.0));

  // Residual of exact snapshots is the backward-Euler truncation error.
  auto res = [&](double dt) {
    const double t = 0.05;
    return ma_residual(manufactured_solution(g, t - dt), manufactured_solution(g, t), dt,
                       RhsSpec::manufactured().log_density(g, t))
        .sup_abs();
  };
  // psi is linear in t, so the difference quotient is exact.
  CHECK(res(0.01) < 1e-12);
  CHECK(res(0.005) < 1e-12);

  const auto curved = RhsSpec::manufactured(4.0);
  auto res_curved = [&](double dt) {
    const double t = 0.05;
    return ma_residual(manufactured_solution(g, t - dt, 4.0), manufactured_solution(g, t, 4.0), dt,
                       curved.log_density(g, t))
        .sup_abs();
  };
  const double c1 = res_curved(0.01), c2 = res_curved(0.005);
  CHECK(c1 > 1e-4);
  CHECK(std::log2(c1 / c2) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("implicit_step on flat data") {
  TorusGrid g(1, 32);
  const ScalarField zero(g, 0.0);
  auto p = params(1.0, 0.01);
  auto next = implicit_step(zero, 0.01, zero, p);
  CHECK(sup_distance(next, ScalarField(g, -0.01)) < 1e-12);

  const double F = 0.3;
  const ScalarField phi(g, 0.7);
  auto step = implicit_step(phi, 0.02, ScalarField(g, F), p);
  CHECK(sup_distance(step, phi - 0.02 * std::exp(F)) < p.newton_tol);
}

TEST_CASE("implicit_step converges from every initial guess") {
  TorusGrid g(1, 32);
  auto phi = ScalarField::from_function(
      g, [](const auto& x) { return 0.03 * std::cos(2 * pi * x[0]) + 0.02 * std::sin(2 * pi * x[1]); });
  auto F = ScalarField::from_function(g, [](const auto& x) { return 0.5 * std::sin(2 * pi * x[0]); });
  auto p = params(1.0, 0.05);
  for (auto guess : {InitialGuess::predictor, InitialGuess::unit_rate, InitialGuess::extrapolate}) {
    p.initial_guess = guess;
    auto next = implicit_step(phi, 0.05, F, p);
    CHECK(ma_residual(phi, next, 0.05, F).sup_abs() <= p.newton_tol);
    CHECK((next - phi).max() < 0.0);
  }
}

TEST_CASE("implicit_step local error") {
  TorusGrid g(1, 32);
  auto local = [&](double dt, double curvature) {
    const double t0 = 0.05;
    const auto rhs = RhsSpec::manufactured(curvature);
    auto next = implicit_step(manufactured_solution(g, t0, curvature), dt,
                              rhs.log_density(g, t0 + dt), params(1.0, dt));
    return sup_distance(next, manufactured_solution(g, t0 + dt, curvature));
  };
  CHECK(local(0.01, 0.0) < 1e-12);
  CHECK(local(0.005, 0.0) < 1e-12);
  const double e1 = local(0.01, 4.0), e2 = local(0.005, 4.0);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("solve_flow: trivial solution") {
  TorusGrid g(1, 64);
  auto p = params(1.0, 0.01);
  auto traj = solve_flow(ScalarField(g, 0.0), RhsSpec::zero(), p);
  REQUIRE(traj.size() == 101);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(sup_distance(traj[k], ScalarField(g, -traj.times()[k])) <= 1e-10);
  }
  CHECK(traj.final_time() == 1.0);
}

TEST_CASE("solve_flow: spatially flat right-hand side") {
  TorusGrid g(1, 16);
  TemporalProfile sine{TemporalProfile::Kind::sine, 0.0, 1.0, 1.0};
  const auto rhs = RhsSpec::time_only(sine);
  double err[2];
  int idx = 0;
  for (double dt : {1.0 / 50, 1.0 / 100}) {
    auto traj = solve_flow(ScalarField(g, 0.0), rhs, params(1.0, dt));
    double e = 0.0;
    double sum = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
      const double t = traj.times()[k];
      sum += (t - traj.times()[k - 1]) * std::exp(std::sin(t));
      // Backward Euler is exactly the right Riemann sum.
      CHECK(sup_distance(traj[k], ScalarField(g, -sum)) < 1e-10);
      // exact: -int_0^t exp(sin s) ds, by composite Simpson on a fine grid
      const int m = 2000;
      double q = 0.0;
      for (int i = 0; i <= m; ++i) {
        const double s = t * i / m;
        const double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        q += w * std::exp(std::sin(s));
      }
      q *= t / (3.0 * m);
      e = std::max(e, std::abs(traj[k][0] + q));
    }
    // sup |d/dt e^{sin t}| <= e on [0, 1]
    CHECK(e <= 2.0 * dt * std::exp(1.0));
    err[idx++] = e;
  }
  CHECK(std::log2(err[0] / err[1]) >= 0.9);
}

TEST_CASE("solve_flow: manufactured solutions") {
  CHECK(manufactured_error(32, 0.02, 0.1, 0.0) < 1e-11);
  const double e1 = manufactured_error(32, 0.02, 0.1, 4.0);
  const double e2 = manufactured_error(32, 0.01, 0.1, 4.0);
  const double e3 = manufactured_error(32, 0.005, 0.1, 4.0);
  CHECK(std::log2(e1 / e2) >= 0.9);
  CHECK(std::log2(e2 / e3) >= 0.9);
}

TEST_CASE("solve_flow keeps monotonicity, the sup bound and admissibility") {
  std::mt19937_64 rng(21);
  TorusGrid g(1, 32);
  auto phi0 = pmaflow::testing::random_trig_poly(rng, 2, 2, 4, 0.01).sample(g);
  auto rhs = RhsSpec::smooth_product({{0, 1, 0.4, 0.0}, {1, 2, 0.2, 0.3}},
                                     {TemporalProfile::Kind::sine, 0.1, 0.5, 3.0});
  auto p = params(0.2, 0.02);
  auto traj = solve_flow(phi0, rhs, p);
  check_flow_invariants(traj, p);

  TorusGrid g2(2, 8);
  auto phi2 = pmaflow::testing::random_trig_poly(rng, 4, 1, 4, 0.01).sample(g2);
  auto rhs2 = RhsSpec::smooth_product({{2, 1, 0.3, 0.0}}, {});
  rhs2.profile.offset = 1.0;
  auto traj2 = solve_flow(phi2, rhs2, p);
  check_flow_invariants(traj2, p);
}

TEST_CASE("solve_flow errors") {
  TorusGrid g(1, 16);
  auto bad = ScalarField::from_function(g, [](const auto& x) { return 0.2 * std::cos(2 * pi * x[0]); });
  CHECK_THROWS_AS((void)solve_flow(bad, RhsSpec::zero(), params(0.1, 0.01)), AdmissibilityLost);

  auto p = params(0.1, 0.05);
  p.newton_max_iter = 1;
  p.newton_tol = 1e-14;
  try {
    (void)solve_flow(ScalarField(g, 0.0), RhsSpec::manufactured(), p);
    FAIL("expected NewtonDiverged");
  } catch (const NewtonDiverged& e) {
    CHECK(std::string(e.what()).find("at t = 0.05") != std::string::npos);
  }
}

TEST_CASE("comparison_check") {
  TorusGrid g(1, 16);
  auto rhs = RhsSpec::smooth_product({{0, 1, 0.5, 0.0}}, {});
  rhs.profile.offset = 1.0;
  auto phi0 = ScalarField::from_function(g, [](const auto& x) { return 0.02 * std::sin(2 * pi * x[1]); });
  auto p = params(0.3, 0.03);
  auto a = solve_flow(phi0, rhs, p);
  CHECK(comparison_check(a, a).max_discrepancy == 0.0);

  for (auto guess : {InitialGuess::extrapolate, InitialGuess::unit_rate}) {
    auto q = p;
    q.initial_guess = guess;
    CHECK(comparison_check(a, solve_flow(phi0, rhs, q)).max_discrepancy <= 10 * p.newton_tol);
  }
  const double eps = 0.125;
  auto shifted = solve_flow(phi0 + eps, rhs, p);
  CHECK(comparison_check(a, shifted).max_discrepancy <= eps + 10 * p.newton_tol);
}

TEST_CASE("normalize") {
  TorusGrid g(1, 16);
  auto p = params(0.5, 0.05);
  auto traj = solve_flow(ScalarField(g, 0.0), RhsSpec::zero(), p);
  auto [prof, tilde] = normalize(traj, RhsSpec::zero());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(prof.h_values[k] == doctest::Approx(traj.times()[k]).epsilon(1e-13));
    CHECK(tilde[k].sup_abs() < 1e-12);
  }

  auto log2rhs = RhsSpec::time_only({TemporalProfile::Kind::constant, std::log(2.0)});
  auto [p2, t2] = normalize(traj, log2rhs);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(p2.h_values[k] == doctest::Approx(2.0 * traj.times()[k]).epsilon(1e-13));
  }

  auto smooth = RhsSpec::smooth_product({{0, 1, 0.7, 0.0}}, {TemporalProfile::Kind::sine, 0.2, 1.0, 4.0});
  auto [p3, t3] = normalize(traj, smooth);
  CHECK(p3.h_values[0] == 0.0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times()[k];
    double oracle = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) oracle += std::exp(smooth.value(t, g.coordinates(i), g));
    oracle /= static_cast<double>(g.size());
    CHECK(std::abs(p3.h_prime[k] - oracle) < 1e-12);
  }
}

TEST_CASE("eta_j") {
  CHECK(eta_j(0.0, 4) == doctest::Approx(0.25));
  CHECK(std::abs(eta_j(1.0, 1000000) - (1.0 + 2.5e-7)) < 1e-12);
  CHECK(eta_j(-3.0, 1) > 0.0);
  CHECK(eta_j(2.0, 5) > 2.0);
  CHECK_THROWS_AS((void)eta_j(1.0, 0), InvalidArgument);
}

TEST_CASE("build_auxiliary_rhs and the auxiliary solve") {
  TorusGrid g(1, 16);
  auto p = params(0.2, 0.02);
  auto rhs = RhsSpec::smooth_product({{0, 1, 0.5, 0.0}}, {});
  rhs.profile.offset = 1.0;
  auto phi0 = ScalarField::from_function(g, [](const auto& x) { return 0.02 * std::cos(2 * pi * x[0]); });
  auto phi = solve_flow(phi0, rhs, p);
  auto eF = sample_density(rhs, g, phi.times(), p.dt);

  auto aux = build_auxiliary_rhs(phi, eF, 0.05, 4);
  CHECK(aux.A_js > 0.0);
  CHECK(std::abs(integrate_spacetime(aux.density) - 1.0) < 1e-10);
  CHECK_THROWS_AS((void)build_auxiliary_rhs(phi, eF, 0.01, 4), SoftPreconditionError);

  auto logd = aux.density.map([](double v) { return std::log(v); });
  auto psi = solve_flow_sampled(ScalarField(g, 0.0), logd, p);
  CHECK(psi.size() == phi.size());
  for (std::size_t k = 1; k < psi.size(); ++k) {
    CHECK(ma_residual(psi[k - 1], psi[k], psi.times()[k] - psi.times()[k - 1], logd[k]).sup_abs() <=
          p.newton_tol);
  }
}
