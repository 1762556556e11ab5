#include <doctest.h>

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "pmaflow/error.hpp"
#include "pmaflow/flow/flow_ma.hpp"
#include "pmaflow/grid/hessian.hpp"
#include "pmaflow/regularize/regularize.hpp"
#include "test_support.hpp"

using namespace pmaflow;
using std::numbers::pi;

namespace {

double l1(const ScalarField& a, const ScalarField& b) {
  return integrate((a - b).map([](double v) { return std::abs(v); }));
}

double l1(const Trajectory& a, const Trajectory& b) {
  return integrate_spacetime(a, b, [](double x, double y) { return std::abs(x - y); });
}

ScalarField admissible_field(std::mt19937_64& rng, const TorusGrid& g, double amplitude) {
  auto f = testing::random_trig_poly(rng, g.real_dim(), 2, 4, amplitude).sample(g);
  REQUIRE(hessian_eigenvalues(complex_hessian(f)).min() > 0.0);
  return f;
}

Trajectory trivial_flow(const TorusGrid& g, double T, double dt) {
  Trajectory traj(g, dt);
  const int K = static_cast<int>(std::lround(T / dt));
  for (int k = 0; k <= K; ++k) traj.push_back(k * dt, ScalarField(g, -k * dt));
  return traj;
}

Trajectory smooth_flow(int N, double T, double dt) {
  TorusGrid g(1, N);
  const auto rhs = RhsSpec::smooth_product({{0, 1, 0.3, 0.0}, {1, 1, 0.2, 0.5}},
                                           {TemporalProfile::Kind::constant, 0.0, 0.0, 1.0});
  FlowParams p;
  p.T = T;
  p.dt = dt;
  std::mt19937_64 rng(17);
  const auto phi0 = testing::random_trig_poly(rng, 2, 1, 2, 0.01).sample(g);
  return solve_flow(phi0, rhs, p);
}

}  // namespace

TEST_CASE("regularization parameters") {
  TorusGrid g(1, 32);
  RegularizationParams p;
  CHECK_NOTHROW(p.validate(g));
  CHECK(p.K_value(g) == doctest::Approx(0.2));
  CHECK(p.c_value() == doctest::Approx(std::sqrt(0.1)));
  const auto s = p.s_ladder();
  CHECK(s.size() == 32);
  CHECK(s.front() == doctest::Approx(0.1 / 1024));
  CHECK(s.back() == 0.1);
  using Mutation = void (*)(RegularizationParams&);
  for (Mutation bad : {+[](RegularizationParams& q) { q.gamma = 1.0; },
                       +[](RegularizationParams& q) { q.theta = 0.0; },
                       +[](RegularizationParams& q) { q.epsilon = 0.5; },
                       +[](RegularizationParams& q) { q.s_samples = 2; },
                       +[](RegularizationParams& q) { q.K = -1.0; }}) {
    RegularizationParams q;
    bad(q);
    CHECK_THROWS_AS(q.validate(g), InvalidArgument);
  }
}

TEST_CASE("mollification") {
  TorusGrid g(1, 64);
  CHECK(sup_distance(mollify(ScalarField(g, 0.4), 0.1), ScalarField(g, 0.4)) < 1e-14);

  std::mt19937_64 rng(2);
  const auto phi = admissible_field(rng, g, 0.002);
  const double e1 = l1(mollify(phi, 0.1), phi);
  const double e2 = l1(mollify(phi, 0.05), phi);
  const double e3 = l1(mollify(phi, 0.025), phi);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e2 / e3 >= 3.5);

  const double K_flat = default_kernel(2).second_moment();
  for (int n : {1, 2}) {
    TorusGrid gn(n, n == 1 ? 64 : 16);
    const auto u = admissible_field(rng, gn, n == 1 ? 0.002 : 0.001);
    ScalarField prev = u;
    const double Kn = default_kernel(gn.real_dim()).second_moment();
    for (double s : {0.02, 0.05, 0.1, 0.15, 0.2, 0.3}) {
      const auto cur = mollify(u, s) + Kn * s * s;
      CHECK((prev - cur).max() <= 1e-12);
      prev = cur;
    }
  }
  CHECK(K_flat == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("mollification rate on flow output") {
  const auto traj = smooth_flow(64, 0.2, 0.02);
  const auto& phi = traj[traj.size() - 1];
  const double e1 = l1(mollify(phi, 0.2), phi), e2 = l1(mollify(phi, 0.1), phi);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("Kiselman-Legendre transform") {
  TorusGrid g(1, 32);
  SUBCASE("constant field closed form") {
    RegularizationParams p;
    p.K = 100.0;
    p.epsilon = 0.1;
    p.gamma = 0.5;
    const double c = p.c_value(), K = *p.K, eps = p.epsilon;
    const double s_star = std::min(eps, std::sqrt(c / (2 * K)));
    const double closed = 0.7 + K * s_star * s_star - K * eps * eps - c * std::log(s_star / eps);
    auto objective = [&](double s) { return 0.7 + K * s * s - K * eps * eps - c * std::log(s / eps); };
    const auto dense = boost::math::tools::brent_find_minima(objective, 1e-6 * eps, eps, 60);
    CHECK(std::abs(dense.second - closed) < 1e-12);
    const auto out = kiselman_legendre(ScalarField(g, 0.7), p);
    CHECK(std::abs(out.max() - closed) < 1e-8);
    CHECK(std::abs(out.min() - closed) < 1e-8);
  }
  SUBCASE("without the log term") {
    RegularizationParams p;
    p.K = 3.0;
    p.c = 0.0;
    const auto out = kiselman_legendre(ScalarField(g, 0.7), p);
    const double expected = 0.7 - 3.0 * 0.01 * (1.0 - p.s_min_ratio * p.s_min_ratio);
    CHECK(std::abs(out.max() - expected) < 1e-12);
    CHECK(std::abs(out.min() - expected) < 1e-12);
  }
  SUBCASE("sandwich and ladder refinement") {
    std::mt19937_64 rng(9);
    RegularizationParams p;
    p.epsilon = 0.15;
    const double K = p.K_value(g);
    for (int trial = 0; trial < 5; ++trial) {
      const auto phi = admissible_field(rng, g, 0.003);
      const auto out = kiselman_legendre(phi, p);
      CHECK((phi - K * p.epsilon * p.epsilon - out).max() <= 1e-10);
      CHECK((out - mollify(phi, p.epsilon)).max() <= 1e-10);
      auto q = p;
      q.s_samples = 64;
      CHECK(sup_distance(kiselman_legendre(phi, q), out) < 1e-6);
    }
  }
}

TEST_CASE("theta scale bound") {
  TorusGrid g(1, 32);
  RegularizationParams p;
  Trajectory constant(g, 0.1);
  for (int k = 0; k < 3; ++k) constant.push_back(0.1 * k, ScalarField(g, 1.0));
  const auto rc = theta_scale_bound(constant, p, 0.0);
  CHECK(std::abs(rc.sup_gap) < 1e-14);
  CHECK(rc.holds);
  CHECK(std::abs(theta_scale_bound(trivial_flow(g, 1.0, 0.1), p, 0.0).sup_gap) < 1e-14);

  TorusGrid g128(1, 128);
  Trajectory man(g128, 0.01);
  for (int k = 0; k <= 5; ++k) man.push_back(0.01 * k, manufactured_solution(g128, 0.01 * k));
  const auto phi_eps = kiselman_legendre(man, p);
  double gap = -1e300;
  for (std::size_t k = 0; k < man.size(); ++k) gap = std::max(gap, (phi_eps[k] - man[k]).max());
  const auto r = theta_scale_bound(man, p, gap);
  CHECK(std::log(1.0 / r.theta) > p.K_value(g128) + gap / p.c_value());
  double direct = -1e300;
  for (const auto& f : man.fields()) direct = std::max(direct, (mollify(f, r.theta * p.epsilon) - f).max());
  CHECK(r.sup_gap == doctest::Approx(direct).epsilon(1e-12));
  CHECK(r.holds);
}

TEST_CASE("time average") {
  TorusGrid g(1, 8);
  const auto phi = trivial_flow(g, 1.0, 0.01);
  for (double eps : {0.05, 0.123}) {
    const auto avg = time_average(phi, eps);
    for (std::size_t k = 0; k < avg.size(); ++k) {
      const double t = avg.times()[k];
      const double expected = t >= eps ? -t + 0.5 * eps : -t * t / (2 * eps);
      CHECK(std::abs(avg[k][3] - expected) < 1e-12);
    }
  }
  Trajectory still(g, 0.1);
  for (int k = 0; k < 5; ++k) still.push_back(0.1 * k, ScalarField(g, 0.25));
  const auto sa = time_average(still, 0.3);
  for (std::size_t k = 0; k < sa.size(); ++k) CHECK(sup_distance(sa[k], still[k]) < 1e-15);

  const auto flow = smooth_flow(32, 1.0, 1.0 / 256);
  std::vector<double> lx, ly;
  for (int j = 3; j <= 7; ++j) {
    const double eps = std::ldexp(1.0, -j);
    const auto avg = time_average(flow, eps);
    CHECK(sup_distance(avg[0], flow[0]) == 0.0);
    for (std::size_t k = 0; k < avg.size(); ++k) {
      CHECK((flow[k] - avg[k]).max() <= 1e-13);
      if (k > 0) CHECK((avg[k] - avg[k - 1]).max() <= 1e-13);
    }
    lx.push_back(std::log(eps));
    ly.push_back(std::log(l1(avg, flow)));
  }
  const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
  CHECK(slope >= 0.95);
  CHECK_THROWS_AS((void)time_average(flow, 0.0), InvalidArgument);
}

TEST_CASE("decreasing function lemma") {
  std::vector<double> t, lin, flat, root;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.01 * k);
    lin.push_back(-t.back());
    flat.push_back(2.0);
    root.push_back(-std::sqrt(t.back()));
  }
  CHECK(measure_c0(t, lin, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto rl = decreasing_holder_from_averages(t, lin, 0.5, 1.0);
  CHECK(rl.hypothesis_holds);
  CHECK(rl.conclusion_holds);
  CHECK(rl.worst_ratio <= 1.0);

  const auto rf = decreasing_holder_from_averages(t, flat, 0.0, 0.5);
  CHECK(rf.conclusion_holds);
  CHECK(rf.worst_ratio == 0.0);

  const double c0 = measure_c0(t, root, 0.5);
  const auto rr = decreasing_holder_from_averages(t, root, c0, 0.5);
  CHECK(rr.hypothesis_holds);
  CHECK(rr.conclusion_holds);

  CHECK_FALSE(decreasing_holder_from_averages(t, root, 0.1 * c0, 0.5).hypothesis_holds);
  auto bumpy = lin;
  bumpy[50] = 1.0;
  CHECK_THROWS_AS((void)measure_c0(t, bumpy, 1.0), InvalidArgument);

  double measured = 0.0;
  const auto rt = decreasing_holder_check(smooth_flow(16, 0.5, 0.02), 1.0, &measured);
  CHECK(measured > 0.0);
  CHECK(rt.hypothesis_holds);
  CHECK(rt.conclusion_holds);
}

TEST_CASE("ball mass profile") {
  TorusGrid g(1, 64);
  std::mt19937_64 rng(4);
  auto poly = testing::random_trig_poly(rng, 2, 3, 4, 0.1);
  for (auto& term : poly.terms) {
    if (term.k == std::array<int, 4>{}) term.k[0] = 1;
  }
  const auto u = poly.sample(g);
  const std::vector<std::size_t> centers{0, 100, 2000};
  const std::vector<double> radii{0.05, 0.1, 0.2};
  const auto prof = ball_mass_profile(u, centers, radii);
  REQUIRE(prof.rows.size() == 9);
  for (const auto& row : prof.rows) {
    const auto z = g.coordinates(row.center);
    double oracle = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.coordinates(i);
      const double dx = std::remainder(x[0] - z[0], 1.0), dy = std::remainder(x[1] - z[1], 1.0);
      if (std::sqrt(dx * dx + dy * dy) <= row.r) {
        oracle += std::abs(poly.second_derivative(x, 0, 0) + poly.second_derivative(x, 1, 1));
      }
    }
    CHECK(std::abs(row.mass - oracle * g.cell_volume()) < 1e-10);
  }

  const auto zero = ball_mass_profile(ScalarField(g, 3.0), centers, radii);
  for (const auto& row : zero.rows) CHECK(row.mass < 1e-12);

  TorusGrid fine(1, 256);
  const auto wave = ScalarField::from_function(fine, [](const auto& x) { return std::cos(2 * pi * x[0]); });
  const auto p = ball_mass_profile(wave, {0}, {0.02, 0.03, 0.04, 0.06, 0.08});
  CHECK(std::abs(p.exponent - 2.0) < 0.1);
  CHECK_THROWS_AS((void)ball_mass_profile(wave, {0}, {0.5}), InvalidArgument);
}

TEST_CASE("mollifier lower bound surrogate") {
  const auto k = lower_bound_constants(default_kernel(2), 1);
  CHECK(k.c_kernel > 0.0);
  CHECK(k.C == doctest::Approx(0.2));
  // Small-ball limit: the ball term cannot exceed the Laplacian term of rho_eps u - u.
  const double ball_vol = pi / 4.0;
  CHECK(k.c_kernel * ball_vol <= k.C / 4.0);

  std::mt19937_64 rng(8);
  TorusGrid g(1, 128);
  for (int trial = 0; trial < 3; ++trial) {
    const auto u = admissible_field(rng, g, 0.002);
    for (double eps : {0.1, 0.2, 0.3}) {
      for (const auto& s : lower_bound_check(u, {0, 777, 5000, 12000}, eps)) {
        CHECK(s.slack >= -1e-10);
      }
    }
  }
}
