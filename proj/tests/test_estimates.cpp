#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pmaflow/error.hpp"
#include "pmaflow/estimates/estimates.hpp"
#include "pmaflow/flow/flow_ma.hpp"
#include "pmaflow/grid/hessian.hpp"
#include "test_support.hpp"

using namespace pmaflow;
using std::numbers::pi;

namespace {

std::vector<double> uniform_times(double T, double dt) {
  std::vector<double> t;
  const int K = static_cast<int>(std::lround(T / dt));
  for (int k = 0; k <= K; ++k) t.push_back(k * dt);
  return t;
}

Trajectory from_function(const TorusGrid& g, double T, double dt,
                         const std::function<ScalarField(double)>& f) {
  Trajectory traj(g, dt);
  for (double t : uniform_times(T, dt)) traj.push_back(t, f(t));
  return traj;
}

Trajectory constant_traj(const TorusGrid& g, double T, double dt, double value) {
  return from_function(g, T, dt, [&](double) { return ScalarField(g, value); });
}

Trajectory trivial_flow(const TorusGrid& g, double T, double dt) {
  return from_function(g, T, dt, [&](double t) { return ScalarField(g, -t); });
}

// Per-point n = 1 I-functional integrand built term by term from exact derivatives.
double i_oracle_n1(const testing::TrigPoly& p, const TorusGrid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.coordinates(i);
    const double lap = 0.25 * (p.second_derivative(x, 0, 0) + p.second_derivative(x, 1, 1));
    s += p(x) * (1.0 + (1.0 + lap));
  }
  return 0.5 * s * g.cell_volume();
}

double i_oracle_n2(const testing::TrigPoly& p, const TorusGrid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.coordinates(i);
    auto d = [&](int a, int b) { return p.second_derivative(x, a, b); };
    const double a = 1.0 + 0.25 * (d(0, 0) + d(1, 1));
    const double b = 1.0 + 0.25 * (d(2, 2) + d(3, 3));
    const double cr = 0.25 * (d(0, 2) + d(1, 3));
    const double ci = 0.25 * (d(0, 3) - d(1, 2));
    s += p(x) * (1.0 + 0.5 * (a + b) + (a * b - cr * cr - ci * ci));
  }
  return s * g.cell_volume() / 3.0;
}

}  // namespace

TEST_CASE("entropy closed forms") {
  TorusGrid g(1, 8);
  const auto zero = constant_traj(g, 1.0, 0.1, 0.0);
  CHECK(entropy(zero.map([](double f) { return std::exp(f); }), zero, 3.0) ==
        doctest::Approx(1.0).epsilon(1e-13));

  const double l2 = std::log(2.0);
  const auto F = constant_traj(g, 1.0, 0.1, l2);
  const auto eF = F.map([](double f) { return std::exp(f); });
  CHECK(std::abs(entropy(eF, F, 2.0) - 2.0 * (1.0 + l2 * l2)) < 1e-10);
  CHECK(std::abs(entropy(eF, F, 2.0, 1.0, EntropyIntegrand::abs_power_plus_one) -
                 2.0 * (1.0 + l2 * l2)) < 1e-10);
  CHECK(std::abs(entropy(eF, F, 2.0, 2.0) - 4.0 * (1.0 + l2 * l2)) < 1e-10);
  CHECK_THROWS_AS((void)entropy(eF, F, 0.0), InvalidArgument);
}

TEST_CASE("entropy of a mollified singular family is stable under refinement") {
  const auto rhs = RhsSpec::mollified_log_singularity({0.5, 0.5, 0.0, 0.0}, 1.0, 0.05);
  auto ent = [&](int N) {
    TorusGrid g(1, N);
    const auto times = uniform_times(0.1, 0.05);
    const auto F = sample_log_density(rhs, g, times, 0.05);
    const auto eF = sample_density(rhs, g, times, 0.05);
    return entropy(eF, F, 2.0);
  };
  const double e64 = ent(64), e128 = ent(128);
  CHECK(std::isfinite(e64));
  CHECK(std::abs(e128 - e64) / e128 <= 0.02);
}

TEST_CASE("I functional") {
  SUBCASE("constants") {
    for (int n : {1, 2}) {
      TorusGrid g(n, 8);
      CHECK(i_functional(ScalarField(g, 0.3)) == doctest::Approx(0.3).epsilon(1e-14));
    }
  }
  SUBCASE("term-by-term oracle") {
    std::mt19937_64 rng(11);
    TorusGrid g1(1, 32), g2(2, 12);
    for (int trial = 0; trial < 5; ++trial) {
      const auto p1 = testing::random_trig_poly(rng, 2, 3, 5, 0.01);
      CHECK(std::abs(i_functional(p1.sample(g1)) - i_oracle_n1(p1, g1)) < 1e-10);
      const auto p2 = testing::random_trig_poly(rng, 4, 2, 4, 0.01);
      CHECK(std::abs(i_functional(p2.sample(g2)) - i_oracle_n2(p2, g2)) < 1e-10);
    }
  }
  SUBCASE("trivial flow series") {
    TorusGrid g(1, 8);
    const auto phi = trivial_flow(g, 1.0, 0.1);
    const auto eF = constant_traj(g, 1.0, 0.1, 1.0);
    const auto s = i_series(phi, eF);
    for (std::size_t k = 0; k < s.times.size(); ++k) CHECK(s.values[k] == doctest::Approx(-s.times[k]));
    CHECK(s.derivative_residual < 1e-12);
  }
}

TEST_CASE("I functional derivative identity converges in dt") {
  TorusGrid g(1, 32);
  const auto rhs = RhsSpec::smooth_product({{0, 1, 0.3, 0.0}, {1, 1, 0.2, 0.5}},
                                           {TemporalProfile::Kind::sine, 0.0, 1.0, 3.0});
  auto residual = [&](double dt) {
    FlowParams p;
    p.T = 0.4;
    p.dt = dt;
    const auto phi = solve_flow(ScalarField(g, 0.0), rhs, p);
    const auto eF = sample_density(rhs, g, phi.times(), dt);
    const auto s = i_series(phi, eF);
    for (std::size_t k = 1; k < s.values.size(); ++k) CHECK(s.values[k] < s.values[k - 1]);
    return s.derivative_residual;
  };
  const double r1 = residual(0.02), r2 = residual(0.01);
  CHECK(r1 < 5.0 * 0.02);
  CHECK(r1 / r2 >= 1.8);
}

TEST_CASE("mean minus sup gap") {
  TorusGrid g(1, 32);
  const auto c = mean_minus_sup_gap(ScalarField(g, 1.7));
  CHECK(std::abs(c.gap) < 1e-14);
  CHECK(std::abs(c.integral_minus_i) < 1e-14);

  const double a = 0.02;
  const auto mode = ScalarField::from_function(g, [&](const auto& x) { return a * std::cos(2 * pi * x[0]); });
  const auto m = mean_minus_sup_gap(mode);
  CHECK(m.gap == doctest::Approx(a).epsilon(1e-12));
  // int phi - I(phi) = (1/8) int |grad phi|^2 = (1/8) a^2 (2 pi)^2 / 2
  CHECK(m.integral_minus_i == doctest::Approx(a * a * pi * pi / 4.0).epsilon(1e-10));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 2;
    TorusGrid gn(n, n == 1 ? 16 : 8);
    const auto phi = testing::random_trig_poly(rng, 2 * n, 2, 3, 0.001).sample(gn);
    REQUIRE(hessian_eigenvalues(complex_hessian(phi)).min() > 0.0);
    CHECK(mean_minus_sup_gap(phi).integral_minus_i >= -1e-10);
  }
}

TEST_CASE("level statistics") {
  TorusGrid g(1, 8);
  const double dt = 0.01;
  const auto phi = trivial_flow(g, 1.0, dt);
  const auto eF = constant_traj(g, 1.0, dt, 1.0);

  SUBCASE("trivial flow closed forms") {
    std::vector<double> s;
    for (int j = 0; j <= 12; ++j) s.push_back(0.1 * j);
    const auto st = level_stats(phi, eF, s);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double r = std::max(0.0, 1.0 - s[j]);
      CHECK(std::abs(st.A_s[j] - 0.5 * r * r) < dt * dt);
      CHECK(std::abs(st.phi_of_s[j] - r) <= dt);
      if (s[j] >= 1.0) {
        CHECK(st.A_s[j] == 0.0);
        CHECK(st.phi_of_s[j] == 0.0);
      }
    }
    CHECK(chebyshev_excess(st) <= 1e-12);
  }

  SUBCASE("brute-force summation and Chebyshev consistency") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TorusGrid gr(1, 8);
    Trajectory p(gr, 0.1), v(gr, 0.1), e(gr, 0.1);
    for (int k = 0; k <= 10; ++k) {
      ScalarField a(gr), b(gr), c(gr);
      for (std::size_t i = 0; i < gr.size(); ++i) {
        a[i] = u(rng);
        b[i] = 0.5 * u(rng);
        c[i] = std::exp(u(rng));
      }
      p.push_back(0.1 * k, a);
      v.push_back(0.1 * k, b);
      e.push_back(0.1 * k, c);
    }
    const double delta = 0.1;
    std::vector<double> s;
    for (int j = 0; j < 15; ++j) s.push_back(-0.5 + 0.1 * j);
    const auto st = level_stats(p, e, s, &v, delta);
    const auto w = p.time_weights();
    const double cell = gr.cell_volume();
    double l1 = 0.0, vsup = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      vsup = std::max(vsup, v[k].sup_abs());
      for (std::size_t i = 0; i < gr.size(); ++i) l1 += w[k] * cell * std::max(0.0, v[k][i] - p[k][i]);
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      double A = 0, P = 0, O = 0, Ad = 0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < gr.size(); ++i) {
          const double wk = w[k] * cell;
          A += wk * std::max(0.0, -p[k][i] - s[j]) * e[k][i];
          if (p[k][i] < -s[j]) P += wk * e[k][i];
          const double gap = (1 - delta) * v[k][i] - p[k][i] - s[j];
          if (gap > 0) O += wk;
          Ad += wk * std::max(0.0, gap) * e[k][i];
        }
      }
      CHECK(std::abs(st.A_s[j] - A) < 1e-12);
      CHECK(std::abs(st.phi_of_s[j] - P) < 1e-12);
      CHECK(std::abs(st.omega_vol[j] - O) < 1e-12);
      CHECK(std::abs(st.A_s_delta[j] - Ad) < 1e-12);
      if (s[j] > 0.0 && s[j] >= 2 * delta * vsup) CHECK(st.omega_vol[j] <= 2.0 / s[j] * l1 + 1e-12);
    }
    CHECK(chebyshev_excess(st) <= 1e-12);
  }

  SUBCASE("csv and argument checks") {
    const auto st = level_stats(phi, eF, {0.0, 0.5});
    std::ostringstream os;
    write_level_stats_csv(os, st);
    CHECK(os.str().rfind("s,A_s,phi_s,vol_omega,A_s_delta\n", 0) == 0);
    CHECK_THROWS_AS((void)level_stats(phi, eF, {0.5, 0.5}), InvalidArgument);
  }
}

TEST_CASE("De Giorgi extinction") {
  CHECK(de_giorgi_extinction({1.0, 1.0, 0.0, 1.0}) == 4.0);
  CHECK(de_giorgi_extinction({1.0, 1.0, 0.5, 1.0}) == 4.5);
  CHECK(de_giorgi_extinction({2.0, 0.5, 0.3, 0.0}) == 0.3);
  CHECK_THROWS_AS((void)de_giorgi_extinction({0.0, 1.0, 0.0, 1.0}), InvalidArgument);

  std::vector<double> s, phi;
  for (int i = 0; i <= 400; ++i) {
    s.push_back(i * 0.005);
    phi.push_back(std::pow(std::max(0.0, 1.0 - s.back()), 3));
  }
  const double delta = 1.0 / 3.0;
  const double B0 = fit_de_giorgi_constant(s, phi, delta, 0.0);
  CHECK(B0 == doctest::Approx(27.0 / 256.0).epsilon(1e-3));
  const auto check = check_de_giorgi_ladder(s, phi, B0, delta, 0.0);
  CHECK(check.hypothesis_holds);
  CHECK(check.threshold >= 1.0);
  CHECK(check.vanishes_at_threshold);

  const auto tight = check_de_giorgi_ladder(s, phi, 0.5 * B0, delta, 0.0);
  CHECK_FALSE(tight.hypothesis_holds);
  CHECK_THROWS_AS((void)check_de_giorgi_ladder(s, phi, B0, delta, 0.0012), InvalidArgument);
}

TEST_CASE("elementary inequality battery") {
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    CHECK(power_exponential_constant(p) == doctest::Approx(std::pow(p, p + 1) * std::exp(-p - 1)).epsilon(1e-10));
  }
  const double C2 = power_exponential_constant(2.0);
  CHECK(1.0 <= 1.0 + C2 * std::exp(2.0));

  const auto results = inequality_battery(10000);
  CHECK(results.size() == 8);
  for (const auto& r : results) {
    INFO(r.name);
    CHECK(r.checked >= 10000);
    CHECK(r.violations == 0);
    CHECK(r.worst_relative_excess <= 1e-12);
  }
}

TEST_CASE("Moser-Trudinger and exponential integrals") {
  TorusGrid g(1, 8);
  const double dt = 0.01;
  const auto phi = trivial_flow(g, 1.0, dt);

  const auto flat = moser_trudinger(phi, 0.3, 1.0, 1.0, ExponentBase::n_plus_2);
  for (double v : flat.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  const auto empty = moser_trudinger(phi, 0.0, 0.0, 1.0, ExponentBase::n_plus_1);
  CHECK(empty.sup == doctest::Approx(1.0).epsilon(1e-14));

  const double A0 = 0.5, beta = 0.1;
  for (auto base : {ExponentBase::n_plus_1, ExponentBase::n_plus_2}) {
    const double b = base == ExponentBase::n_plus_1 ? 2.0 : 3.0;
    const auto mt = moser_trudinger(phi, A0, 0.0, beta, base);
    for (std::size_t k = 0; k < mt.times.size(); ++k) {
      const double t = mt.times[k];
      CHECK(std::abs(mt.values[k] - std::exp(beta * std::pow(A0, -1.0 / b) * std::pow(t, 1.5))) < 1e-8);
    }
    const auto doubled = moser_trudinger(phi, A0, 0.0, 2 * beta, base);
    CHECK(doubled.sup > mt.sup);
  }

  const auto zero = exp_alpha_integral(constant_traj(g, 1.0, dt, 0.0), 2.0);
  for (double v : zero.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  const auto ea = exp_alpha_integral(phi, 1.0);
  for (std::size_t k = 0; k < ea.times.size(); ++k) CHECK(ea.values[k] == doctest::Approx(std::exp(ea.times[k])).epsilon(1e-12));
  CHECK(ea.sup == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS((void)exp_alpha_integral(phi, 0.0), InvalidArgument);
}

TEST_CASE("stability ratio") {
  TorusGrid g(1, 16);
  const auto phi = trivial_flow(g, 1.0, 0.05);
  const double p0 = 2.0;
  const double alpha = 0.5 * alpha_limit(1, p0);
  CHECK(conjugate_exponent(p0) == 2.0);
  CHECK(alpha_limit(1, p0) == doctest::Approx(0.2));
  CHECK(alpha_limit(1, p0, true) == doctest::Approx(0.4));

  const auto same = stability_ratio(phi, phi, alpha, p0);
  CHECK(same.lhs == 0.0);
  CHECK(same.ratio == 0.0);

  const double c = 0.3;
  const auto shifted = stability_ratio(phi.map([c](double x) { return x + c; }), phi, alpha, p0);
  CHECK(shifted.lhs == doctest::Approx(c));
  CHECK(shifted.sup_initial == doctest::Approx(c));
  CHECK(shifted.ratio <= 1.0 + 1e-12);
  CHECK(shifted.v_admissible_shape);

  const auto rising = from_function(g, 1.0, 0.05, [&](double t) { return ScalarField(g, t); });
  CHECK_FALSE(stability_ratio(rising, phi, alpha, p0).v_admissible_shape);
  CHECK_THROWS_AS((void)stability_ratio(phi, phi, 0.25, p0), InvalidArgument);
  CHECK_THROWS_AS((void)conjugate_exponent(1.0), InvalidArgument);
}

TEST_CASE("Hoelder moduli") {
  SUBCASE("trivial flow") {
    TorusGrid g(1, 32);
    const auto h = holder_moduli(trivial_flow(g, 1.0, 0.01));
    CHECK(h.time.alpha == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.time.C == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::isinf(h.space.alpha));
    CHECK(h.space.C == 0.0);
  }
  SUBCASE("constant in time") {
    TorusGrid g(1, 32);
    const auto h = holder_moduli(constant_traj(g, 1.0, 0.1, 0.2));
    CHECK(std::isinf(h.time.alpha));
    CHECK(h.time.C == 0.0);
  }
  SUBCASE("manufactured smooth flow") {
    TorusGrid g(1, 128);
    const auto traj = from_function(g, 0.1, 0.005, [&](double t) { return manufactured_solution(g, t); });
    const auto h = holder_moduli(traj);
    CHECK(h.time.alpha >= 0.99);
    CHECK(h.space.alpha >= 0.99);
  }
  SUBCASE("too few levels") {
    TorusGrid g(1, 8);
    CHECK_THROWS_AS((void)holder_moduli(trivial_flow(g, 0.5, 0.1)), InvalidArgument);
  }
}

TEST_CASE("s_* bound and scan") {
  TorusGrid g(1, 8);
  const double dt = 0.01;
  const auto phi = trivial_flow(g, 1.0, dt);
  const auto eF = constant_traj(g, 1.0, dt, 1.0);

  SUBCASE("v = phi") {
    const double delta = 0.3;
    const auto b = s_star_bound(phi, phi, eF, delta, 2.0, 5.0, 2.0);
    CHECK(b.initial_term == 0.0);
    CHECK(b.l1_term == 0.0);
    CHECK(b.bound == doctest::Approx(2 * delta * 1.0));
  }
  SUBCASE("direct evaluation near delta = 1") {
    const double c = 0.2, delta = 0.999, C1 = 0.7, beta = 3.0;
    const auto v = phi.map([c](double x) { return x + c; });
    const auto b = s_star_bound(v, phi, eF, delta, beta, C1, 2.0);
    const double l1 = c * 1.0;
    const double third = C1 * std::pow(delta, -2.0 * 2.0 / (1.0 - 1.0 / beta)) * l1;
    const double expected = std::max({2 * c, 2 * delta * 0.8, third});
    CHECK(b.bound == doctest::Approx(expected).epsilon(1e-12));
    CHECK(b.margin == doctest::Approx(b.bound - b.scanned));
  }
  SUBCASE("scan matches closed-form level sets") {
    const double c = 0.5, delta = 0.2;
    const auto v = phi.map([c](double x) { return x + c; });
    const double s2 = (1 - delta) * c + delta - std::sqrt(2.0) * delta * delta;
    const double expected = std::max({(1 - delta) * c, s2, 2 * delta * c});
    CHECK(std::abs(scan_s_star(v, phi, eF, delta) - expected) < 1e-3);
  }
  CHECK_THROWS_AS((void)s_star_bound(phi, phi, eF, 1.0, 2.0, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS((void)s_star_bound(phi, phi, eF, 0.5, 1.0, 1.0, 2.0), InvalidArgument);
}

TEST_CASE("estimate report JSON") {
  EstimateReport r;
  r.entropy_p = 1.5;
  r.I_series = {0.0, -0.5};
  r.holder.space.alpha = std::numeric_limits<double>::infinity();
  const auto text = to_json(r);
  CHECK(text == to_json(r));
  const auto j = nlohmann::json::parse(text);
  CHECK(j["holder_space"]["alpha"] == "inf");
  CHECK(j["I_series"][1] == -0.5);
  CHECK(j["entropy_p"] == 1.5);
}
