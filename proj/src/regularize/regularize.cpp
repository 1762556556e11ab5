#include "pmaflow/regularize/regularize.hpp"

#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pmaflow/error.hpp"
#include "pmaflow/grid/hessian.hpp"

namespace pmaflow {

void RegularizationParams::validate(const TorusGrid& grid) const {
  if (K && !(*K >= 0.0)) throw InvalidArgument("regularize.K: must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("regularize.gamma: must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 0.5 * grid.period)) {
    throw InvalidArgument("regularize.epsilon: must lie in (0, L/2)");
  }
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("regularize.theta: must lie in (0, 1)");
  if (s_samples < 4) throw InvalidArgument("regularize.s_samples: need at least 4");
  if (!(s_min_ratio > 0.0 && s_min_ratio < 1.0)) {
    throw InvalidArgument("regularize.s_min_ratio: must lie in (0, 1)");
  }
  if (c && !(*c >= 0.0)) throw InvalidArgument("regularize.c: must be >= 0");
}

double RegularizationParams::K_value(const TorusGrid& grid) const {
  return K ? *K : default_kernel(grid.real_dim()).second_moment();
}

double RegularizationParams::c_value() const { return c ? *c : std::pow(epsilon, gamma); }

std::vector<double> RegularizationParams::s_ladder() const {
  std::vector<double> s(s_samples);
  for (int i = 0; i < s_samples; ++i) {
    s[i] = epsilon * std::pow(s_min_ratio, 1.0 - static_cast<double>(i) / (s_samples - 1));
  }
  s.back() = epsilon;
  return s;
}

ScalarField mollify(const ScalarField& field, double s, KernelMode mode) {
  return convolve_radial(field, s, default_kernel(field.grid().real_dim()), mode);
}

Trajectory mollify(const Trajectory& traj, double s, KernelMode mode) {
  Trajectory out(traj.grid(), traj.dt());
  for (std::size_t k = 0; k < traj.size(); ++k) out.push_back(traj.times()[k], mollify(traj[k], s, mode));
  return out;
}

ScalarField kiselman_legendre(const ScalarField& field, const RegularizationParams& params) {
  const auto& grid = field.grid();
  params.validate(grid);
  const double K = params.K_value(grid);
  const double K_flat = default_kernel(grid.real_dim()).second_moment();
  const double c = params.c_value();
  const double eps = params.epsilon;
  const auto s = params.s_ladder();
  const std::size_t m = s.size();

  // g_j = rho_{s_j} phi + K_flat s_j^2, nondecreasing in s for admissible phi.
  std::vector<ScalarField> g;
  g.reserve(m);
  for (double sj : s) g.push_back(mollify(field, sj) + K_flat * sj * sj);

  std::vector<double> u(m);
  for (std::size_t j = 0; j < m; ++j) u[j] = s[j] * s[j];
  auto tail = [&](double uu) { return (K - K_flat) * uu - K * eps * eps - 0.5 * c * std::log(uu / (eps * eps)); };

  ScalarField out(grid);
  std::vector<double> uj, gj;
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double v = g[j][i] + tail(u[j]);
      if (v < best_val) {
        best_val = v;
        best = j;
      }
    }
    const std::size_t lo = best == 0 ? 0 : best - 1;
    const std::size_t hi = std::min(m - 1, best + 1);
    uj.assign(u.begin(), u.end());
    gj.resize(m);
    for (std::size_t j = 0; j < m; ++j) gj[j] = g[j][i];
    boost::math::interpolators::pchip<std::vector<double>> model(std::move(uj), std::move(gj));
    auto objective = [&](double uu) { return model(uu) + tail(uu); };
    const auto [u_star, v_star] = boost::math::tools::brent_find_minima(objective, u[lo], u[hi], 50);
    (void)u_star;
    out[i] = std::min(best_val, v_star);
  }
  return out;
}

Trajectory kiselman_legendre(const Trajectory& traj, const RegularizationParams& params) {
  Trajectory out(traj.grid(), traj.dt());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.push_back(traj.times()[k], kiselman_legendre(traj[k], params));
  }
  return out;
}

ThetaScaleResult theta_scale_bound(const Trajectory& phi, const RegularizationParams& params,
                                   double measured_gap) {
  if (phi.empty()) throw InvalidArgument("theta_scale_bound: empty trajectory");
  params.validate(phi.grid());
  const double K = params.K_value(phi.grid());
  const double c = params.c_value();
  const double eps = params.epsilon;
  const double scaled_gap = c > 0.0 ? std::max(0.0, measured_gap) / c : 0.0;
  ThetaScaleResult r;
  r.theta = std::min(params.theta, 0.5 * std::exp(-(K + scaled_gap)));
  r.sup_gap = -std::numeric_limits<double>::infinity();
  for (const auto& f : phi.fields()) r.sup_gap = std::max(r.sup_gap, (mollify(f, r.theta * eps) - f).max());
  r.contract_bound = (scaled_gap + K) * c + K * eps * eps;
  r.holds = r.sup_gap <= r.contract_bound + 1e-12;
  return r;
}

Trajectory time_average(const Trajectory& phi, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("time_average: eps must be positive");
  if (phi.empty()) throw InvalidArgument("time_average: empty trajectory");
  const auto& t = phi.times();
  const std::size_t K = phi.size();
  const std::size_t P = phi.grid().size();
  // Running integral of the piecewise-linear interpolant from t_0.
  std::vector<std::vector<double>> cum(K, std::vector<double>(P, 0.0));
  for (std::size_t k = 1; k < K; ++k) {
    const double h = t[k] - t[k - 1];
    for (std::size_t i = 0; i < P; ++i) cum[k][i] = cum[k - 1][i] + 0.5 * h * (phi[k][i] + phi[k - 1][i]);
  }
  auto integral_to = [&](double tau, std::size_t i) {
    if (tau <= t[0]) return (tau - t[0]) * phi[0][i];
    const auto it = std::upper_bound(t.begin(), t.end(), tau);
    const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    if (k + 1 >= K) return cum[K - 1][i];
    const double h = t[k + 1] - t[k];
    const double w = (tau - t[k]) / h;
    const double at_tau = (1.0 - w) * phi[k][i] + w * phi[k + 1][i];
    return cum[k][i] + 0.5 * (tau - t[k]) * (phi[k][i] + at_tau);
  };
  Trajectory out(phi.grid(), phi.dt());
  for (std::size_t k = 0; k < K; ++k) {
    ScalarField avg(phi.grid());
    for (std::size_t i = 0; i < P; ++i) avg[i] = (cum[k][i] - integral_to(t[k] - eps, i)) / eps;
    out.push_back(t[k], std::move(avg));
  }
  return out;
}

namespace {

double uniform_step(const std::vector<double>& times, std::size_t count) {
  if (times.size() != count || count < 2) throw InvalidArgument("decreasing_holder: need matching samples, at least 2");
  const double dt = (times.back() - times.front()) / static_cast<double>(count - 1);
  for (std::size_t k = 1; k < count; ++k) {
    if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * std::max(1.0, std::abs(times.back()))) {
      throw InvalidArgument("decreasing_holder: times must be uniform");
    }
  }
  return dt;
}

/// Calls visit(eps, gap) for every grid pair, where gap is the trailing
/// average of f over [t - eps, t] minus f(t), with constant extension.
template <class Visit>
void for_each_average_gap(double dt, const std::vector<double>& f, Visit&& visit) {
  const std::size_t K = f.size();
  std::vector<double> cum(K, 0.0);
  for (std::size_t k = 1; k < K; ++k) cum[k] = cum[k - 1] + 0.5 * dt * (f[k] + f[k - 1]);
  auto cum_at = [&](long j) { return j >= 0 ? cum[static_cast<std::size_t>(j)] : j * dt * f[0]; };
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 1; m <= 2 * (K - 1); ++m) {
      const double eps = m * dt;
      visit(eps, (cum[k] - cum_at(static_cast<long>(k) - static_cast<long>(m))) / eps - f[k]);
    }
  }
}

void require_nonincreasing(const std::vector<double>& f) {
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (f[k] > f[k - 1]) throw InvalidArgument("decreasing_holder: samples must be nonincreasing");
  }
}

void holder_conclusion(double dt, const std::vector<double>& f, double C0, double alpha,
                       DecreasingHolderResult& r) {
  for (std::size_t a = 0; a < f.size(); ++a) {
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      const double diff = std::abs(f[a] - f[b]);
      const double bound = 4.0 * C0 * std::pow((b - a) * dt, alpha);
      const double ratio = bound > 0.0 ? diff / bound : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      r.worst_ratio = std::max(r.worst_ratio, ratio);
    }
  }
  r.conclusion_holds = r.worst_ratio <= 1.0 + 1e-12;
}

}  // namespace

double measure_c0(const std::vector<double>& times, const std::vector<double>& f, double alpha) {
  const double dt = uniform_step(times, f.size());
  require_nonincreasing(f);
  double c0 = 0.0;
  for_each_average_gap(dt, f, [&](double eps, double gap) { c0 = std::max(c0, gap / std::pow(eps, alpha)); });
  return c0;
}

DecreasingHolderResult decreasing_holder_from_averages(const std::vector<double>& times,
                                                       const std::vector<double>& f, double C0,
                                                       double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("decreasing_holder: alpha must lie in (0, 1]");
  if (!(C0 >= 0.0)) throw InvalidArgument("decreasing_holder: C0 must be >= 0");
  const double dt = uniform_step(times, f.size());
  require_nonincreasing(f);
  DecreasingHolderResult r;
  for_each_average_gap(dt, f, [&](double eps, double gap) {
    const double bound = C0 * std::pow(eps, alpha);
    const double ratio = bound > 0.0 ? gap / bound : (gap > 1e-14 ? std::numeric_limits<double>::infinity() : 0.0);
    r.worst_hypothesis_ratio = std::max(r.worst_hypothesis_ratio, ratio);
  });
  r.hypothesis_holds = r.worst_hypothesis_ratio <= 1.0 + 1e-12;
  holder_conclusion(dt, f, C0, alpha, r);
  return r;
}

DecreasingHolderResult decreasing_holder_check(const Trajectory& phi, double alpha, double* c0_out) {
  const std::size_t K = phi.size();
  std::vector<std::vector<double>> series(phi.grid().size(), std::vector<double>(K));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < series.size(); ++i) series[i][k] = phi[k][i];
  }
  double c0 = 0.0;
  for (const auto& f : series) c0 = std::max(c0, measure_c0(phi.times(), f, alpha));
  if (c0_out) *c0_out = c0;
  DecreasingHolderResult total;
  for (const auto& f : series) {
    const auto r = decreasing_holder_from_averages(phi.times(), f, c0, alpha);
    total.worst_hypothesis_ratio = std::max(total.worst_hypothesis_ratio, r.worst_hypothesis_ratio);
    total.worst_ratio = std::max(total.worst_ratio, r.worst_ratio);
    total.hypothesis_holds = total.hypothesis_holds && r.hypothesis_holds;
    total.conclusion_holds = total.conclusion_holds && r.conclusion_holds;
  }
  return total;
}

ScalarField real_laplacian(const ScalarField& field) { return 4.0 * complex_laplacian(field); }

namespace {

std::vector<double> periodic_distances(const TorusGrid& g, std::size_t center) {
  const auto z = g.coordinates(center);
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.coordinates(i);
    double r2 = 0.0;
    for (int a = 0; a < g.real_dim(); ++a) {
      const double e = std::remainder(x[a] - z[a], g.period);
      r2 += e * e;
    }
    d[i] = std::sqrt(r2);
  }
  return d;
}

double ball_integral(const std::vector<double>& dist, const ScalarField& density, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= r) s += density[i];
  }
  return s * density.grid().cell_volume();
}

}  // namespace

BallMassProfile ball_mass_profile(const ScalarField& field, const std::vector<std::size_t>& centers,
                                  const std::vector<double>& radii) {
  const auto& g = field.grid();
  for (double r : radii) {
    if (!(r > 0.0 && r < 0.5 * g.period)) throw InvalidArgument("ball_mass_profile: radii must lie in (0, L/2)");
  }
  for (auto c : centers) {
    if (c >= g.size()) throw InvalidArgument("ball_mass_profile: center out of range");
  }
  const auto lap = real_laplacian(field).map([](double v) { return std::abs(v); });
  BallMassProfile out;
  // Pooled log-log slope: each center keeps its own intercept.
  double sxx = 0.0, sxy = 0.0;
  for (auto c : centers) {
    const auto dist = periodic_distances(g, c);
    std::vector<double> lx, ly;
    for (double r : radii) {
      const double mass = ball_integral(dist, lap, r);
      out.rows.push_back({c, r, mass});
      if (r >= 4.0 * g.spacing() && mass > 0.0) {
        lx.push_back(std::log(r));
        ly.push_back(std::log(mass));
      }
    }
    if (lx.size() < 2) continue;
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    for (std::size_t q = 0; q < lx.size(); ++q) {
      sxx += (lx[q] - mx) * (lx[q] - mx);
      sxy += (lx[q] - mx) * (ly[q] - my);
    }
  }
  out.exponent = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::infinity();
  return out;
}

LowerBoundConstants lower_bound_constants(const RadialKernel& kernel, int n_complex) {
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const int d = kernel.real_dim();
  if (d != 2 * n_complex) throw InvalidArgument("lower_bound_constants: kernel dimension mismatch");
  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  auto radial_mass = [&](double r) { return area * std::pow(r, d - 1) * kernel.profile(r); };
  auto tail = [&](double sigma) { return Gauss::integrate(radial_mass, sigma, 1.0); };
  LowerBoundConstants k;
  k.c_kernel = Gauss::integrate([&](double sigma) { return tail(sigma) / (area * std::pow(sigma, d - 1)); },
                                0.5, 1.0);
  k.C = kernel.second_moment();
  return k;
}

std::vector<LowerBoundSample> lower_bound_check(const ScalarField& field,
                                                const std::vector<std::size_t>& centers, double eps) {
  const auto& g = field.grid();
  const auto& kernel = default_kernel(g.real_dim());
  const auto k = lower_bound_constants(kernel, g.n_complex);
  const auto smooth = mollify(field, eps);
  const auto lap = real_laplacian(field);
  std::vector<LowerBoundSample> out;
  for (auto c : centers) {
    if (c >= g.size()) throw InvalidArgument("lower_bound_check: center out of range");
    LowerBoundSample s;
    s.center = c;
    s.lhs = smooth[c] - field[c];
    s.ball_term = k.c_kernel * std::pow(eps, 2 - g.real_dim()) *
                  ball_integral(periodic_distances(g, c), lap, 0.5 * eps);
    s.slack = s.lhs - s.ball_term + k.C * eps * eps;
    out.push_back(s);
  }
  return out;
}

}  // namespace pmaflow
