#include "pmaflow/estimates/estimates.hpp"

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "pmaflow/error.hpp"
#include "pmaflow/grid/hessian.hpp"

namespace pmaflow {

namespace {

void require_compatible(const Trajectory& a, const Trajectory& b, const char* who) {
  if (a.empty() || a.size() != b.size() || !(a.grid() == b.grid())) {
    throw InvalidArgument(std::string(who) + ": trajectories are not compatible");
  }
}

/// Space-time quadrature of f(k, i) with trapezoid weights in time.
double spacetime_sum(const Trajectory& traj, const std::function<double(std::size_t, std::size_t)>& f) {
  const auto w = traj.time_weights();
  const double cell = traj.grid().cell_volume();
  double total = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (w[k] == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < traj[k].size(); ++i) s += f(k, i);
    total += w[k] * s * cell;
  }
  return total;
}

void require_nonincreasing(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) throw Error(std::string("level_stats: ladder ") + name + " increases");
  }
}

}  // namespace

double entropy(const Trajectory& eF, const Trajectory& F, double p, double weight_power,
               EntropyIntegrand integrand) {
  require_compatible(eF, F, "entropy");
  if (!(p > 0.0)) throw InvalidArgument("entropy: p must be positive");
  return integrate_spacetime(eF, F, [&](double e, double f) {
    const double w = integrand == EntropyIntegrand::soft_power ? std::pow(f * f + 1.0, 0.5 * p)
                                                               : std::pow(std::abs(f), p) + 1.0;
    return std::pow(e, weight_power) * w;
  });
}

double i_functional(const ScalarField& phi) {
  const auto h = complex_hessian(phi);
  const int n = phi.grid().n_complex;
  ScalarField integrand(phi.grid());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const Herm A = h.at(i).plus_identity();
    const double mixed = n == 1 ? 1.0 + A.a : 1.0 + 0.5 * A.trace() + A.det();
    integrand[i] = phi[i] * mixed;
  }
  return integrate(integrand) / (n + 1);
}

ISeries i_series(const Trajectory& phi, const Trajectory& eF) {
  require_compatible(phi, eF, "i_series");
  ISeries out;
  out.times = phi.times();
  for (const auto& f : phi.fields()) out.values.push_back(i_functional(f));
  for (std::size_t k = 1; k + 1 < phi.size(); ++k) {
    const double dIdt = (out.values[k + 1] - out.values[k - 1]) / (out.times[k + 1] - out.times[k - 1]);
    out.derivative_residual = std::max(out.derivative_residual, std::abs(dIdt + integrate(eF[k])));
  }
  return out;
}

MeanGap mean_minus_sup_gap(const ScalarField& phi) {
  const double total = integrate(phi);
  return {phi.max() - total / phi.grid().volume(), total - i_functional(phi)};
}

LevelStats level_stats(const Trajectory& phi, const Trajectory& eF, const std::vector<double>& s_grid,
                       const Trajectory* comparator, double delta) {
  require_compatible(phi, eF, "level_stats");
  if (comparator) require_compatible(phi, *comparator, "level_stats");
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > s_grid[i - 1])) throw InvalidArgument("level_stats: s_grid must increase");
  }
  LevelStats st;
  st.s_grid = s_grid;
  for (double s : s_grid) {
    st.A_s.push_back(spacetime_sum(phi, [&](std::size_t k, std::size_t i) {
      return std::max(0.0, -phi[k][i] - s) * eF[k][i];
    }));
    st.phi_of_s.push_back(spacetime_sum(phi, [&](std::size_t k, std::size_t i) {
      return phi[k][i] < -s ? eF[k][i] : 0.0;
    }));
    if (comparator) {
      const auto& v = *comparator;
      st.omega_vol.push_back(spacetime_sum(phi, [&](std::size_t k, std::size_t i) {
        return (1.0 - delta) * v[k][i] - phi[k][i] - s > 0.0 ? 1.0 : 0.0;
      }));
      st.A_s_delta.push_back(spacetime_sum(phi, [&](std::size_t k, std::size_t i) {
        return std::max(0.0, (1.0 - delta) * v[k][i] - phi[k][i] - s) * eF[k][i];
      }));
    }
  }
  require_nonincreasing(st.A_s, "A_s");
  require_nonincreasing(st.phi_of_s, "phi(s)");
  require_nonincreasing(st.omega_vol, "omega_vol");
  require_nonincreasing(st.A_s_delta, "A_s_delta");
  return st;
}

double chebyshev_excess(const LevelStats& st) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < st.s_grid.size(); ++i) {
    for (std::size_t j = i + 1; j < st.s_grid.size(); ++j) {
      worst = std::max(worst, (st.s_grid[j] - st.s_grid[i]) * st.phi_of_s[j] - st.A_s[i]);
    }
  }
  return worst;
}

void write_level_stats_csv(std::ostream& os, const LevelStats& st) {
  os << "s,A_s,phi_s,vol_omega,A_s_delta\n";
  os.precision(17);
  for (std::size_t i = 0; i < st.s_grid.size(); ++i) {
    os << st.s_grid[i] << ',' << st.A_s[i] << ',' << st.phi_of_s[i] << ',';
    if (i < st.omega_vol.size()) os << st.omega_vol[i];
    os << ',';
    if (i < st.A_s_delta.size()) os << st.A_s_delta[i];
    os << '\n';
  }
}

double de_giorgi_extinction(const DeGiorgiParams& p) {
  if (!(p.B0 > 0.0) || !(p.delta > 0.0) || p.phi_s0 < 0.0) {
    throw InvalidArgument("de_giorgi_extinction: need B0 > 0, delta > 0, phi(s0) >= 0");
  }
  return p.s0 + 2.0 * p.B0 * std::pow(p.phi_s0, p.delta) / (1.0 - std::pow(2.0, -p.delta));
}

namespace {

std::size_t ladder_start(const std::vector<double>& s, const std::vector<double>& phi, double s0) {
  if (s.size() != phi.size() || s.empty()) throw InvalidArgument("De Giorgi ladder: bad sizes");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(s[i] - s0) <= 1e-12 * std::max(1.0, std::abs(s0))) return i;
  }
  throw InvalidArgument("De Giorgi ladder: s0 must be a ladder point");
}

}  // namespace

DeGiorgiCheck check_de_giorgi_ladder(const std::vector<double>& s, const std::vector<double>& phi,
                                     double B0, double delta, double s0) {
  const std::size_t i0 = ladder_start(s, phi, s0);
  DeGiorgiCheck out;
  for (std::size_t i = i0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double lhs = (s[j] - s[i]) * phi[j];
      const double rhs = B0 * std::pow(phi[i], 1.0 + delta);
      const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      out.worst_ratio = std::max(out.worst_ratio, ratio);
    }
  }
  out.hypothesis_holds = out.worst_ratio <= 1.0 + 1e-12;
  out.threshold = de_giorgi_extinction({B0, delta, s0, phi[i0]});
  for (std::size_t i = i0; i < s.size(); ++i) {
    if (s[i] >= out.threshold && phi[i] > 0.0) out.vanishes_at_threshold = false;
  }
  return out;
}

double fit_de_giorgi_constant(const std::vector<double>& s, const std::vector<double>& phi,
                              double delta, double s0) {
  const std::size_t i0 = ladder_start(s, phi, s0);
  double B0 = 0.0;
  for (std::size_t i = i0; i < s.size(); ++i) {
    if (!(phi[i] > 0.0)) continue;
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      B0 = std::max(B0, (s[j] - s[i]) * phi[j] / std::pow(phi[i], 1.0 + delta));
    }
  }
  return B0;
}

double power_exponential_constant(double p) {
  if (!(p > 0.0)) throw InvalidArgument("power_exponential_constant: p must be positive");
  // maximize log(p) + (x - 1) + p log x - 2x
  auto neg_log = [p](double x) { return -(std::log(p) + x - 1.0 + p * std::log(x) - 2.0 * x); };
  const auto [x, v] = boost::math::tools::brent_find_minima(neg_log, 1e-9, 10.0 * p + 10.0, 52);
  (void)x;
  return std::exp(-v);
}

std::vector<InequalityResult> inequality_battery(long min_tuples) {
  auto logspace = [](double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
    return v;
  };
  auto per_axis = [&](int dims) {
    return static_cast<int>(std::ceil(std::pow(static_cast<double>(min_tuples), 1.0 / dims) - 1e-9));
  };
  auto record = [](InequalityResult& r, double lhs, double rhs) {
    ++r.checked;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double excess = (lhs - rhs) / scale;
    if (r.checked == 1 || excess > r.worst_relative_excess) r.worst_relative_excess = excess;
    if (excess > 1e-12) ++r.violations;
  };

  std::vector<InequalityResult> out;
  for (double p : {1.5, 2.0, 3.0}) {
    InequalityResult r{"power_exponential p=" + std::to_string(p).substr(0, 3)};
    const double C = power_exponential_constant(p);
    const auto axis = logspace(1e-3, 30.0, per_axis(2));
    for (double x : axis) {
      for (double y : axis) {
        record(r, std::pow(x, p) * std::exp(y),
               std::exp(y) * std::pow(1.0 + y, p) + C * std::exp(2.0 * x));
      }
    }
    out.push_back(r);
  }
  for (int n : {1, 2}) {
    InequalityResult r{"young_weighted n=" + std::to_string(n)};
    const auto axis = logspace(1e-2, 1e2, per_axis(4));
    const double inv = 1.0 / n;
    for (double A : axis)
      for (double B : axis)
        for (double x : axis)
          for (double y : axis) {
            record(r, std::pow(B * std::pow(A, inv), n / (n + 1.0)) * x,
                   A * y + B * std::pow(x, 1.0 + inv) / std::pow(y, inv));
          }
    out.push_back(r);
  }
  for (int n : {1, 2}) {
    InequalityResult r{"young_power n=" + std::to_string(n)};
    const auto axis = logspace(1e-2, 1e2, per_axis(3));
    for (double A : axis)
      for (double B : axis)
        for (double y : axis) {
          record(r, std::pow(n, -n / (n + 1.0)) * std::pow(A, 1.0 / (n + 1)) * std::pow(B, n / (n + 1.0)),
                 A * std::pow(y, n) + B / y);
        }
    out.push_back(r);
  }
  {
    InequalityResult r{"xy_entropy"};
    const int m = per_axis(2);
    const auto xs = logspace(1e-3, 1e3, m);
    for (double x : xs) {
      for (int j = 0; j < m; ++j) {
        const double y = -5.0 + 15.0 * j / (m - 1);
        record(r, x * y, x * std::log(x) + std::exp(y - 1.0));
      }
    }
    out.push_back(r);
  }
  return out;
}

TimeSeries moser_trudinger(const Trajectory& phi, double A_s, double s, double beta,
                           ExponentBase base) {
  if (phi.empty()) throw InvalidArgument("moser_trudinger: empty trajectory");
  if (A_s < 0.0) throw InvalidArgument("moser_trudinger: A_s must be >= 0");
  const int n = phi.grid().n_complex;
  const double power = (n + 2.0) / (n + 1.0);
  const double b = base == ExponentBase::n_plus_1 ? n + 1.0 : n + 2.0;
  TimeSeries out;
  out.times = phi.times();
  for (const auto& f : phi.fields()) {
    double v;
    if (A_s == 0.0) {
      v = phi.grid().volume();
    } else {
      const double scale = beta * std::pow(A_s, -1.0 / b);
      v = integrate(f.map([&](double x) { return std::exp(scale * std::pow(std::max(0.0, -x - s), power)); }));
    }
    out.values.push_back(v);
  }
  out.sup = *std::max_element(out.values.begin(), out.values.end());
  return out;
}

TimeSeries exp_alpha_integral(const Trajectory& phi, double alpha0) {
  if (phi.empty()) throw InvalidArgument("exp_alpha_integral: empty trajectory");
  if (!(alpha0 > 0.0)) throw InvalidArgument("exp_alpha_integral: alpha0 must be positive");
  TimeSeries out;
  out.times = phi.times();
  for (const auto& f : phi.fields()) {
    out.values.push_back(integrate(f.map([&](double x) { return std::exp(-alpha0 * x); })));
  }
  out.sup = *std::max_element(out.values.begin(), out.values.end());
  return out;
}

double conjugate_exponent(double p0) {
  if (!(p0 > 1.0)) throw InvalidArgument("conjugate_exponent: p0 must exceed 1");
  return p0 / (p0 - 1.0);
}

double alpha_limit(int n, double p0, bool relaxed) {
  return (relaxed ? 2.0 : 1.0) / (1.0 + conjugate_exponent(p0) * (n + 1));
}

StabilityResult stability_ratio(const Trajectory& v, const Trajectory& phi, double alpha, double p0) {
  require_compatible(v, phi, "stability_ratio");
  const int n = phi.grid().n_complex;
  if (!(alpha > 0.0) || !(alpha < alpha_limit(n, p0))) {
    throw InvalidArgument("stability_ratio: need 0 < alpha < 1/(1 + q0 (n+1))");
  }
  StabilityResult r;
  r.lhs = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) r.lhs = std::max(r.lhs, (v[k] - phi[k]).max());
  r.sup_initial = std::max(0.0, (v[0] - phi[0]).max());
  r.l1_gap = integrate_spacetime(v, phi, [](double a, double b) { return std::max(0.0, a - b); });
  r.rhs = std::max(r.sup_initial, std::pow(r.l1_gap, alpha));
  if (r.rhs > 0.0) {
    r.ratio = std::max(0.0, r.lhs) / r.rhs;
  } else {
    r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k > 0 && (v[k] - v[k - 1]).max() > 1e-10) r.v_admissible_shape = false;
    if (hessian_eigenvalues(complex_hessian(v[k])).min() < -1e-8) r.v_admissible_shape = false;
  }
  return r;
}

namespace {

HolderFit fit_quotients(std::vector<double> seps, std::vector<double> quots, double zero_level) {
  HolderFit fit;
  fit.separations = seps;
  fit.quotients = quots;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < seps.size(); ++i) {
    if (quots[i] > zero_level) {
      lx.push_back(std::log(seps[i]));
      ly.push_back(std::log(quots[i]));
    }
  }
  if (lx.size() < 2) {
    fit.alpha = std::numeric_limits<double>::infinity();
    fit.C = 0.0;
    return fit;
  }
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  fit.alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.C = std::exp((sy - fit.alpha * sx) / m);
  return fit;
}

}  // namespace

HolderModuli holder_moduli(const Trajectory& phi) {
  if (phi.size() < 8) throw InvalidArgument("holder_moduli: need at least 8 time levels");
  const auto& g = phi.grid();
  double scale = 0.0;
  for (const auto& f : phi.fields()) scale = std::max(scale, f.sup_abs());
  const double zero_level = 1e-12 * std::max(1.0, scale);
  const auto& t = phi.times();
  const double span = t.back() - t.front();
  const double dt = phi.dt();

  std::vector<double> seps, quots;
  for (std::size_t m = 1; m * dt <= 0.25 * span + 1e-12 * span; m *= 2) {
    double q = 0.0;
    for (std::size_t k = 0; k + m < phi.size(); ++k) {
      if (std::abs(t[k + m] - t[k] - m * dt) > 1e-9 * span) continue;
      q = std::max(q, sup_distance(phi[k + m], phi[k]));
    }
    seps.push_back(m * dt);
    quots.push_back(q);
  }
  HolderModuli out;
  out.time = fit_quotients(seps, quots, zero_level);

  seps.clear();
  quots.clear();
  const int N = g.points_per_axis;
  const int top = std::max(8, N / 16);
  for (int j = 4; j <= top && j < N / 2; j *= 2) {
    double q = 0.0;
    for (const auto& f : phi.fields()) {
      for (int a = 0; a < g.real_dim(); ++a) {
        std::array<int, 4> off{};
        off[a] = j;
        for (std::size_t i = 0; i < f.size(); ++i) q = std::max(q, std::abs(f[g.shifted(i, off)] - f[i]));
      }
    }
    seps.push_back(j * g.spacing());
    quots.push_back(q);
  }
  out.space = fit_quotients(seps, quots, zero_level);
  return out;
}

double scan_s_star(const Trajectory& v, const Trajectory& phi, const Trajectory& eF, double delta) {
  require_compatible(v, phi, "scan_s_star");
  require_compatible(phi, eF, "scan_s_star");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("scan_s_star: need 0 < delta < 1");
  const int n = phi.grid().n_complex;
  const double cond1 = std::max(0.0, ((1.0 - delta) * v[0] - phi[0]).max());
  double vsup = 0.0, top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    vsup = std::max(vsup, v[k].sup_abs());
    top = std::max(top, ((1.0 - delta) * v[k] - phi[k]).max());
  }
  const double cond3 = 2.0 * delta * vsup;
  const double target = std::pow(delta, n + 2);
  auto A = [&](double s) {
    return spacetime_sum(phi, [&](std::size_t k, std::size_t i) {
      return std::max(0.0, (1.0 - delta) * v[k][i] - phi[k][i] - s) * eF[k][i];
    });
  };
  // A is continuous and nonincreasing with A(top) = 0.
  double hi = top, lo = top - 1.0;
  for (double step = 1.0; A(lo) <= target && lo > std::max(cond1, cond3) - 1.0; step *= 2.0) lo -= step;
  double cond2 = lo;
  if (A(lo) > target) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (A(mid) > target ? lo : hi) = mid;
    }
    cond2 = hi;
  }
  return std::max({cond1, cond2, cond3});
}

SStarBound s_star_bound(const Trajectory& v, const Trajectory& phi, const Trajectory& eF,
                        double delta, double beta, double C1, double p0) {
  require_compatible(v, phi, "s_star_bound");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("s_star_bound: need 0 < delta < 1");
  if (!(beta > 1.0)) throw InvalidArgument("s_star_bound: need beta > 1");
  const int n = phi.grid().n_complex;
  const double q0 = conjugate_exponent(p0);
  SStarBound b;
  double vsup = 0.0;
  for (const auto& f : v.fields()) vsup = std::max(vsup, f.sup_abs());
  b.initial_term = 2.0 * std::max(0.0, (v[0] - phi[0]).max());
  b.comparator_term = 2.0 * delta * vsup;
  const double l1 = integrate_spacetime(v, phi, [](double a, double c) { return std::max(0.0, a - c); });
  b.l1_term = C1 * std::pow(delta, -q0 * (n + 1) / (1.0 - 1.0 / beta)) * l1;
  b.bound = std::max({b.initial_term, b.comparator_term, b.l1_term});
  b.scanned = scan_s_star(v, phi, eF, delta);
  b.margin = b.bound - b.scanned;
  return b;
}

std::string to_json(const EstimateReport& r) {
  using nlohmann::ordered_json;
  auto num = [](double x) -> ordered_json {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return x;
  };
  auto fit = [&](const HolderFit& f) {
    ordered_json j;
    j["alpha"] = num(f.alpha);
    j["C"] = num(f.C);
    return j;
  };
  ordered_json j;
  j["entropy_p"] = num(r.entropy_p);
  j["I_series"] = r.I_series;
  j["I_derivative_residual"] = num(r.I_derivative_residual);
  j["mt_integrals"] = r.mt_integrals;
  j["exp_alpha0"] = r.exp_alpha0;
  j["holder_time"] = fit(r.holder.time);
  j["holder_space"] = fit(r.holder.space);
  j["stability_ratio"] = num(r.stability_ratio);
  return j.dump(2);
}

}  // namespace pmaflow
