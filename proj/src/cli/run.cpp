#include "pmaflow/cli/run.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pmaflow/flow/flow_hessian.hpp"
#include "pmaflow/flow/flow_ma.hpp"
#include "pmaflow/grid/field_io.hpp"
#include "pmaflow/regularize/regularize.hpp"

namespace pmaflow::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ordered_json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text; }

ordered_json checks_json(const std::vector<Check>& checks) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return arr;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

struct Plot {
  std::string name;
  std::string data;
  std::string xlabel, ylabel;
  std::string using_clause;
  bool loglog = false;
};

void write_plot(const fs::path& out, const Plot& p) {
  std::ostringstream gp;
  gp << "set terminal svg size 800,600\n"
     << "set output '" << p.name << ".svg'\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << p.xlabel << "'\n"
     << "set ylabel '" << p.ylabel << "'\n";
  if (p.loglog) gp << "set logscale xy\n";
  gp << "plot '" << p.data << "' " << p.using_clause << "\n";
  write_text(out / (p.name + ".gp"), gp.str());
}

void write_plots(const fs::path& out) {
  const Plot plots[] = {
      {"I_series", "I_series.csv", "t", "I(phi)", "using 1:2 with linespoints", false},
      {"level_stats", "level_stats.csv", "s", "value", "using 1:2 with lines, '' using 1:3 with lines", false},
      {"holder_time", "holder_time.csv", "separation", "sup quotient", "using 1:2 with linespoints", true},
      {"holder_space", "holder_space.csv", "separation", "sup quotient", "using 1:2 with linespoints", true},
      {"regularize", "regularize.csv", "eps", "L1 gap", "using 1:2 with linespoints, '' using 1:3 with linespoints", true},
      {"convergence", "convergence.csv", "dt", "sup error", "using 1:2 with linespoints", true},
      {"sweep", "sweep.csv", "value", "sup error", "using 1:5 with linespoints", true},
  };
  for (const auto& p : plots) {
    if (fs::exists(out / p.data)) write_plot(out, p);
  }
}

void flow_checks(const Trajectory& phi, double newton_tol, std::vector<Check>& checks) {
  const double slack = 10.0 * newton_tol;
  double worst_step = -std::numeric_limits<double>::infinity();
  double worst_sup = -std::numeric_limits<double>::infinity();
  const double sup0 = phi[0].max();
  for (std::size_t k = 0; k < phi.size(); ++k) {
    worst_sup = std::max(worst_sup, phi[k].max() - sup0);
    if (k > 0) worst_step = std::max(worst_step, (phi[k] - phi[k - 1]).max());
  }
  checks.push_back({"monotone_in_time", !(worst_step > slack), "max increase " + fmt(worst_step)});
  checks.push_back({"sup_bound", !(worst_sup > slack), "max sup excess " + fmt(worst_sup)});
}

double l1_gap(const Trajectory& a, const Trajectory& b) {
  return integrate_spacetime(a, b, [](double x, double y) { return std::abs(x - y); });
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return kNaN;
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Trajectory solve(const RunConfig& config) {
  config.validate();
  const auto phi0 = config.initial_field();
  const auto rhs = config.rhs_spec();
  const auto params = config.flow_params();
  try {
    if (config.flow.equation == "hessian") return solve_hessian_flow(phi0, rhs, config.symbol(), params);
    return solve_flow(phi0, rhs, params);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + config.flow.equation + ", rhs " + config.rhs.kind + ", N = " +
                std::to_string(config.grid.N) + ", dt = " + fmt(config.flow.dt) + "]");
  }
}

double exact_error(const RunConfig& config, const Trajectory& phi) {
  if (config.flow.equation != "monge_ampere") return kNaN;
  if (config.initial.kind == "random") return kNaN;
  const double c = config.initial.kind == "constant" ? config.initial.value : 0.0;
  const auto& g = phi.grid();
  const auto rhs = config.rhs_spec();
  double err = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double t = phi.times()[k];
    if (config.rhs.kind == "zero") {
      err = std::max(err, sup_distance(phi[k], ScalarField(g, c - t)));
    } else if (config.rhs.kind == "time_only") {
      const double integral = t > 0.0 ? boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                            [&](double s) { return std::exp(rhs.profile(s)); }, 0.0, t, 10, 1e-14)
                                      : 0.0;
      err = std::max(err, sup_distance(phi[k], ScalarField(g, c - integral)));
    } else if (config.rhs.kind == "manufactured" && c == 0.0) {
      err = std::max(err, sup_distance(phi[k], manufactured_solution(g, t, config.rhs.curvature)));
    } else {
      return kNaN;
    }
  }
  return err;
}

SolveResult run_solve(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  SolveResult r{solve(config), {}, 0.0};
  r.exact_error = exact_error(config, r.phi);
  flow_checks(r.phi, config.flow.newton_tol, r.checks);
  io::save_trajectory((out / "trajectory.bin").string(), r.phi);
  {
    auto os = open_out(out / "sup_series.csv");
    os << "t,max,min,mean\n";
    for (std::size_t k = 0; k < r.phi.size(); ++k) {
      const auto& f = r.phi[k];
      os << r.phi.times()[k] << ',' << f.max() << ',' << f.min() << ',' << integrate(f) / f.grid().volume() << '\n';
    }
  }
  ordered_json j;
  j["steps"] = r.phi.size() - 1;
  j["final_time"] = r.phi.final_time();
  j["final_max"] = r.phi[r.phi.size() - 1].max();
  j["final_min"] = r.phi[r.phi.size() - 1].min();
  j["exact_error"] = number(r.exact_error);
  j["checks"] = checks_json(r.checks);
  write_text(out / "solve.json", j.dump(2) + "\n");
  return r;
}

RunResult run_estimate(const RunConfig& config, const Trajectory& phi, const fs::path& out) {
  fs::create_directories(out);
  const auto& g = phi.grid();
  const auto rhs = config.rhs_spec();
  const auto& e = config.estimates;
  const auto F = sample_log_density(rhs, g, phi.times(), phi.dt());
  const auto eF = F.map([](double v) { return std::exp(v); });

  RunResult r;
  r.exact_error = exact_error(config, phi);
  flow_checks(phi, config.flow.newton_tol, r.checks);

  auto& rep = r.report;
  rep.entropy_p = entropy(eF, F, e.p, e.weight_power,
                          e.integrand == "abs_power_plus_one" ? EntropyIntegrand::abs_power_plus_one
                                                              : EntropyIntegrand::soft_power);
  const auto is = i_series(phi, eF);
  rep.I_series = is.values;
  rep.I_derivative_residual = is.derivative_residual;
  bool i_monotone = true;
  for (std::size_t k = 1; k < is.values.size(); ++k) {
    if (is.values[k] > is.values[k - 1] + 1e-12 * std::max(1.0, std::abs(is.values[k - 1]))) i_monotone = false;
  }
  r.checks.push_back({"I_nonincreasing", i_monotone, "dI/dt residual " + fmt(is.derivative_residual)});

  const auto v = time_average(phi, e.stability_eps);
  double smax = 0.0;
  for (const auto& f : phi.fields()) smax = std::max(smax, -f.min());
  if (!(smax > 0.0)) smax = 1.0;
  std::vector<double> s_grid(e.s_levels);
  for (int i = 0; i < e.s_levels; ++i) s_grid[i] = smax * i / (e.s_levels - 1);
  const auto stats = level_stats(phi, eF, s_grid, &v, e.delta);
  const double cheb = chebyshev_excess(stats);
  r.checks.push_back({"chebyshev", cheb <= 1e-12, "max excess " + fmt(cheb)});

  const double A_s = level_stats(phi, eF, {e.mt_s}).A_s[0];
  const auto mt = moser_trudinger(phi, A_s, e.mt_s, e.beta,
                                  e.exponent_base == "n_plus_1" ? ExponentBase::n_plus_1 : ExponentBase::n_plus_2);
  rep.mt_integrals = mt.values;
  const auto ea = exp_alpha_integral(phi, e.alpha0);
  rep.exp_alpha0 = ea.values;

  if (phi.size() >= 8) {
    rep.holder = holder_moduli(phi);
  } else {
    rep.holder.time.alpha = rep.holder.space.alpha = kNaN;
    rep.holder.time.C = rep.holder.space.C = kNaN;
  }
  const auto stab = stability_ratio(v, phi, config.stability_alpha(), config.rhs.p0);
  rep.stability_ratio = stab.ratio;

  auto finite_or_sentinel = [](const HolderFit& h) {
    return std::isfinite(h.C) && (std::isfinite(h.alpha) || (std::isinf(h.alpha) && h.C == 0.0));
  };
  bool finite = std::isfinite(rep.entropy_p) && std::isfinite(rep.I_derivative_residual) &&
                std::isfinite(rep.stability_ratio) && finite_or_sentinel(rep.holder.time) &&
                finite_or_sentinel(rep.holder.space);
  for (const auto* series : {&rep.I_series, &rep.mt_integrals, &rep.exp_alpha0}) {
    for (double x : *series) finite = finite && std::isfinite(x);
  }
  r.checks.push_back({"report_finite", finite, ""});

  if (phi.size() >= 3) {
    double c0 = 0.0;
    const auto dh = decreasing_holder_check(phi, 1.0, &c0);
    r.checks.push_back({"decreasing_holder", dh.hypothesis_holds && dh.conclusion_holds,
                        "C0 " + fmt(c0) + ", worst ratio " + fmt(dh.worst_ratio)});
  }

  r.time_average_l1 = l1_gap(time_average(phi, config.regularize.epsilon), phi);

  write_text(out / "report.json", to_json(rep) + "\n");
  {
    auto os = open_out(out / "level_stats.csv");
    write_level_stats_csv(os, stats);
  }
  {
    auto os = open_out(out / "I_series.csv");
    os << "t,I,mt,exp_alpha0\n";
    for (std::size_t k = 0; k < phi.size(); ++k) {
      os << phi.times()[k] << ',' << rep.I_series[k] << ',' << rep.mt_integrals[k] << ',' << rep.exp_alpha0[k] << '\n';
    }
  }
  for (const auto& [name, fit] : {std::pair{"holder_time", &rep.holder.time}, std::pair{"holder_space", &rep.holder.space}}) {
    auto os = open_out(out / (std::string(name) + ".csv"));
    os << "separation,quotient\n";
    for (std::size_t i = 0; i < fit->separations.size(); ++i) os << fit->separations[i] << ',' << fit->quotients[i] << '\n';
  }

  if (e.convergence_levels > 0 && std::isfinite(r.exact_error)) {
    auto os = open_out(out / "convergence.csv");
    os << "dt,error,order\n";
    double prev = kNaN, prev_dt = kNaN;
    for (int level = 0; level <= e.convergence_levels; ++level) {
      auto c = config;
      c.flow.dt = config.flow.dt / std::ldexp(1.0, level);
      const double err = level == 0 ? r.exact_error : exact_error(c, solve(c));
      const double order = level == 0 ? kNaN : std::log(prev / err) / std::log(prev_dt / c.flow.dt);
      os << c.flow.dt << ',' << err << ',';
      if (std::isnan(order)) {
        os << "nan";
      } else {
        os << order;
      }
      os << '\n';
      prev = err;
      prev_dt = c.flow.dt;
    }
  }

  ordered_json cj;
  cj["checks"] = checks_json(r.checks);
  cj["exact_error"] = number(r.exact_error);
  cj["time_average_l1"] = number(r.time_average_l1);
  write_text(out / "checks.json", cj.dump(2) + "\n");
  write_text(out / "config.json", to_json(config) + "\n");
  write_plots(out);
  return r;
}

RunResult run(const RunConfig& config, const fs::path& out) {
  auto solved = run_solve(config, out);
  return run_estimate(config, solved.phi, out);
}

std::vector<Check> run_regularize(const RunConfig& config, const Trajectory& phi, const fs::path& out) {
  fs::create_directories(out);
  const auto& last = phi[phi.size() - 1];
  auto params = config.regularization();
  const double K = params.K_value(phi.grid());
  std::vector<double> eps = config.regularize.eps_ladder;
  std::vector<double> moll, avg, lower, upper;
  for (double e : eps) {
    const auto rho = mollify(last, e);
    moll.push_back(integrate((rho - last).map([](double x) { return std::abs(x); })));
    avg.push_back(l1_gap(time_average(phi, e), phi));
    params.epsilon = e;
    const auto kl = kiselman_legendre(last, params);
    lower.push_back((kl - (last - K * e * e)).min());
    upper.push_back((rho - kl).min());
  }
  std::vector<Check> checks;
  const double worst_lower = *std::min_element(lower.begin(), lower.end());
  const double worst_upper = *std::min_element(upper.begin(), upper.end());
  checks.push_back({"kiselman_sandwich", worst_lower >= -1e-10 && worst_upper >= -1e-10,
                    "lower slack " + fmt(worst_lower) + ", upper slack " + fmt(worst_upper)});
  double worst_ratio = std::numeric_limits<double>::infinity();
  bool halvings = false;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (std::abs(eps[i - 1] / eps[i] - 2.0) > 1e-12 || !(moll[i] > 1e-14)) continue;
    halvings = true;
    worst_ratio = std::min(worst_ratio, moll[i - 1] / moll[i]);
  }
  checks.push_back({"mollifier_order_two", !halvings || worst_ratio >= 3.5,
                    halvings ? "worst ratio per halving " + fmt(worst_ratio) : "no resolved halvings"});
  const double avg_slope = slope(eps, avg);
  checks.push_back({"time_average_rate", std::isnan(avg_slope) || avg_slope >= 0.95, "slope " + fmt(avg_slope)});

  {
    auto os = open_out(out / "regularize.csv");
    os << "eps,mollify_l1,time_average_l1,kiselman_lower_slack,kiselman_upper_slack\n";
    for (std::size_t i = 0; i < eps.size(); ++i) {
      os << eps[i] << ',' << moll[i] << ',' << avg[i] << ',' << lower[i] << ',' << upper[i] << '\n';
    }
  }
  ordered_json j;
  j["K"] = K;
  j["mollify_slope"] = number(slope(eps, moll));
  j["time_average_slope"] = number(avg_slope);
  j["checks"] = checks_json(checks);
  write_text(out / "regularize.json", j.dump(2) + "\n");
  write_plots(out);
  return checks;
}

std::vector<Check> run_maxprinciple(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const auto g = config.maxprinciple_grid();
  const int m = g.dim;
  const double vol = g.domain_volume();
  const auto identity = [m](double, const std::array<double, 3>&) { return maxp::Matrix::Identity(m, m).eval(); };
  double worst_integral = 0.0, kt_min = std::numeric_limits<double>::infinity(), kt_max = 0.0;
  double lb_min = std::numeric_limits<double>::infinity(), lb_max = 0.0;
  auto os = open_out(out / "caps.csv");
  os << "kappa,R,integral,exact_integral,implied_constant,lieberman_implied_constant\n";
  for (double kappa : config.maxprinciple.kappas) {
    for (double R : config.maxprinciple.radii) {
      const auto u = maxp::paraboloid_cap(g, kappa, R);
      const auto cs = maxp::contact_set(u);
      const double a = kappa * R * R / g.T;
      const double exact = a * std::pow(2.0 * kappa, m) * g.T * vol;
      worst_integral = std::max(worst_integral, std::abs(cs.integral_value - exact) / std::max(1.0, exact));
      const auto f = maxp::SpaceTimeField::from_function(g, [&](double, const auto&) { return -a - 2.0 * m * kappa; });
      const auto lb = maxp::lieberman_form_check(u, identity, f);
      kt_min = std::min(kt_min, cs.implied_constant);
      kt_max = std::max(kt_max, cs.implied_constant);
      lb_min = std::min(lb_min, lb.implied_constant);
      lb_max = std::max(lb_max, lb.implied_constant);
      os << kappa << ',' << R << ',' << cs.integral_value << ',' << exact << ',' << cs.implied_constant << ','
         << lb.implied_constant << '\n';
    }
  }
  std::vector<Check> checks;
  checks.push_back({"cap_integrand_exact", worst_integral <= 1e-8, "worst relative error " + fmt(worst_integral)});
  const double spread = kt_max / kt_min;
  checks.push_back({"implied_constant_spread", kt_min > 0.0 && spread <= 3.0, "spread " + fmt(spread)});
  ordered_json j;
  j["dim"] = m;
  j["domain_volume"] = vol;
  j["implied_constant_min"] = number(kt_min);
  j["implied_constant_max"] = number(kt_max);
  j["lieberman_implied_min"] = number(lb_min);
  j["lieberman_implied_max"] = number(lb_max);
  j["checks"] = checks_json(checks);
  write_text(out / "maxprinciple.json", j.dump(2) + "\n");
  return checks;
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                            const fs::path& out) {
  base.validate();
  (void)get_value(base, axis);
  fs::create_directories(out);
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      auto& row = rows[i];
      row.value = values[i];
      try {
        const auto cfg = with_value(base, axis, values[i]);
        const auto r = run(cfg, out / ("run_" + std::to_string(i)));
        row.ok = true;
        row.checks_passed = all_passed(r.checks);
        row.exact_error = r.exact_error;
        row.I_residual = r.report.I_derivative_residual;
        row.entropy = r.report.entropy_p;
        row.holder_time = r.report.holder.time.alpha;
        row.holder_space = r.report.holder.space.alpha;
        row.stability_ratio = r.report.stability_ratio;
        row.time_average_l1 = r.time_average_l1;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(base.output.workers, static_cast<int>(values.size())));
  std::vector<std::future<void>> pool;
  for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].observed_order = kNaN;
    rows[i].time_average_slope = kNaN;
    if (i == 0 || !rows[i].ok || !rows[i - 1].ok) continue;
    const double dv = std::log(rows[i - 1].value / rows[i].value);
    if (!std::isfinite(dv) || dv == 0.0) continue;
    rows[i].observed_order = std::log(rows[i - 1].exact_error / rows[i].exact_error) / dv;
    rows[i].time_average_slope = std::log(rows[i - 1].time_average_l1 / rows[i].time_average_l1) / dv;
  }

  auto os = open_out(out / "sweep.csv");
  os << axis << ",ok,checks_passed,error,exact_error,observed_order,I_residual,entropy,holder_time,holder_space,"
               "stability_ratio,time_average_l1,time_average_slope\n";
  auto put = [&](double x) {
    if (std::isnan(x)) {
      os << "nan";
    } else if (std::isinf(x)) {
      os << (x > 0 ? "inf" : "-inf");
    } else {
      os << x;
    }
  };
  for (const auto& row : rows) {
    std::string msg = row.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    os << row.value << ',' << row.ok << ',' << row.checks_passed << ',' << msg << ',';
    for (double x : {row.exact_error, row.observed_order, row.I_residual, row.entropy, row.holder_time,
                     row.holder_space, row.stability_ratio, row.time_average_l1}) {
      put(x);
      os << ',';
    }
    put(row.time_average_slope);
    os << '\n';
  }
  os.close();
  write_plots(out);
  return rows;
}

std::vector<Check> report(const fs::path& out) {
  if (!fs::is_directory(out)) throw Error("report: no output directory " + out.string());
  write_plots(out);
  std::vector<Check> checks;
  for (const char* file : {"checks.json", "regularize.json", "maxprinciple.json", "solve.json"}) {
    const auto path = out / file;
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    for (const auto& c : j.at("checks")) {
      checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("detail").get<std::string>()});
    }
  }
  return checks;
}

}  // namespace pmaflow::cli
