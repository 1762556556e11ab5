#include "pmaflow/flow/flow_hessian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "implicit_engine.hpp"
#include "pmaflow/error.hpp"
#include "pmaflow/grid/hessian.hpp"

namespace pmaflow {

HessianSymbol HessianSymbol::ma_power(int n) {
  HessianSymbol s{Kind::ma_power, n, 0, 0};
  s.validate();
  return s;
}

HessianSymbol HessianSymbol::lambda0_sigma_k_power(int n, int k) {
  HessianSymbol s{Kind::lambda0_sigma_k_power, n, k, 0};
  s.validate();
  return s;
}

HessianSymbol HessianSymbol::sigma_quotient_power(int n, int k, int l) {
  HessianSymbol s{Kind::sigma_quotient_power, n, k, l};
  s.validate();
  return s;
}

HessianSymbol HessianSymbol::full_sigma_k(int n, int k) {
  HessianSymbol s{Kind::full_sigma_k, n, k, 0};
  s.validate();
  return s;
}

HessianSymbol HessianSymbol::from_name(const std::string& name, int n, int k, int l) {
  if (name == "ma") return ma_power(n);
  if (name == "l0_sigma_k") return lambda0_sigma_k_power(n, k);
  if (name == "sigma_quotient") return sigma_quotient_power(n, k, l);
  if (name == "full_sigma_k") return full_sigma_k(n, k);
  throw InvalidArgument("unknown Hessian symbol '" + name + "'");
}

std::string HessianSymbol::name() const {
  switch (kind) {
    case Kind::ma_power: return "ma";
    case Kind::lambda0_sigma_k_power: return "l0_sigma_k";
    case Kind::sigma_quotient_power: return "sigma_quotient";
    case Kind::full_sigma_k: return "full_sigma_k";
  }
  return "unknown";
}

double HessianSymbol::degree() const {
  switch (kind) {
    case Kind::ma_power:
    case Kind::full_sigma_k: return 1.0;
    case Kind::lambda0_sigma_k_power:
    case Kind::sigma_quotient_power: return 2.0 * n / (n + 1.0);
  }
  return 1.0;
}

void HessianSymbol::validate() const {
  if (n < 1) throw InvalidArgument("HessianSymbol: n must be >= 1");
  switch (kind) {
    case Kind::ma_power: return;
    case Kind::lambda0_sigma_k_power:
      if (k < 1 || k > n) throw InvalidArgument("HessianSymbol: need 1 <= k <= n");
      return;
    case Kind::sigma_quotient_power:
      if (l < 1 || l >= k || k > n) throw InvalidArgument("HessianSymbol: need 1 <= l < k <= n");
      return;
    case Kind::full_sigma_k:
      if (k < 1 || k > n + 1) throw InvalidArgument("HessianSymbol: need 1 <= k <= n + 1");
      return;
  }
}

double elementary_symmetric(std::span<const double> x, int k) {
  if (k < 0) return 0.0;
  if (k == 0) return 1.0;
  if (static_cast<std::size_t>(k) > x.size()) return 0.0;
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (double v : x) {
    for (int j = k; j >= 1; --j) e[j] += v * e[j - 1];
  }
  return e[k];
}

namespace {

std::vector<double> without(std::span<const double> x, std::size_t i) {
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != i) out.push_back(x[j]);
  }
  return out;
}

bool gamma_k(std::span<const double> x, int k) {
  for (int j = 1; j <= k; ++j) {
    if (!(elementary_symmetric(x, j) > 0.0)) return false;
  }
  return true;
}

std::vector<double> all_entries(const ConePoint& p) {
  std::vector<double> v{p.lambda0};
  v.insert(v.end(), p.lambdas.begin(), p.lambdas.end());
  return v;
}

}  // namespace

bool in_positive_cone(const ConePoint& p) {
  if (!(p.lambda0 > 0.0)) return false;
  return std::all_of(p.lambdas.begin(), p.lambdas.end(), [](double v) { return v > 0.0; });
}

bool in_symbol_cone(const HessianSymbol& s, const ConePoint& p) {
  switch (s.kind) {
    case HessianSymbol::Kind::ma_power: return in_positive_cone(p);
    case HessianSymbol::Kind::lambda0_sigma_k_power:
    case HessianSymbol::Kind::sigma_quotient_power:
      return p.lambda0 > 0.0 && gamma_k(p.lambdas, s.k);
    case HessianSymbol::Kind::full_sigma_k: return gamma_k(all_entries(p), s.k);
  }
  return false;
}

SymbolValue f_eval_grad(const HessianSymbol& s, const ConePoint& p) {
  if (static_cast<int>(p.lambdas.size()) != s.n) {
    throw InvalidArgument("f_eval_grad: point has the wrong number of eigenvalues");
  }
  if (!in_symbol_cone(s, p)) throw ConeViolation("f_eval_grad: point outside the symbol's cone");
  const int n = s.n;
  SymbolValue out;
  out.gradient.assign(static_cast<std::size_t>(n) + 1, 0.0);
  auto& g = out.gradient;
  const double m = n / (n + 1.0);

  switch (s.kind) {
    case HessianSymbol::Kind::ma_power: {
      const auto all = all_entries(p);
      double prod = 1.0;
      for (double v : all) prod *= v;
      out.value = std::pow(prod, 1.0 / (n + 1));
      for (int i = 0; i <= n; ++i) g[i] = out.value / ((n + 1) * all[i]);
      break;
    }
    case HessianSymbol::Kind::lambda0_sigma_k_power: {
      const double sk = elementary_symmetric(p.lambdas, s.k);
      out.value = std::pow(p.lambda0 * std::pow(sk, 1.0 / s.k), m);
      g[0] = m * out.value / p.lambda0;
      for (int i = 0; i < n; ++i) {
        const double dk = elementary_symmetric(without(p.lambdas, i), s.k - 1);
        g[i + 1] = m * out.value * dk / (s.k * sk);
      }
      break;
    }
    case HessianSymbol::Kind::sigma_quotient_power: {
      const double sk = elementary_symmetric(p.lambdas, s.k);
      const double sl = elementary_symmetric(p.lambdas, s.l);
      const double q = std::pow(sk / sl, 1.0 / (s.k - s.l));
      out.value = std::pow(p.lambda0 * q, m);
      g[0] = m * out.value / p.lambda0;
      for (int i = 0; i < n; ++i) {
        const auto rest = without(p.lambdas, i);
        const double dk = elementary_symmetric(rest, s.k - 1);
        const double dl = elementary_symmetric(rest, s.l - 1);
        g[i + 1] = m * out.value / (s.k - s.l) * (dk / sk - dl / sl);
      }
      break;
    }
    case HessianSymbol::Kind::full_sigma_k: {
      const auto all = all_entries(p);
      const double sk = elementary_symmetric(all, s.k);
      out.value = std::pow(sk, 1.0 / s.k);
      for (int i = 0; i <= n; ++i) {
        g[i] = out.value * elementary_symmetric(without(all, i), s.k - 1) / (s.k * sk);
      }
      break;
    }
  }
  return out;
}

StructuralReport structural_check(const HessianSymbol& symbol, std::span<const ConePoint> samples) {
  StructuralReport rep;
  rep.c0_min = std::numeric_limits<double>::infinity();
  rep.C0_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : samples) {
    if (!in_positive_cone(p)) throw InvalidArgument("structural_check: sample outside Gamma_+");
    const auto fg = f_eval_grad(symbol, p);
    double prod = 1.0;
    double euler = p.lambda0 * fg.gradient[0];
    for (std::size_t i = 0; i < fg.gradient.size(); ++i) {
      if (!(fg.gradient[i] > 0.0)) rep.monotone = false;
      if (i > 0) {
        prod *= fg.gradient[i];
        euler += p.lambdas[i - 1] * fg.gradient[i];
      }
    }
    rep.c0_min = std::min(rep.c0_min, fg.gradient[0] * prod);
    rep.C0_max = std::max(rep.C0_max, euler / fg.value);

    std::vector<std::size_t> perm(p.lambdas.size());
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      ConePoint q{p.lambda0, {}};
      for (std::size_t i : perm) q.lambdas.push_back(p.lambdas[i]);
      const double v = f_eval_grad(symbol, q).value;
      if (std::abs(v - fg.value) > 1e-12 * std::abs(fg.value)) rep.symmetric = false;
    }
  }
  return rep;
}

namespace {

std::string describe_point(const TorusGrid& g, std::size_t i, const ConePoint& p) {
  std::ostringstream os;
  const auto x = g.coordinates(i);
  os << "point " << i << " (x =";
  for (int a = 0; a < g.real_dim(); ++a) os << ' ' << x[a];
  os << ") lambda0 = " << p.lambda0 << ", lambda =";
  for (double v : p.lambdas) os << ' ' << v;
  return os.str();
}

ConePoint cone_point(double rate, const Herm& A) {
  const auto ev = A.eigenvalues();
  ConePoint p{rate, {ev[0]}};
  if (A.n == 2) p.lambdas.push_back(ev[1]);
  return p;
}

class SymbolOperator final : public detail::PointwiseOperator {
 public:
  explicit SymbolOperator(const HessianSymbol& s) : s_(s) {}

  double value(double rate, const Herm& A) const override {
    return f_eval_grad(s_, cone_point(rate, A)).value;
  }

  detail::PointLinearization linearize(double rate, const Herm& A) const override {
    const auto p = cone_point(rate, A);
    const auto fg = f_eval_grad(s_, p);
    detail::PointLinearization lin;
    lin.value = fg.value;
    lin.d_rate = fg.gradient[0];
    if (A.n == 1) {
      lin.d_matrix = {1, fg.gradient[1], 0.0, {0.0, 0.0}};
      return lin;
    }
    // U diag(g1, g2) U* in closed form; the divided difference is smooth
    // across the multiplicity, where it is dropped.
    const double l1 = p.lambdas[0], l2 = p.lambdas[1];
    const double g1 = fg.gradient[1], g2 = fg.gradient[2];
    const double mean_g = 0.5 * (g1 + g2);
    const double mean_l = 0.5 * (l1 + l2);
    const double gap = l2 - l1;
    const double slope = gap > 1e-10 * std::max(1.0, std::abs(l2)) ? (g2 - g1) / gap : 0.0;
    lin.d_matrix = {2, mean_g + slope * (A.a - mean_l), mean_g + slope * (A.b - mean_l),
                    slope * A.c};
    return lin;
  }

  double rate_for(const Herm& A, double target) const override {
    const auto p = cone_point(1.0, A);
    const int n = s_.n;
    if (!gamma_k(p.lambdas, n)) return 1.0;
    switch (s_.kind) {
      case HessianSymbol::Kind::ma_power: {
        double prod = 1.0;
        for (double v : p.lambdas) prod *= v;
        return std::pow(target, n + 1) / prod;
      }
      case HessianSymbol::Kind::lambda0_sigma_k_power:
        return std::pow(target, (n + 1.0) / n) /
               std::pow(elementary_symmetric(p.lambdas, s_.k), 1.0 / s_.k);
      case HessianSymbol::Kind::sigma_quotient_power: {
        const double q = std::pow(elementary_symmetric(p.lambdas, s_.k) /
                                      elementary_symmetric(p.lambdas, s_.l),
                                  1.0 / (s_.k - s_.l));
        return std::pow(target, (n + 1.0) / n) / q;
      }
      case HessianSymbol::Kind::full_sigma_k: {
        // sigma_k(r, lambda) = r sigma_{k-1}(lambda) + sigma_k(lambda)
        const double below = elementary_symmetric(p.lambdas, s_.k - 1);
        return (std::pow(target, s_.k) - elementary_symmetric(p.lambdas, s_.k)) / below;
      }
    }
    return 1.0;
  }

 private:
  HessianSymbol s_;
};

void check_symbol_grid(const HessianSymbol& s, const TorusGrid& g) {
  s.validate();
  if (s.n != g.n_complex) throw InvalidArgument("Hessian symbol dimension does not match the grid");
}

}  // namespace

ScalarField hessian_residual(const ScalarField& phi_prev, const ScalarField& phi_next, double dt,
                             const ScalarField& f_next, const HessianSymbol& symbol) {
  const auto& g = phi_next.grid();
  check_symbol_grid(symbol, g);
  if (!(phi_prev.grid() == g) || !(f_next.grid() == g)) {
    throw InvalidArgument("hessian_residual: fields live on different grids");
  }
  if (!(dt > 0.0)) throw InvalidArgument("hessian_residual: dt must be positive");
  const auto h = complex_hessian(phi_next);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto p = cone_point((phi_prev[i] - phi_next[i]) / dt, h.at(i).plus_identity());
    if (!in_symbol_cone(symbol, p)) {
      throw ConeViolation("hessian_residual: " + describe_point(g, i, p) + " is outside the cone");
    }
    out[i] = f_eval_grad(symbol, p).value - std::exp(f_next[i]);
  }
  return out;
}

ScalarField hessian_step(const ScalarField& phi_prev, double dt, const ScalarField& f_next,
                         const HessianSymbol& symbol, const FlowParams& params,
                         const ScalarField* phi_before) {
  check_symbol_grid(symbol, phi_prev.grid());
  params.validate();
  const SymbolOperator op(symbol);
  return detail::step(op, phi_prev, dt, f_next, params, phi_before, dt);
}

Trajectory solve_hessian_flow(const ScalarField& phi0, const RhsSpec& rhs,
                              const HessianSymbol& symbol, const FlowParams& params) {
  check_symbol_grid(symbol, phi0.grid());
  const SymbolOperator op(symbol);
  if (!detail::admissible_data(op, phi0, params.admissibility_floor)) {
    throw ConeViolation("solve_hessian_flow: initial data is not in Gamma_+");
  }
  const auto times = detail::step_times(params);
  return detail::march(
      op, phi0, times, params.dt,
      [&](std::size_t k) { return rhs.log_density(phi0.grid(), times[k]); }, params);
}

}  // namespace pmaflow
