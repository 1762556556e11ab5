#include "pmaflow/maxprinciple/maxprinciple.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmaflow/error.hpp"

namespace pmaflow::maxp {

void SpaceTimeGrid::validate() const {
  if (dim < 1 || dim > 3) throw InvalidArgument("maxprinciple.dim: must be 1, 2 or 3");
  if (points < 5) throw InvalidArgument("maxprinciple.points: need at least 5 per axis");
  if (!(T > 0.0)) throw InvalidArgument("maxprinciple.T: must be positive");
  if (time_steps < 2) throw InvalidArgument("maxprinciple.time_steps: need at least 2");
  if (domain == Domain::ball && !(ball_radius > 0.0 && ball_radius <= 0.5)) {
    throw InvalidArgument("maxprinciple.ball_radius: must lie in (0, 0.5]");
  }
}

std::size_t SpaceTimeGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
  return s;
}

std::array<int, 3> SpaceTimeGrid::index(std::size_t flat) const {
  std::array<int, 3> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points);
    flat /= points;
  }
  return idx;
}

std::array<double, 3> SpaceTimeGrid::coordinates(std::size_t flat) const {
  const auto idx = index(flat);
  std::array<double, 3> x{};
  for (int a = 0; a < dim; ++a) x[a] = idx[a] * spacing();
  return x;
}

bool SpaceTimeGrid::in_domain(std::size_t flat) const {
  if (domain == Domain::box) return true;
  const auto x = coordinates(flat);
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - 0.5) * (x[a] - 0.5);
  return r2 <= ball_radius * ball_radius * (1.0 + 1e-12);
}

namespace {

std::size_t offset(const SpaceTimeGrid& g, std::size_t flat, int axis, int step) {
  std::size_t stride = 1;
  for (int a = g.dim - 1; a > axis; --a) stride *= static_cast<std::size_t>(g.points);
  return step >= 0 ? flat + stride * step : flat - stride * static_cast<std::size_t>(-step);
}

}  // namespace

bool SpaceTimeGrid::on_boundary(std::size_t flat) const {
  if (!in_domain(flat)) return false;
  const auto idx = index(flat);
  for (int a = 0; a < dim; ++a) {
    if (idx[a] == 0 || idx[a] == points - 1) return true;
    if (!in_domain(offset(*this, flat, a, 1)) || !in_domain(offset(*this, flat, a, -1))) return true;
  }
  return false;
}

double SpaceTimeGrid::weight(std::size_t flat) const {
  const auto idx = index(flat);
  double w = 1.0;
  for (int a = 0; a < dim; ++a) {
    w *= spacing();
    if (idx[a] == 0 || idx[a] == points - 1) w *= 0.5;
  }
  return w;
}

double SpaceTimeGrid::domain_volume() const {
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (in_domain(i)) v += weight(i);
  }
  return v;
}

double SpaceTimeGrid::diameter() const {
  return domain == Domain::box ? std::sqrt(static_cast<double>(dim)) : 2.0 * ball_radius;
}

SpaceTimeField SpaceTimeField::from_function(
    const SpaceTimeGrid& grid, const std::function<double(double, const std::array<double, 3>&)>& u) {
  grid.validate();
  SpaceTimeField f{grid, {}};
  for (int k = 0; k <= grid.time_steps; ++k) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(k * grid.dt(), grid.coordinates(i));
    f.values.push_back(std::move(v));
  }
  return f;
}

double time_derivative(const SpaceTimeField& u, int k, std::size_t node) {
  const auto& v = u.values;
  const int K = u.grid.time_steps;
  const double dt = u.grid.dt();
  if (k == 0) return (v[1][node] - v[0][node]) / dt;
  if (k == K) return (v[K][node] - v[K - 1][node]) / dt;
  return (v[k + 1][node] - v[k - 1][node]) / (2.0 * dt);
}

namespace {

/// First difference along `axis`: centered inside, one-sided on the faces.
/// `at(flat)` reads the sampled function.
template <class At>
double first_difference(const SpaceTimeGrid& g, std::size_t flat, int axis, const At& at) {
  const int i = g.index(flat)[axis];
  const double h = g.spacing();
  if (i == 0) return (at(offset(g, flat, axis, 1)) - at(flat)) / h;
  if (i == g.points - 1) return (at(flat) - at(offset(g, flat, axis, -1))) / h;
  return (at(offset(g, flat, axis, 1)) - at(offset(g, flat, axis, -1))) / (2.0 * h);
}

}  // namespace

Matrix spatial_hessian(const SpaceTimeField& u, int k, std::size_t node) {
  const auto& g = u.grid;
  const auto& v = u.values[k];
  const double h = g.spacing();
  const auto idx = g.index(node);
  Matrix D(g.dim, g.dim);
  for (int a = 0; a < g.dim; ++a) {
    // Pure second difference, shifted inward at the faces.
    std::size_t c = node;
    if (idx[a] == 0) c = offset(g, node, a, 1);
    if (idx[a] == g.points - 1) c = offset(g, node, a, -1);
    D(a, a) = (v[offset(g, c, a, 1)] - 2.0 * v[c] + v[offset(g, c, a, -1)]) / (h * h);
    for (int b = a + 1; b < g.dim; ++b) {
      auto d_b = [&](std::size_t p) { return first_difference(g, p, b, [&](std::size_t q) { return v[q]; }); };
      D(a, b) = D(b, a) = first_difference(g, node, a, d_b);
    }
  }
  return D;
}

namespace {

struct Sups {
  double all = -std::numeric_limits<double>::infinity();
  double boundary = -std::numeric_limits<double>::infinity();
};

Sups domain_sups(const SpaceTimeField& u) {
  const auto& g = u.grid;
  Sups s;
  for (int k = 0; k <= g.time_steps; ++k) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.in_domain(i)) continue;
      const double val = u.values[k][i];
      s.all = std::max(s.all, val);
      if (k == 0 || g.on_boundary(i)) s.boundary = std::max(s.boundary, val);
    }
  }
  return s;
}

std::vector<double> time_weights(const SpaceTimeGrid& g) {
  std::vector<double> w(g.time_steps + 1, g.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

double implied(double excess, double diam, double diam_power, double integral, double root) {
  const double denom = std::pow(diam, diam_power) * std::pow(integral, root);
  if (denom > 0.0) return excess / denom;
  if (excess > 0.0) return std::numeric_limits<double>::infinity();
  return excess < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

ContactSetReport contact_set(const SpaceTimeField& u, std::optional<double> tolerance) {
  const auto& g = u.grid;
  g.validate();
  const double tol = tolerance.value_or(10.0 * g.spacing());
  const auto tw = time_weights(g);
  ContactSetReport r;
  r.integrand_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= g.time_steps; ++k) {
    std::vector<char> mask(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.in_domain(i)) continue;
      const double ut = time_derivative(u, k, i);
      if (ut < 0.0) continue;
      const Eigen::VectorXd lambda = Eigen::SelfAdjointEigenSolver<Matrix>(spatial_hessian(u, k, i),
                                                                           Eigen::EigenvaluesOnly)
                                         .eigenvalues();
      if (lambda.maxCoeff() > tol) continue;
      mask[i] = 1;
      ++r.mask_count;
      double det = 1.0;
      for (int a = 0; a < g.dim; ++a) det *= std::max(0.0, -lambda[a]);
      const double integrand = ut * det;
      r.integrand_min = std::min(r.integrand_min, integrand);
      r.integral_value += tw[k] * g.weight(i) * integrand;
    }
    r.mask.push_back(std::move(mask));
  }
  if (r.mask_count == 0) r.integrand_min = 0.0;
  const auto s = domain_sups(u);
  r.sup_all = s.all;
  r.sup_parabolic_boundary = s.boundary;
  const double m = g.dim;
  r.implied_constant = implied(s.all - s.boundary, g.diameter(), m / (m + 1.0), r.integral_value, 1.0 / (m + 1.0));
  return r;
}

LiebermanReport lieberman_form_check(const SpaceTimeField& u, const MatrixField& a,
                                     const SpaceTimeField& f, const LiebermanOptions& options) {
  const auto& g = u.grid;
  g.validate();
  if (f.values.size() != u.values.size() || f.grid.size() != g.size()) {
    throw InvalidArgument("lieberman_form_check: u and f grids differ");
  }
  const double m = g.dim;
  const double f_power = options.f_power.value_or(m + 1.0);
  const double root = options.root.value_or(1.0 / (m + 1.0));
  const double diam_power = options.diam_power.value_or(m / (m + 1.0));

  const auto contact = contact_set(u, options.contact_tolerance);
  const auto tw = time_weights(g);
  LiebermanReport r;
  std::size_t checked = 0, failed = 0;
  for (int k = 0; k <= g.time_steps; ++k) {
    const double t = u.time(k);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.in_domain(i)) continue;
      const auto x = g.coordinates(i);
      const Matrix A = a(t, x);
      const Matrix D = spatial_hessian(u, k, i);
      const double lhs = -time_derivative(u, k, i) + (A.array() * D.array()).sum();
      const double fv = f.values[k][i];
      ++checked;
      if (lhs < fv - options.residual_tolerance * std::max(1.0, std::abs(fv))) ++failed;
      if (!contact.mask[k][i]) continue;
      const double det = A.determinant();
      Eigen::LLT<Matrix> llt(A);
      if (llt.info() != Eigen::Success || !(det > 0.0)) {
        throw HypothesisViolated("lieberman_form_check: a is not positive definite on the contact set");
      }
      r.integral_value += tw[k] * g.weight(i) * std::pow(std::max(0.0, -fv), f_power) / det;
    }
  }
  r.failure_fraction = checked ? static_cast<double>(failed) / checked : 0.0;
  if (r.failure_fraction > options.max_failure_fraction) {
    throw HypothesisViolated("lieberman_form_check: -d_t u + a D^2 u >= f fails on " +
                             std::to_string(failed) + " of " + std::to_string(checked) + " points");
  }
  r.sup_all = contact.sup_all;
  r.sup_parabolic_boundary = contact.sup_parabolic_boundary;
  r.diameter = g.diameter();
  r.implied_constant = implied(r.sup_all - r.sup_parabolic_boundary, r.diameter, diam_power, r.integral_value, root);
  return r;
}

SpaceTimeField paraboloid_cap(const SpaceTimeGrid& grid, double kappa, double R) {
  if (!(kappa > 0.0) || !(R > 0.0)) throw InvalidArgument("paraboloid_cap: kappa and R must be positive");
  const double a = kappa * R * R / grid.T;
  return SpaceTimeField::from_function(grid, [&](double t, const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < grid.dim; ++d) r2 += (x[d] - 0.5) * (x[d] - 0.5);
    return a * t - kappa * r2;
  });
}

}  // namespace pmaflow::maxp
