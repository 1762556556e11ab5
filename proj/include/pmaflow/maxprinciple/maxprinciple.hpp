#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace pmaflow::maxp {

enum class Domain { box, ball };

/// Uniform lattice on [0,1]^dim with `points` nodes per axis, boundary
/// included, and times k T / time_steps. With Domain::ball only nodes within
/// `ball_radius` of the box center belong to the domain.
struct SpaceTimeGrid {
  int dim = 2;
  int points = 33;
  double T = 1.0;
  int time_steps = 10;
  Domain domain = Domain::box;
  double ball_radius = 0.5;

  void validate() const;
  [[nodiscard]] double spacing() const { return 1.0 / (points - 1); }
  [[nodiscard]] double dt() const { return T / time_steps; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::array<int, 3> index(std::size_t flat) const;
  [[nodiscard]] std::array<double, 3> coordinates(std::size_t flat) const;
  [[nodiscard]] bool in_domain(std::size_t flat) const;
  /// Domain node with a lattice neighbor outside the domain (or on the box face).
  [[nodiscard]] bool on_boundary(std::size_t flat) const;
  /// Trapezoid weight of a node; summed over the domain this is vol_h.
  [[nodiscard]] double weight(std::size_t flat) const;
  [[nodiscard]] double domain_volume() const;
  [[nodiscard]] double diameter() const;
};

/// u sampled on every lattice node (not only the domain) at every time.
struct SpaceTimeField {
  SpaceTimeGrid grid;
  std::vector<std::vector<double>> values;  // [time][node]

  static SpaceTimeField from_function(
      const SpaceTimeGrid& grid,
      const std::function<double(double, const std::array<double, 3>&)>& u);
  [[nodiscard]] double time(int k) const { return k * grid.dt(); }
};

using Matrix = Eigen::MatrixXd;

/// Finite-difference derivatives at a node: centered where the lattice
/// allows, one-sided (exact for quadratics) at the box faces.
double time_derivative(const SpaceTimeField& u, int k, std::size_t node);
Matrix spatial_hessian(const SpaceTimeField& u, int k, std::size_t node);

struct ContactSetReport {
  std::vector<std::vector<char>> mask;  // [time][node], domain nodes only
  double integral_value = 0.0;          // int_E d_t u det(-D^2 u)
  double sup_all = 0.0;                 // sup over [0,T] x domain
  double sup_parabolic_boundary = 0.0;  // sup over {0} x domain and [0,T] x boundary
  double integrand_min = 0.0;           // min of the integrand over the mask
  double implied_constant = 0.0;        // (sup_all - sup_boundary) / (diam^{m/(m+1)} integral^{1/(m+1)})
  std::size_t mask_count = 0;
};

/// E = {d_t u >= 0 and every eigenvalue of D^2 u <= tolerance}; the default
/// tolerance is 10 h. The integrand uses prod max(0, -lambda_i).
ContactSetReport contact_set(const SpaceTimeField& u, std::optional<double> tolerance = std::nullopt);

struct LiebermanOptions {
  std::optional<double> f_power;     // exponent on f^-, default m + 1
  std::optional<double> root;        // outer root, default 1 / (m + 1)
  std::optional<double> diam_power;  // default m / (m + 1)
  double residual_tolerance = 1e-8;
  double max_failure_fraction = 1e-3;
  std::optional<double> contact_tolerance;
};

struct LiebermanReport {
  double sup_all = 0.0;
  double sup_parabolic_boundary = 0.0;
  double integral_value = 0.0;  // int_E (f^-)^{f_power} / det a
  double diameter = 0.0;
  double implied_constant = 0.0;
  double failure_fraction = 0.0;  // share of points where -d_t u + a D^2 u < f
};

using MatrixField = std::function<Matrix(double, const std::array<double, 3>&)>;

/// Throws HypothesisViolated when the differential inequality fails on more
/// than `max_failure_fraction` of the points or a is not positive definite on E.
LiebermanReport lieberman_form_check(const SpaceTimeField& u, const MatrixField& a,
                                     const SpaceTimeField& f, const LiebermanOptions& options = {});

/// u = a t - kappa |x - c|^2 with a = kappa R^2 / T and c the box center.
SpaceTimeField paraboloid_cap(const SpaceTimeGrid& grid, double kappa, double R);

}  // namespace pmaflow::maxp
