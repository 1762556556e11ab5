#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pmaflow/grid/torus_grid.hpp"

namespace pmaflow {

/// Real function sampled on a TorusGrid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Samples f(x1, y1, x2, y2) at every grid point.
  static ScalarField from_function(
      const TorusGrid& grid,
      const std::function<double(const std::array<double, 4>&)>& f);

  [[nodiscard]] const TorusGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] double max() const;
  [[nodiscard]] double min() const;
  [[nodiscard]] double sup_abs() const;
  [[nodiscard]] bool all_finite() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator+=(double c);
  ScalarField& operator*=(double c);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator+(ScalarField a, double c) { return a += c; }
  friend ScalarField operator-(ScalarField a, double c) { return a += -c; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

  /// Pointwise transform.
  [[nodiscard]] ScalarField map(const std::function<double(double)>& f) const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Periodic-trapezoid quadrature of a field against omega_0^n.
/// Throws InvalidArgument on non-finite values.
double integrate(const ScalarField& field);

/// Sup-norm distance between two fields on the same grid.
double sup_distance(const ScalarField& a, const ScalarField& b);

/// Time-indexed family of fields sharing one grid.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(const TorusGrid& grid, double dt);

  void push_back(double t, ScalarField field);

  [[nodiscard]] const TorusGrid& grid() const { return grid_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] bool empty() const { return times_.empty(); }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<ScalarField>& fields() const { return fields_; }
  [[nodiscard]] const ScalarField& operator[](std::size_t k) const { return fields_[k]; }
  [[nodiscard]] ScalarField& operator[](std::size_t k) { return fields_[k]; }
  [[nodiscard]] double final_time() const { return times_.back(); }

  /// Same times, fields transformed pointwise.
  [[nodiscard]] Trajectory map(const std::function<double(double)>& f) const;

  /// Trapezoid weights of the time samples on [t_0, t_K].
  [[nodiscard]] std::vector<double> time_weights() const;

 private:
  TorusGrid grid_;
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<ScalarField> fields_;
};

/// Space-time quadrature: trapezoid in time, periodic trapezoid in space.
double integrate_spacetime(const Trajectory& traj);

/// Space-time quadrature of a pointwise combination of two trajectories
/// sampled at the same times.
double integrate_spacetime(const Trajectory& a, const Trajectory& b,
                           const std::function<double(double, double)>& f);

}  // namespace pmaflow
