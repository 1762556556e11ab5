#include "pmaflow/grid/scalar_field.hpp"

#include <algorithm>
#include <cmath>

#include "pmaflow/error.hpp"

namespace pmaflow {

namespace {

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

}  // namespace

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("ScalarField: value count does not match grid");
  }
}

ScalarField ScalarField::from_function(
    const TorusGrid& grid,
    const std::function<double(const std::array<double, 4>&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid.coordinates(i));
  return out;
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
  ScalarField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = f(values_[i]);
  return out;
}

double integrate(const ScalarField& field) {
  // Neumaier-compensated sum.
  double sum = 0.0;
  double carry = 0.0;
  for (double v : field.values()) {
    if (!std::isfinite(v)) throw InvalidArgument("integrate: non-finite field value");
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) * field.grid().cell_volume();
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "sup_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Trajectory::Trajectory(const TorusGrid& grid, double dt) : grid_(grid), dt_(dt) {}

void Trajectory::push_back(double t, ScalarField field) {
  if (!(field.grid() == grid_)) throw InvalidArgument("Trajectory: field on a different grid");
  if (!times_.empty() && !(t > times_.back())) {
    throw InvalidArgument("Trajectory: times must be strictly increasing");
  }
  times_.push_back(t);
  fields_.push_back(std::move(field));
}

Trajectory Trajectory::map(const std::function<double(double)>& f) const {
  Trajectory out(grid_, dt_);
  for (std::size_t k = 0; k < size(); ++k) out.push_back(times_[k], fields_[k].map(f));
  return out;
}

std::vector<double> Trajectory::time_weights() const {
  std::vector<double> w(times_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    const double h = times_[k + 1] - times_[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

double integrate_spacetime(const Trajectory& traj) {
  const auto w = traj.time_weights();
  double total = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) total += w[k] * integrate(traj[k]);
  return total;
}

double integrate_spacetime(const Trajectory& a, const Trajectory& b,
                           const std::function<double(double, double)>& f) {
  if (a.size() != b.size()) throw InvalidArgument("integrate_spacetime: time count mismatch");
  require_same_grid(a.grid(), b.grid(), "integrate_spacetime");
  const auto w = a.time_weights();
  const double cell = a.grid().cell_volume();
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double s = 0.0;
    const auto& fa = a[k];
    const auto& fb = b[k];
    for (std::size_t i = 0; i < fa.size(); ++i) s += f(fa[i], fb[i]);
    total += w[k] * s * cell;
  }
  return total;
}

}  // namespace pmaflow
