#include "pmaflow/grid/torus_grid.hpp"

#include <cmath>

#include "pmaflow/error.hpp"

namespace pmaflow {

TorusGrid::TorusGrid(int n, int N, double L, DerivativeMode mode)
    : n_complex(n), points_per_axis(N), period(L), derivative_mode(mode) {
  if (n != 1 && n != 2) {
    throw InvalidArgument("TorusGrid: n_complex must be 1 or 2");
  }
  if (N < 4 || N % 2 != 0) {
    throw InvalidArgument("TorusGrid: points_per_axis must be even and >= 4");
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw InvalidArgument("TorusGrid: period must be positive");
  }
}

std::size_t TorusGrid::size() const {
  std::size_t total = 1;
  for (int a = 0; a < real_dim(); ++a) total *= static_cast<std::size_t>(points_per_axis);
  return total;
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), real_dim()); }

double TorusGrid::volume() const { return std::pow(period, real_dim()); }

std::array<int, 4> TorusGrid::multi_index(std::size_t flat) const {
  std::array<int, 4> idx{0, 0, 0, 0};
  const auto N = static_cast<std::size_t>(points_per_axis);
  for (int a = real_dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::size_t TorusGrid::flat_index(const std::array<int, 4>& idx) const {
  std::size_t flat = 0;
  const auto N = static_cast<std::size_t>(points_per_axis);
  for (int a = 0; a < real_dim(); ++a) {
    flat = flat * N + static_cast<std::size_t>(idx[a]);
  }
  return flat;
}

std::array<double, 4> TorusGrid::coordinates(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::array<double, 4> x{0.0, 0.0, 0.0, 0.0};
  for (int a = 0; a < real_dim(); ++a) x[a] = idx[a] * spacing();
  return x;
}

std::size_t TorusGrid::shifted(std::size_t flat,
                               const std::array<int, 4>& offset) const {
  auto idx = multi_index(flat);
  for (int a = 0; a < real_dim(); ++a) {
    int v = (idx[a] + offset[a]) % points_per_axis;
    if (v < 0) v += points_per_axis;
    idx[a] = v;
  }
  return flat_index(idx);
}

std::vector<double> TorusGrid::axis_coordinates() const {
  std::vector<double> x(static_cast<std::size_t>(points_per_axis));
  for (int i = 0; i < points_per_axis; ++i) x[i] = i * spacing();
  return x;
}

double TorusGrid::periodic_distance2(const std::array<double, 4>& a,
                                     const std::array<double, 4>& b) const {
  double d2 = 0.0;
  for (int k = 0; k < real_dim(); ++k) {
    double d = std::fmod(a[k] - b[k], period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    d2 += d * d;
  }
  return d2;
}

}  // namespace pmaflow
