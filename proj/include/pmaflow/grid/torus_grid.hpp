#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace pmaflow {

enum class DerivativeMode { spectral, finite_difference_2nd };

/// Uniform discretization of the flat complex torus C^n / (L Z)^{2n}.
///
/// Real coordinates are ordered (x1, y1, x2, y2) with z_j = x_j + i y_j.
/// Points are stored row-major with axis 0 slowest. The metric is the flat
/// one, g_{i jbar} = delta_{ij}, so omega_0^n is Lebesgue measure and the
/// periodic trapezoid rule integrates band-limited fields exactly.
struct TorusGrid {
  int n_complex = 1;
  int points_per_axis = 32;
  double period = 1.0;
  DerivativeMode derivative_mode = DerivativeMode::spectral;

  TorusGrid() = default;
  TorusGrid(int n, int N, double L = 1.0,
            DerivativeMode mode = DerivativeMode::spectral);

  [[nodiscard]] int real_dim() const { return 2 * n_complex; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double spacing() const { return period / points_per_axis; }
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] double volume() const;

  [[nodiscard]] std::array<int, 4> multi_index(std::size_t flat) const;
  [[nodiscard]] std::size_t flat_index(const std::array<int, 4>& idx) const;
  /// Real coordinates of a grid point; unused trailing entries are zero.
  [[nodiscard]] std::array<double, 4> coordinates(std::size_t flat) const;
  /// Flat index of the point shifted by `offset` cells along each axis.
  [[nodiscard]] std::size_t shifted(std::size_t flat,
                                    const std::array<int, 4>& offset) const;

  /// Coordinates of every point along one axis, for building fields.
  [[nodiscard]] std::vector<double> axis_coordinates() const;

  /// Squared periodic distance between two points of the torus.
  [[nodiscard]] double periodic_distance2(const std::array<double, 4>& a,
                                          const std::array<double, 4>& b) const;

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) = default;
};

}  // namespace pmaflow
