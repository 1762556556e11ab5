#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "pmaflow/grid/scalar_field.hpp"
#include "pmaflow/grid/spectral.hpp"

namespace pmaflow {

/// Hermitian matrix of size 1 or 2: [[a, c], [conj(c), b]].
/// For n = 1 only `a` is meaningful.
struct Herm {
  int n = 1;
  double a = 0.0;
  double b = 0.0;
  std::complex<double> c{0.0, 0.0};

  [[nodiscard]] Herm plus_identity() const { return {n, a + 1.0, b + 1.0, c}; }
  [[nodiscard]] double trace() const { return n == 1 ? a : a + b; }
  [[nodiscard]] double det() const { return n == 1 ? a : a * b - std::norm(c); }
  /// Ascending eigenvalues; entry 1 unused when n = 1.
  [[nodiscard]] std::array<double, 2> eigenvalues() const;
  [[nodiscard]] Herm inverse() const;
  /// Re tr(this * other), the pairing used by directional derivatives.
  [[nodiscard]] double pair(const Herm& other) const;
};

/// Complex Hessian phi_{i jbar} of a field, stored per component.
struct HessianData {
  TorusGrid grid;
  std::vector<double> a;     // phi_{1 1bar}
  std::vector<double> b;     // phi_{2 2bar}   (n = 2)
  std::vector<double> c_re;  // Re phi_{1 2bar} (n = 2)
  std::vector<double> c_im;  // Im phi_{1 2bar} (n = 2)

  [[nodiscard]] std::size_t size() const { return a.size(); }
  [[nodiscard]] Herm at(std::size_t i) const;
};

/// Per-point ascending eigenvalues of I + H, n values per point.
struct EigenvalueField {
  int n = 1;
  std::vector<double> values;  // row i*n .. i*n + n-1

  [[nodiscard]] double min() const;
  [[nodiscard]] double at(std::size_t point, int k) const { return values[point * n + k]; }
};

/// Mixed complex second derivatives d^2 phi / dz_i dzbar_j, with
/// d_z dzbar = (1/4)(d_xx + d_yy) on each complex line.
HessianData complex_hessian(const ScalarField& field);
HessianData complex_hessian(const Spectrum& spec, const TorusGrid& grid);

EigenvalueField hessian_eigenvalues(const HessianData& h);

/// Symbols (in the grid's derivative mode) of the Hessian components,
/// in the order a, b, Re c, Im c. Unused components are empty for n = 1.
struct HessianSymbols {
  std::vector<double> a, b, c_re, c_im;
};
const HessianSymbols& hessian_symbols(const TorusGrid& grid);

/// Complex Laplacian sum_i phi_{i ibar} (one quarter of the real Laplacian).
ScalarField complex_laplacian(const ScalarField& field);

}  // namespace pmaflow
