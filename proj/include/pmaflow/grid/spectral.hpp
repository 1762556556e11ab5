#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

using Spectrum = std::vector<std::complex<double>>;

/// Angular wave vector of one Fourier mode. `kappa` keeps the Nyquist
/// entry (used by even-order symbols); `kappa_odd` zeroes it so that
/// odd-order symbols stay real-valued on real data.
struct Mode {
  std::array<double, 4> kappa{};
  std::array<double, 4> kappa_odd{};
};

/// Real-to-complex FFT on a TorusGrid with cached FFTW plans.
///
/// Plans are created once per (dimension, N) under a global lock; the
/// execute calls are reentrant, so one SpectralOps may be shared freely.
class SpectralOps {
 public:
  explicit SpectralOps(const TorusGrid& grid);

  [[nodiscard]] const TorusGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t spectrum_size() const { return spectrum_size_; }
  [[nodiscard]] const std::vector<Mode>& modes() const { return modes_; }

  [[nodiscard]] Spectrum forward(std::span<const double> values) const;
  /// Inverse transform including the 1/N^d normalization. `spec` is
  /// consumed (FFTW's multi-dimensional c2r overwrites its input).
  void inverse(Spectrum spec, std::span<double> out) const;

  /// Multiplies the spectrum by a real symbol and transforms back.
  [[nodiscard]] ScalarField apply(const Spectrum& spec, std::span<const double> symbol) const;
  [[nodiscard]] ScalarField apply(const ScalarField& field, std::span<const double> symbol) const;

  /// Evaluates a symbol at every mode.
  [[nodiscard]] std::vector<double> symbol(const std::function<double(const Mode&)>& f) const;

  /// Symbol of d^2/dx_a dx_b for the grid's derivative mode.
  [[nodiscard]] double second_derivative_symbol(const Mode& m, int a, int b) const;

 private:
  struct Plans;
  TorusGrid grid_;
  std::shared_ptr<const Plans> plans_;
  std::size_t spectrum_size_ = 0;
  std::vector<Mode> modes_;
};

/// Shared SpectralOps instance for a grid (cached, thread-safe).
const SpectralOps& spectral_ops(const TorusGrid& grid);

}  // namespace pmaflow
