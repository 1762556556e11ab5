#pragma once

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

/// Radial bump rho(r) = c (1 - r^2)^k on [0, 1], normalized so that
/// the integral of rho(|w|) over R^d is one.
class RadialKernel {
 public:
  explicit RadialKernel(int real_dim, int power = 3);

  [[nodiscard]] int real_dim() const { return dim_; }
  [[nodiscard]] int power() const { return power_; }
  /// Normalization constant c, obtained by Gauss-Legendre quadrature.
  [[nodiscard]] double normalization() const { return norm_; }
  [[nodiscard]] double profile(double r) const;

  /// Second moment of the unit kernel, the integral of |w|^2 rho(|w|).
  /// This is the convexity compensator K_flat of the flat torus.
  [[nodiscard]] double second_moment() const { return second_moment_; }

  /// Fourier transform of the unit kernel at angular frequency |xi|.
  [[nodiscard]] double fourier(double xi) const;

 private:
  int dim_;
  int power_;
  double norm_ = 0.0;
  double second_moment_ = 0.0;
};

enum class KernelMode {
  /// Exact continuous convolution of the trigonometric interpolant.
  spectral,
  /// Discrete periodic convolution with sampled, sum-normalized weights.
  sampled,
};

/// Periodic convolution with the kernel rescaled to radius s,
/// rho_s(w) = s^{-d} rho(|w| / s). Requires 0 < s < L/2.
ScalarField convolve_radial(const ScalarField& field, double s, const RadialKernel& kernel,
                            KernelMode mode = KernelMode::spectral);

/// Default kernel for a grid.
const RadialKernel& default_kernel(int real_dim);

}  // namespace pmaflow
