#pragma once

#include <optional>
#include <vector>

#include "pmaflow/grid/convolution.hpp"
#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

struct RegularizationParams {
  /// Convexity compensator; defaults to the kernel second moment K_flat.
  std::optional<double> K;
  double gamma = 0.5;
  double epsilon = 0.1;
  double theta = 0.5;
  int s_samples = 32;
  /// The s ladder runs log-spaced over [s_min_ratio * epsilon, epsilon].
  double s_min_ratio = 1.0 / 1024.0;
  /// Weight c of the -c log(s / epsilon) term; defaults to epsilon^gamma.
  std::optional<double> c;

  /// Throws InvalidArgument when a field is out of range for `grid`.
  void validate(const TorusGrid& grid) const;
  [[nodiscard]] double K_value(const TorusGrid& grid) const;
  [[nodiscard]] double c_value() const;
  [[nodiscard]] std::vector<double> s_ladder() const;
};

/// rho_s phi with the default kernel of the grid.
ScalarField mollify(const ScalarField& field, double s, KernelMode mode = KernelMode::spectral);
Trajectory mollify(const Trajectory& traj, double s, KernelMode mode = KernelMode::spectral);

/// inf over 0 < s <= eps of rho_s phi + K s^2 - K eps^2 - c log(s / eps).
/// The infimum is taken on the s ladder, then refined per point with a
/// monotone cubic model of s -> rho_s phi + K_flat s^2.
ScalarField kiselman_legendre(const ScalarField& field, const RegularizationParams& params);
Trajectory kiselman_legendre(const Trajectory& traj, const RegularizationParams& params);

struct ThetaScaleResult {
  double theta = 0.0;
  double sup_gap = 0.0;         // sup (rho_{theta eps} phi - phi)
  double contract_bound = 0.0;  // (gap / c + K) c + K eps^2
  bool holds = true;
};

/// Picks theta <= params.theta with log(1/theta) > K + measured_gap / c and
/// measures sup (rho_{theta eps} phi - phi) over the trajectory.
ThetaScaleResult theta_scale_bound(const Trajectory& phi, const RegularizationParams& params,
                                   double measured_gap);

/// Trailing average (1/eps) int_{t-eps}^t phi of the piecewise-linear
/// interpolant in time, with phi(t) = phi_0 for t < 0.
Trajectory time_average(const Trajectory& phi, double eps);

struct DecreasingHolderResult {
  bool hypothesis_holds = true;
  bool conclusion_holds = true;
  double worst_hypothesis_ratio = 0.0;  // (average gap) / (C0 eps^alpha)
  double worst_ratio = 0.0;             // |f(t) - f(s)| / (4 C0 |t - s|^alpha)
};

/// Largest (average gap) / eps^alpha over the uniform sample grid.
double measure_c0(const std::vector<double>& times, const std::vector<double>& f, double alpha);

/// Checks the average-gap hypothesis with C0 and alpha over all (t, eps)
/// grid pairs, then |f(t) - f(s)| <= 4 C0 |t - s|^alpha over all pairs.
/// Times must be uniform; throws InvalidArgument if f increases.
DecreasingHolderResult decreasing_holder_from_averages(const std::vector<double>& times,
                                                       const std::vector<double>& f, double C0,
                                                       double alpha);

/// Same check at every grid point of a trajectory, with C0 measured from
/// the trajectory itself. Returns the measured C0 through `c0_out`.
DecreasingHolderResult decreasing_holder_check(const Trajectory& phi, double alpha,
                                               double* c0_out = nullptr);

struct BallMassRow {
  std::size_t center = 0;  // flat grid index
  double r = 0.0;
  double mass = 0.0;  // int_{B(center, r)} |Laplacian u|
};

struct BallMassProfile {
  std::vector<BallMassRow> rows;
  /// Log-log slope of mass against r over radii >= 4h; +infinity when
  /// every mass vanishes.
  double exponent = 0.0;
};

/// Real Laplacian, computed spectrally.
ScalarField real_laplacian(const ScalarField& field);

/// Sharp-mask ball integrals of |Laplacian u|. Radii must lie in (0, L/2).
BallMassProfile ball_mass_profile(const ScalarField& field, const std::vector<std::size_t>& centers,
                                  const std::vector<double>& radii);

struct LowerBoundConstants {
  double c_kernel = 0.0;  // weight of eps^{2-2n} int_{B(z, eps/2)} Laplacian u
  double C = 0.0;         // weight of eps^2
};

/// Constants of rho_eps u(z) - u(z) >= c eps^{2-2n} int_{B(z,eps/2)} Lap u - C eps^2
/// for u with I + H[u] >= 0, from the spherical-mean representation of the kernel.
LowerBoundConstants lower_bound_constants(const RadialKernel& kernel, int n_complex);

struct LowerBoundSample {
  std::size_t center = 0;
  double lhs = 0.0;        // rho_eps u(z) - u(z)
  double ball_term = 0.0;  // c eps^{2-2n} int_{B(z,eps/2)} Lap u
  double slack = 0.0;      // lhs - ball_term + C eps^2, nonnegative when the bound holds
};

std::vector<LowerBoundSample> lower_bound_check(const ScalarField& field,
                                                const std::vector<std::size_t>& centers,
                                                double eps);

}  // namespace pmaflow
