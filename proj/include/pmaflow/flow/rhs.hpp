#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

/// g(t) for time-only and product right-hand sides.
struct TemporalProfile {
  enum class Kind { constant, sine, linear };
  Kind kind = Kind::constant;
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;

  /// constant: offset; sine: offset + amplitude sin(frequency t);
  /// linear: offset + amplitude t.
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double derivative(double t) const;
};

/// coefficient * cos(2 pi wavenumber x_axis / L + phase)
struct SpatialMode {
  int axis = 0;
  int wavenumber = 1;
  double coefficient = 1.0;
  double phase = 0.0;
};

/// The log-density F(t, x) of the right-hand side e^F. e^F is strictly
/// positive by construction; singular families are generated mollified.
class RhsSpec {
 public:
  enum class Kind {
    zero,
    time_only,
    smooth_product,
    mollified_log_singularity,
    manufactured,
    custom,
  };

  static RhsSpec zero();
  static RhsSpec time_only(TemporalProfile g);
  /// F(t, x) = (sum of modes)(x) * g(t).
  static RhsSpec smooth_product(std::vector<SpatialMode> modes, TemporalProfile g);
  /// e^F = (|x - center|^2 + radius^2)^{-strength/2}, periodic distance.
  static RhsSpec mollified_log_singularity(std::array<double, 4> center, double strength,
                                           double radius);
  /// F := log((-d_t psi)(1 + psi_{1 1bar})) for
  /// psi = -(t + curvature t^2 / 2)(2 + cos 2 pi x1 / L) / 2.
  /// With curvature 0 backward Euler reproduces psi exactly.
  static RhsSpec manufactured(double curvature = 0.0);
  static RhsSpec custom(std::function<double(double, const std::array<double, 4>&)> f);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool spatially_flat() const {
    return kind_ == Kind::zero || kind_ == Kind::time_only;
  }

  [[nodiscard]] double value(double t, const std::array<double, 4>& x, const TorusGrid& grid) const;
  [[nodiscard]] ScalarField log_density(const TorusGrid& grid, double t) const;
  [[nodiscard]] ScalarField density(const TorusGrid& grid, double t) const;

  /// Space-time trapezoid value of ||e^F||_{L^p} over the given times.
  [[nodiscard]] double lp_norm(const TorusGrid& grid, const std::vector<double>& times,
                               double p) const;

  /// Claimed integrability exponent of e^F.
  double p0 = 2.0;

  // Parameters, exposed for serialization.
  TemporalProfile profile;
  std::vector<SpatialMode> modes;
  std::array<double, 4> center{};
  double strength = 0.0;
  double radius = 0.0;
  double curvature = 0.0;

 private:
  Kind kind_ = Kind::zero;
  std::function<double(double, const std::array<double, 4>&)> custom_;
};

std::string to_string(RhsSpec::Kind kind);

/// Exact manufactured solution -(t + curvature t^2 / 2)(2 + cos(2 pi x1 / L)) / 2.
ScalarField manufactured_solution(const TorusGrid& grid, double t, double curvature = 0.0);

}  // namespace pmaflow
