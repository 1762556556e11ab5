#include "pmaflow/flow/rhs.hpp"

#include <cmath>
#include <numbers>

#include "pmaflow/error.hpp"

namespace pmaflow {

double TemporalProfile::operator()(double t) const {
  switch (kind) {
    case Kind::constant: return offset;
    case Kind::sine: return offset + amplitude * std::sin(frequency * t);
    case Kind::linear: return offset + amplitude * t;
  }
  return offset;
}

double TemporalProfile::derivative(double t) const {
  switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::sine: return amplitude * frequency * std::cos(frequency * t);
    case Kind::linear: return amplitude;
  }
  return 0.0;
}

RhsSpec RhsSpec::zero() { return RhsSpec{}; }

RhsSpec RhsSpec::time_only(TemporalProfile g) {
  RhsSpec r;
  r.kind_ = Kind::time_only;
  r.profile = g;
  return r;
}

RhsSpec RhsSpec::smooth_product(std::vector<SpatialMode> modes, TemporalProfile g) {
  for (const auto& m : modes) {
    if (m.axis < 0 || m.axis > 3) throw InvalidArgument("smooth_product: axis out of range");
  }
  RhsSpec r;
  r.kind_ = Kind::smooth_product;
  r.modes = std::move(modes);
  r.profile = g;
  return r;
}

RhsSpec RhsSpec::mollified_log_singularity(std::array<double, 4> center, double strength,
                                           double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("mollified_log_singularity: radius must be positive");
  if (!(strength >= 0.0)) throw InvalidArgument("mollified_log_singularity: strength must be >= 0");
  RhsSpec r;
  r.kind_ = Kind::mollified_log_singularity;
  r.center = center;
  r.strength = strength;
  r.radius = radius;
  return r;
}

RhsSpec RhsSpec::manufactured(double curvature) {
  if (!(curvature >= 0.0)) throw InvalidArgument("manufactured: curvature must be >= 0");
  RhsSpec r;
  r.kind_ = Kind::manufactured;
  r.curvature = curvature;
  return r;
}

RhsSpec RhsSpec::custom(std::function<double(double, const std::array<double, 4>&)> f) {
  RhsSpec r;
  r.kind_ = Kind::custom;
  r.custom_ = std::move(f);
  return r;
}

double RhsSpec::value(double t, const std::array<double, 4>& x, const TorusGrid& grid) const {
  using std::numbers::pi;
  const double L = grid.period;
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::time_only: return profile(t);
    case Kind::smooth_product: {
      double s = 0.0;
      for (const auto& m : modes) {
        s += m.coefficient * std::cos(2.0 * pi * m.wavenumber * x[m.axis] / L + m.phase);
      }
      return s * profile(t);
    }
    case Kind::mollified_log_singularity: {
      double d2 = 0.0;
      for (int a = 0; a < grid.real_dim(); ++a) {
        double d = std::remainder(x[a] - center[a], L);
        d2 += d * d;
      }
      return -0.5 * strength * std::log(d2 + radius * radius);
    }
    case Kind::manufactured: {
      const double c = std::cos(2.0 * pi * x[0] / L);
      const double a = t + 0.5 * curvature * t * t;
      return std::log(0.5 * (1.0 + curvature * t) * (2.0 + c) *
                      (1.0 + 0.5 * pi * pi * a * c / (L * L)));
    }
    case Kind::custom: return custom_(t, x);
  }
  return 0.0;
}

ScalarField RhsSpec::log_density(const TorusGrid& grid, double t) const {
  auto f = ScalarField::from_function(
      grid, [&](const std::array<double, 4>& x) { return value(t, x, grid); });
  if (!f.all_finite()) throw InvalidArgument("RhsSpec: non-finite log-density");
  return f;
}

ScalarField RhsSpec::density(const TorusGrid& grid, double t) const {
  return log_density(grid, t).map([](double v) { return std::exp(v); });
}

double RhsSpec::lp_norm(const TorusGrid& grid, const std::vector<double>& times,
                        double p) const {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
  Trajectory powered(grid, times.size() > 1 ? times[1] - times[0] : 0.0);
  for (double t : times) {
    powered.push_back(t, log_density(grid, t).map([p](double v) { return std::exp(p * v); }));
  }
  return std::pow(integrate_spacetime(powered), 1.0 / p);
}

std::string to_string(RhsSpec::Kind kind) {
  switch (kind) {
    case RhsSpec::Kind::zero: return "zero";
    case RhsSpec::Kind::time_only: return "time_only";
    case RhsSpec::Kind::smooth_product: return "smooth_product";
    case RhsSpec::Kind::mollified_log_singularity: return "mollified_log_singularity";
    case RhsSpec::Kind::manufactured: return "manufactured";
    case RhsSpec::Kind::custom: return "custom";
  }
  return "unknown";
}

ScalarField manufactured_solution(const TorusGrid& grid, double t, double curvature) {
  const double a = t + 0.5 * curvature * t * t;
  return ScalarField::from_function(grid, [&](const std::array<double, 4>& x) {
    return -0.5 * a * (2.0 + std::cos(2.0 * std::numbers::pi * x[0] / grid.period));
  });
}

}  // namespace pmaflow
