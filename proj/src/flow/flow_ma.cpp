#include "pmaflow/flow/flow_ma.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "implicit_engine.hpp"
#include "pmaflow/error.hpp"

namespace pmaflow {

void FlowParams::validate() const {
  if (!(T > 0.0)) throw InvalidArgument("FlowParams: T must be positive");
  if (!(dt > 0.0) || dt > T) throw InvalidArgument("FlowParams: need 0 < dt <= T");
  if (!(newton_tol > 0.0)) throw InvalidArgument("FlowParams: newton_tol must be positive");
  if (newton_max_iter < 1) throw InvalidArgument("FlowParams: newton_max_iter must be >= 1");
  if (!(damping > 0.0) || damping > 1.0) throw InvalidArgument("FlowParams: damping in (0, 1]");
  if (max_halvings < 0) throw InvalidArgument("FlowParams: max_halvings must be >= 0");
  if (!(admissibility_floor > 0.0)) {
    throw InvalidArgument("FlowParams: admissibility_floor must be positive");
  }
}

int FlowParams::step_count() const {
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

namespace {

class MongeAmpere final : public detail::PointwiseOperator {
 public:
  double value(double rate, const Herm& A) const override { return rate * A.det(); }

  detail::PointLinearization linearize(double rate, const Herm& A) const override {
    const double det = A.det();
    Herm d = A.inverse();
    d.a *= rate * det;
    d.b *= rate * det;
    d.c *= rate * det;
    return {rate * det, det, d};
  }

  double rate_for(const Herm& A, double target) const override { return target / A.det(); }
};

const MongeAmpere kMongeAmpere;

}  // namespace

ScalarField ma_residual(const ScalarField& phi_prev, const ScalarField& phi_next, double dt,
                        const ScalarField& f_next) {
  return detail::residual(kMongeAmpere, phi_prev, phi_next, dt, f_next);
}

ScalarField implicit_step(const ScalarField& phi_prev, double dt, const ScalarField& f_next,
                          const FlowParams& params, const ScalarField* phi_before) {
  params.validate();
  return detail::step(kMongeAmpere, phi_prev, dt, f_next, params, phi_before, dt);
}

Trajectory solve_flow(const ScalarField& phi0, const RhsSpec& rhs, const FlowParams& params) {
  const auto times = detail::step_times(params);
  return detail::march(
      kMongeAmpere, phi0, times, params.dt,
      [&](std::size_t k) { return rhs.log_density(phi0.grid(), times[k]); }, params);
}

Trajectory solve_flow_sampled(const ScalarField& phi0, const Trajectory& log_density,
                              const FlowParams& params) {
  params.validate();
  if (!(log_density.grid() == phi0.grid())) {
    throw InvalidArgument("solve_flow_sampled: grid mismatch");
  }
  return detail::march(
      kMongeAmpere, phi0, log_density.times(), log_density.dt(),
      [&](std::size_t k) { return log_density[k]; }, params);
}

ComparisonReport comparison_check(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || !(a.grid() == b.grid())) {
    throw InvalidArgument("comparison_check: trajectories are not comparable");
  }
  ComparisonReport rep;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.times()[k] - b.times()[k]) > 1e-12 * std::max(1.0, a.times()[k])) {
      throw InvalidArgument("comparison_check: time samples differ");
    }
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      const double d = std::abs(a[k][i] - b[k][i]);
      if (d > rep.max_discrepancy) rep = {d, a.times()[k], i};
    }
  }
  return rep;
}

std::pair<NormalizationProfile, Trajectory> normalize(const Trajectory& traj, const RhsSpec& rhs) {
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& grid = traj.grid();
  const double vol = grid.volume();
  auto rate = [&](double t) { return integrate(rhs.density(grid, t)) / vol; };

  NormalizationProfile prof;
  prof.times = traj.times();
  Trajectory out(grid, traj.dt());
  double h = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times()[k];
    if (k > 0) h += Gauss::integrate(rate, traj.times()[k - 1], t);
    prof.h_values.push_back(h);
    prof.h_prime.push_back(rate(t));
    out.push_back(t, traj[k] + h);
  }
  return {std::move(prof), std::move(out)};
}

double eta_j(double x, int j) {
  if (j < 1) throw InvalidArgument("eta_j: j must be positive");
  return 0.5 * (x + std::sqrt(x * x + 1.0 / j));
}

AuxiliaryRhs build_auxiliary_rhs(const Trajectory& phi, const Trajectory& eF, double s, int j) {
  if (phi.empty() || phi.size() != eF.size() || !(phi.grid() == eF.grid())) {
    throw InvalidArgument("build_auxiliary_rhs: trajectories are not compatible");
  }
  if (j < 1) throw InvalidArgument("build_auxiliary_rhs: j must be positive");
  if (s < phi[0].sup_abs()) {
    throw SoftPreconditionError("build_auxiliary_rhs: s is below sup |phi_0|");
  }
  Trajectory density(phi.grid(), phi.dt());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    ScalarField d(phi.grid());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = eta_j(-phi[k][i] - s, j) * eF[k][i];
    density.push_back(phi.times()[k], std::move(d));
  }
  const double A = integrate_spacetime(density);
  for (std::size_t k = 0; k < density.size(); ++k) density[k] *= 1.0 / A;
  return {std::move(density), A};
}

Trajectory sample_log_density(const RhsSpec& rhs, const TorusGrid& grid,
                              const std::vector<double>& times, double dt) {
  Trajectory out(grid, dt);
  for (double t : times) out.push_back(t, rhs.log_density(grid, t));
  return out;
}

Trajectory sample_density(const RhsSpec& rhs, const TorusGrid& grid,
                          const std::vector<double>& times, double dt) {
  Trajectory out(grid, dt);
  for (double t : times) out.push_back(t, rhs.density(grid, t));
  return out;
}

}  // namespace pmaflow
