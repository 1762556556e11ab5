#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pmaflow/flow/flow_params.hpp"
#include "pmaflow/flow/rhs.hpp"
#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

/// R = ((phi_prev - phi_next) / dt) det(I + H[phi_next]) - e^{f_next}.
ScalarField ma_residual(const ScalarField& phi_prev, const ScalarField& phi_next, double dt,
                        const ScalarField& f_next);

/// One backward-Euler step of (-d_t phi) det(I + H[phi]) = e^F, solved by
/// damped Newton. `phi_before` (the level before phi_prev) is only used by
/// InitialGuess::extrapolate.
///
/// Throws NewtonDiverged or AdmissibilityLost.
ScalarField implicit_step(const ScalarField& phi_prev, double dt, const ScalarField& f_next,
                          const FlowParams& params, const ScalarField* phi_before = nullptr);

/// Trajectory of step_count() implicit steps from phi0 at t = 0.
Trajectory solve_flow(const ScalarField& phi0, const RhsSpec& rhs, const FlowParams& params);

/// Flow driven by a sampled log-density: the step landing on
/// log_density.times()[k] uses log_density[k], starting from phi0 at times[0].
/// Used for the auxiliary solves psi_j.
Trajectory solve_flow_sampled(const ScalarField& phi0, const Trajectory& log_density,
                              const FlowParams& params);

struct ComparisonReport {
  double max_discrepancy = 0.0;
  double worst_time = 0.0;
  std::size_t worst_point = 0;
};

/// sup |phi_a - phi_b| over all shared times and points.
ComparisonReport comparison_check(const Trajectory& a, const Trajectory& b);

struct NormalizationProfile {
  std::vector<double> times;
  std::vector<double> h_values;
  std::vector<double> h_prime;
};

/// h(0) = 0 and h'(t) vol(M) = integral of e^{F(t)}. Returns the profile
/// and the normalized trajectory phi + h(t), which is stationary for the
/// trivial flow.
std::pair<NormalizationProfile, Trajectory> normalize(const Trajectory& traj, const RhsSpec& rhs);

/// eta_j(x) = (x + sqrt(x^2 + 1/j)) / 2, a smooth positive majorant of x^+.
double eta_j(double x, int j);

struct AuxiliaryRhs {
  Trajectory density;  // eta_j(-phi - s) e^F / A_js
  double A_js = 0.0;
};

/// Normalized right-hand side of the auxiliary solve psi_j.
/// Throws SoftPreconditionError when s < sup |phi_0|.
AuxiliaryRhs build_auxiliary_rhs(const Trajectory& phi, const Trajectory& eF, double s, int j);

/// Log-density trajectory of an RhsSpec sampled at the given times.
Trajectory sample_log_density(const RhsSpec& rhs, const TorusGrid& grid,
                              const std::vector<double>& times, double dt);
/// Same, exponentiated.
Trajectory sample_density(const RhsSpec& rhs, const TorusGrid& grid,
                          const std::vector<double>& times, double dt);

}  // namespace pmaflow
