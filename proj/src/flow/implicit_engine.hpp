#pragma once

#include <functional>

#include "pmaflow/flow/flow_params.hpp"
#include "pmaflow/grid/hessian.hpp"
#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow::detail {

/// Linearization of G(rate, A) at one point: dG = d_rate * drate + Re tr(d_matrix dA).
struct PointLinearization {
  double value = 0.0;
  double d_rate = 0.0;
  Herm d_matrix;
};

/// Pointwise nonlinearity G(rate, A) of a backward-Euler flow
/// G(-d_t phi, I + H[phi]) = e^F.
class PointwiseOperator {
 public:
  virtual ~PointwiseOperator() = default;
  [[nodiscard]] virtual double value(double rate, const Herm& A) const = 0;
  [[nodiscard]] virtual PointLinearization linearize(double rate, const Herm& A) const = 0;
  /// rate > 0 and min eig(A) >= floor.
  [[nodiscard]] virtual bool admissible(double rate, const Herm& A, double floor) const;
  /// Rate r with G(r, A) = target, for the predictor guess.
  [[nodiscard]] virtual double rate_for(const Herm& A, double target) const = 0;
};

/// G(rate, I + H[next]) - e^{f_next} with rate = (prev - next) / dt.
ScalarField residual(const PointwiseOperator& op, const ScalarField& prev, const ScalarField& next,
                     double dt, const ScalarField& f_next);

/// One Newton-solved backward-Euler step. `before` is the level preceding
/// `prev`, taken `dt_before` earlier (extrapolated guesses only).
ScalarField step(const PointwiseOperator& op, const ScalarField& prev, double dt,
                 const ScalarField& f_next, const FlowParams& params,
                 const ScalarField* before = nullptr, double dt_before = 0.0);

/// Steps to each entry of `times` (times[0] is the start); `log_density(k)`
/// is F at times[k]. Step errors are rethrown with the failing time.
Trajectory march(const PointwiseOperator& op, const ScalarField& phi0,
                 const std::vector<double>& times, double nominal_dt,
                 const std::function<ScalarField(std::size_t)>& log_density,
                 const FlowParams& params);

/// t_0 = 0, ..., t_K = T with K = params.step_count().
std::vector<double> step_times(const FlowParams& params);

/// True when every point of phi is admissible at rate 1.
bool admissible_data(const PointwiseOperator& op, const ScalarField& phi, double floor);

}  // namespace pmaflow::detail
