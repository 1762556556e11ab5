#pragma once

namespace pmaflow {

/// Starting iterate of each Newton solve.
enum class InitialGuess {
  /// phi_prev - dt * rate, the rate solving the pointwise equation with
  /// the Hessian frozen at phi_prev.
  predictor,
  /// Linear extrapolation from the two previous levels (warm start).
  extrapolate,
  /// phi_prev - dt (cold start at unit rate).
  unit_rate,
};

struct FlowParams {
  double T = 1.0;
  double dt = 0.01;
  double newton_tol = 1e-10;  // sup norm of the residual
  int newton_max_iter = 50;
  double damping = 1.0;  // first trial step of the halving line search
  int max_halvings = 30;
  double admissibility_floor = 1e-8;
  InitialGuess initial_guess = InitialGuess::predictor;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
  /// ceil(T / dt), the last step shortened to land on T.
  [[nodiscard]] int step_count() const;
};

}  // namespace pmaflow
