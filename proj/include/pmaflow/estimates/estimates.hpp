#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

// ---- entropy and the I-functional ----------------------------------------

enum class EntropyIntegrand {
  soft_power,          // (F^2 + 1)^{p/2}
  abs_power_plus_one,  // |F|^p + 1
};

/// Space-time integral of e^{weight_power F} times the chosen F-weight.
/// `eF` and `F` are sampled at the same times.
double entropy(const Trajectory& eF, const Trajectory& F, double p, double weight_power = 1.0,
               EntropyIntegrand integrand = EntropyIntegrand::soft_power);

/// I(phi) = 1/(n+1) int phi sum_j sigma_j(lambda[I + H]) / binom(n, j).
double i_functional(const ScalarField& phi);

struct ISeries {
  std::vector<double> times;
  std::vector<double> values;
  /// max over interior times of |centered dI/dt + int e^F|.
  double derivative_residual = 0.0;
};

ISeries i_series(const Trajectory& phi, const Trajectory& eF);

struct MeanGap {
  double gap = 0.0;                  // sup phi - mean phi
  double integral_minus_i = 0.0;     // int phi - I(phi), nonnegative for admissible phi
};

MeanGap mean_minus_sup_gap(const ScalarField& phi);

// ---- level statistics and De Giorgi --------------------------------------

struct LevelStats {
  std::vector<double> s_grid;
  std::vector<double> A_s;        // int (-phi - s)^+ e^F
  std::vector<double> phi_of_s;   // int_{phi < -s} e^F
  std::vector<double> omega_vol;  // vol{(1 - delta) v - phi - s > 0}, with a comparator
  std::vector<double> A_s_delta;  // int ((1 - delta) v - phi - s)^+ e^F, with a comparator
};

/// Throws Error if a ladder fails to be nonincreasing.
LevelStats level_stats(const Trajectory& phi, const Trajectory& eF, const std::vector<double>& s_grid,
                       const Trajectory* comparator = nullptr, double delta = 0.0);

/// max over grid pairs s < s + r of r phi(s + r) - A_s; <= 0 when the
/// Chebyshev bound A_s >= r phi(s + r) holds.
double chebyshev_excess(const LevelStats& stats);

void write_level_stats_csv(std::ostream& os, const LevelStats& stats);

struct DeGiorgiParams {
  double B0 = 1.0;
  double delta = 1.0;
  double s0 = 0.0;
  double phi_s0 = 0.0;
};

/// s0 + 2 B0 phi(s0)^delta / (1 - 2^{-delta}).
double de_giorgi_extinction(const DeGiorgiParams& p);

struct DeGiorgiCheck {
  bool hypothesis_holds = true;
  double worst_ratio = 0.0;  // max r phi(s + r) / (B0 phi(s)^{1 + delta})
  double threshold = 0.0;
  bool vanishes_at_threshold = true;
};

/// Checks r phi(s + r) <= B0 phi(s)^{1 + delta} over pairs of ladder points
/// at or above s0, and that the ladder is zero from the extinction threshold on.
DeGiorgiCheck check_de_giorgi_ladder(const std::vector<double>& s, const std::vector<double>& phi,
                                     double B0, double delta, double s0);

/// Smallest B0 for which the ladder satisfies the hypothesis at `delta`.
double fit_de_giorgi_constant(const std::vector<double>& s, const std::vector<double>& phi,
                              double delta, double s0);

// ---- elementary inequalities ---------------------------------------------

/// C(p) = sup_{x > 0} p e^{x - 1} x^p e^{-2x}, by numerical maximization.
double power_exponential_constant(double p);

struct InequalityResult {
  std::string name;
  long checked = 0;
  long violations = 0;
  /// max (lhs - rhs) / max(|lhs|, |rhs|); <= 0 when every tuple holds.
  double worst_relative_excess = 0.0;
};

/// Evaluates the four inequalities on log-spaced argument tuples
/// (at least `min_tuples` per inequality and dimension).
std::vector<InequalityResult> inequality_battery(long min_tuples = 10000);

// ---- integrals ------------------------------------------------------------

enum class ExponentBase { n_plus_1, n_plus_2 };

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  double sup = 0.0;
};

/// Per-time int exp(beta A_s^{-1/base} ((-phi - s)^+)^{(n+2)/(n+1)}).
/// With A_s = 0 the integrand is 1.
TimeSeries moser_trudinger(const Trajectory& phi, double A_s, double s, double beta,
                           ExponentBase base);

/// Per-time int e^{-alpha0 phi}.
TimeSeries exp_alpha_integral(const Trajectory& phi, double alpha0);

// ---- stability -------------------------------------------------------------

/// q0 = p0 / (p0 - 1).
double conjugate_exponent(double p0);
/// Upper limit 1/(1 + q0 (n+1)) (or 2/(1 + q0 (n+1)) with `relaxed`).
double alpha_limit(int n, double p0, bool relaxed = false);

struct StabilityResult {
  double lhs = 0.0;        // sup (v - phi)
  double sup_initial = 0.0;  // ||(v0 - phi0)^+||_inf
  double l1_gap = 0.0;       // ||(v - phi)^+||_1
  double rhs = 0.0;        // max(sup_initial, l1_gap^alpha)
  double ratio = 0.0;
  bool v_admissible_shape = true;  // d_t v <= 0 and I + H[v] >= 0, up to tolerance
};

/// Throws InvalidArgument unless 0 < alpha < alpha_limit(n, p0).
StabilityResult stability_ratio(const Trajectory& v, const Trajectory& phi, double alpha,
                                double p0);

// ---- Hölder moduli ---------------------------------------------------------

struct HolderFit {
  double alpha = 0.0;  // +infinity for zero oscillation
  double C = 0.0;
  std::vector<double> separations;
  std::vector<double> quotients;  // sup |difference| per separation
};

struct HolderModuli {
  HolderFit time;
  HolderFit space;
};

/// Log-log least squares of sup differences against dyadic separations:
/// time from dt up to T/4, space from 4 cells up to max(8, N/16) cells.
HolderModuli holder_moduli(const Trajectory& phi);

// ---- s_* ---------------------------------------------------------------------

struct SStarBound {
  double bound = 0.0;
  double initial_term = 0.0;     // 2 ||(v0 - phi0)^+||_inf
  double comparator_term = 0.0;  // 2 delta ||v||_inf
  double l1_term = 0.0;          // C1 delta^{-q0(n+1)/(1 - 1/beta)} ||(v - phi)^+||_1
  double scanned = 0.0;          // infimum of s meeting the three conditions
  double margin = 0.0;           // bound - scanned
};

/// The smallest s with s >= ||((1-delta) v0 - phi0)^+||_inf,
/// A_{s,delta} <= delta^{n+2} and s >= 2 delta ||v||_inf.
double scan_s_star(const Trajectory& v, const Trajectory& phi, const Trajectory& eF, double delta);

/// Requires 0 < delta < 1 and beta > 1.
SStarBound s_star_bound(const Trajectory& v, const Trajectory& phi, const Trajectory& eF,
                        double delta, double beta, double C1, double p0);

// ---- report ------------------------------------------------------------------

struct EstimateReport {
  double entropy_p = 0.0;
  std::vector<double> I_series;
  double I_derivative_residual = 0.0;
  std::vector<double> mt_integrals;
  std::vector<double> exp_alpha0;
  HolderModuli holder;
  double stability_ratio = 0.0;
};

/// Deterministic JSON text; +infinity is written as the string "inf".
std::string to_json(const EstimateReport& report);

}  // namespace pmaflow
