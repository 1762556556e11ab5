#pragma once

#include <span>
#include <string>
#include <vector>

#include "pmaflow/flow/flow_params.hpp"
#include "pmaflow/flow/rhs.hpp"
#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow {

/// Nonlinearity f(lambda_0, lambda_1..lambda_n) of the flow
/// f(-d_t phi, lambda[I + H[phi]]) = e^F.
struct HessianSymbol {
  enum class Kind {
    ma_power,               // (lambda_0 prod lambda_i)^{1/(n+1)}
    lambda0_sigma_k_power,  // (lambda_0 sigma_k(lambda)^{1/k})^{n/(n+1)}
    sigma_quotient_power,   // (lambda_0 (sigma_k/sigma_l)(lambda)^{1/(k-l)})^{n/(n+1)}
    full_sigma_k,           // sigma_k(lambda_0, lambda)^{1/k}
  };
  Kind kind = Kind::ma_power;
  int n = 1;
  int k = 0;
  int l = 0;

  static HessianSymbol ma_power(int n);
  static HessianSymbol lambda0_sigma_k_power(int n, int k);
  static HessianSymbol sigma_quotient_power(int n, int k, int l);
  static HessianSymbol full_sigma_k(int n, int k);
  /// Config names "ma", "l0_sigma_k", "sigma_quotient", "full_sigma_k".
  static HessianSymbol from_name(const std::string& name, int n, int k = 0, int l = 0);

  [[nodiscard]] std::string name() const;
  /// Degree of homogeneity in (lambda_0, lambda).
  [[nodiscard]] double degree() const;
  /// Throws InvalidArgument on out-of-range n, k, l.
  void validate() const;
};

struct ConePoint {
  double lambda0 = 1.0;
  std::vector<double> lambdas;
};

/// sigma_k(x), with sigma_0 = 1 and sigma_k = 0 for k > |x|.
double elementary_symmetric(std::span<const double> x, int k);

bool in_positive_cone(const ConePoint& p);
/// Gamma_+ for ma_power; the Gamma_k predicate (sigma_j > 0, j <= k) on
/// the relevant argument list for the sigma-type symbols.
bool in_symbol_cone(const HessianSymbol& symbol, const ConePoint& p);

struct SymbolValue {
  double value = 0.0;
  std::vector<double> gradient;  // d f / d lambda_i, i = 0..n
};

/// Closed-form value and gradient. Throws ConeViolation outside the cone.
SymbolValue f_eval_grad(const HessianSymbol& symbol, const ConePoint& p);

struct StructuralReport {
  bool monotone = true;
  bool symmetric = true;
  double c0_min = 0.0;  // min d_0 f prod_{i>=1} d_i f
  double C0_max = 0.0;  // max sum lambda_i d_i f / f
};

/// Samples must lie in Gamma_+.
StructuralReport structural_check(const HessianSymbol& symbol, std::span<const ConePoint> samples);

/// f((phi_prev - phi_next)/dt, lambda[I + H[phi_next]]) - e^{f_next}.
/// Throws ConeViolation naming the first offending grid point.
ScalarField hessian_residual(const ScalarField& phi_prev, const ScalarField& phi_next, double dt,
                             const ScalarField& f_next, const HessianSymbol& symbol);

ScalarField hessian_step(const ScalarField& phi_prev, double dt, const ScalarField& f_next,
                         const HessianSymbol& symbol, const FlowParams& params,
                         const ScalarField* phi_before = nullptr);

/// Backward-Euler trajectory restricted to Gamma_+. Throws ConeViolation
/// when phi0 is not admissible, otherwise as solve_flow.
Trajectory solve_hessian_flow(const ScalarField& phi0, const RhsSpec& rhs,
                              const HessianSymbol& symbol, const FlowParams& params);

}  // namespace pmaflow
