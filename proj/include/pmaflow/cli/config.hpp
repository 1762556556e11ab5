#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmaflow/error.hpp"
#include "pmaflow/flow/flow_hessian.hpp"
#include "pmaflow/flow/flow_params.hpp"
#include "pmaflow/flow/rhs.hpp"
#include "pmaflow/grid/torus_grid.hpp"
#include "pmaflow/maxprinciple/maxprinciple.hpp"
#include "pmaflow/regularize/regularize.hpp"

namespace pmaflow::cli {

/// Validation failure; the message starts with the offending field path.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct GridConfig {
  int n = 1;
  int N = 32;
  double L = 1.0;
  std::string derivatives = "spectral";  // or "fd2"
  bool operator==(const GridConfig&) const = default;
};

struct FlowConfig {
  std::string equation = "monge_ampere";  // or "hessian"
  std::string symbol = "ma";              // HessianSymbol::from_name
  int k = 0;
  int l = 0;
  double T = 1.0;
  double dt = 0.01;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double damping = 1.0;
  int max_halvings = 30;
  double admissibility_floor = 1e-8;
  std::string initial_guess = "predictor";  // "extrapolate", "unit_rate"
  bool operator==(const FlowConfig&) const = default;
};

struct InitialConfig {
  std::string kind = "zero";  // "constant", "random"
  double value = 0.0;
  double amplitude = 0.001;
  int kmax = 1;
  int modes = 3;
  bool operator==(const InitialConfig&) const = default;
};

struct ModeConfig {
  int axis = 0;
  int wavenumber = 1;
  double coefficient = 1.0;
  double phase = 0.0;
  bool operator==(const ModeConfig&) const = default;
};

struct RhsConfig {
  std::string kind = "zero";  // time_only, smooth_product, mollified_log_singularity, manufactured
  std::string profile = "constant";  // sine, linear
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  std::vector<ModeConfig> modes;
  std::vector<double> center{0.5, 0.5, 0.5, 0.5};
  double strength = 1.0;
  double radius = 0.05;
  double curvature = 0.0;
  double p0 = 2.0;
  bool operator==(const RhsConfig&) const = default;
};

struct EstimateConfig {
  double p = 1.0;
  double weight_power = 1.0;
  std::string integrand = "soft_power";  // or "abs_power_plus_one"
  double alpha0 = 1.0;
  double beta = 0.5;
  std::string exponent_base = "n_plus_2";  // or "n_plus_1"
  double mt_s = 0.0;
  int s_levels = 33;
  double delta = 0.25;
  double alpha_fraction = 0.5;  // alpha = alpha_fraction / (1 + q0 (n+1))
  double stability_eps = 0.1;
  double C1 = 1.0;
  int convergence_levels = 0;
  bool operator==(const EstimateConfig&) const = default;
};

struct RegularizeConfig {
  double epsilon = 0.1;
  double gamma = 0.5;
  double theta = 0.5;
  std::optional<double> K;
  int s_samples = 32;
  std::vector<double> eps_ladder{0.1, 0.05, 0.025};
  bool operator==(const RegularizeConfig&) const = default;
};

struct MaxPrincipleConfig {
  int dim = 2;
  int points = 33;
  double T = 1.0;
  int time_steps = 8;
  std::string domain = "ball";  // or "box"
  std::vector<double> kappas{0.5, 1.0, 2.0, 4.0};
  std::vector<double> radii{0.3, 0.4, 0.5};
  bool operator==(const MaxPrincipleConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  int workers = 2;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  GridConfig grid;
  FlowConfig flow;
  InitialConfig initial;
  RhsConfig rhs;
  EstimateConfig estimates;
  RegularizeConfig regularize;
  MaxPrincipleConfig maxprinciple;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  [[nodiscard]] TorusGrid torus() const;
  [[nodiscard]] FlowParams flow_params() const;
  [[nodiscard]] RhsSpec rhs_spec() const;
  [[nodiscard]] HessianSymbol symbol() const;
  [[nodiscard]] RegularizationParams regularization() const;
  [[nodiscard]] maxp::SpaceTimeGrid maxprinciple_grid() const;
  /// phi_0 on the torus; random data is drawn from `seed`.
  [[nodiscard]] ScalarField initial_field() const;
  /// alpha_fraction / (1 + q0 (n+1)).
  [[nodiscard]] double stability_alpha() const;
};

/// Parses and validates a JSON document. Unknown keys are errors.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Deterministic JSON with every field written.
std::string to_json(const RunConfig& config);

/// Current value of the scalar numeric field at a dotted path ("flow.dt");
/// nullopt for an unset optional. Throws ConfigError if the path does not
/// name one.
std::optional<double> get_value(const RunConfig& config, const std::string& path);

/// Replaces the scalar at a dotted path and revalidates.
RunConfig with_value(const RunConfig& config, const std::string& path, double value);

}  // namespace pmaflow::cli
