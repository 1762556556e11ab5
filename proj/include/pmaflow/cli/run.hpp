#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pmaflow/cli/config.hpp"
#include "pmaflow/estimates/estimates.hpp"

namespace pmaflow::cli {

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

bool all_passed(const std::vector<Check>& checks);

/// Trajectory of the configured flow.
Trajectory solve(const RunConfig& config);

/// Sup distance to the exact solution when one is known (zero or constant
/// phi_0 with a zero, time-only or manufactured right-hand side under the
/// Monge-Ampere equation); NaN otherwise.
double exact_error(const RunConfig& config, const Trajectory& phi);

struct SolveResult {
  Trajectory phi;
  std::vector<Check> checks;
  double exact_error = 0.0;
};

/// Solves and writes trajectory.bin, sup_series.csv and solve.json.
SolveResult run_solve(const RunConfig& config, const std::filesystem::path& out);

struct RunResult {
  EstimateReport report;
  std::vector<Check> checks;
  double exact_error = 0.0;
  double time_average_l1 = 0.0;  // ||phi_{1,eps} - phi||_1 at regularize.epsilon
};

/// Measurements on a trajectory: writes report.json, checks.json, level
/// stats, I(t), Hoelder and Moser-Trudinger CSVs and gnuplot scripts.
RunResult run_estimate(const RunConfig& config, const Trajectory& phi, const std::filesystem::path& out);

/// solve followed by estimate.
RunResult run(const RunConfig& config, const std::filesystem::path& out);

/// eps ladder: mollifier and time-average L1 gaps with observed orders,
/// Kiselman-Legendre sandwich. Writes regularize.csv and regularize.json.
std::vector<Check> run_regularize(const RunConfig& config, const Trajectory& phi,
                                  const std::filesystem::path& out);

/// Paraboloid cap family. Writes maxprinciple.json and caps.csv.
std::vector<Check> run_maxprinciple(const RunConfig& config, const std::filesystem::path& out);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  bool checks_passed = false;
  double exact_error = 0.0;
  double observed_order = 0.0;  // against the previous row, NaN for the first
  double I_residual = 0.0;
  double entropy = 0.0;
  double holder_time = 0.0;
  double holder_space = 0.0;
  double stability_ratio = 0.0;
  double time_average_l1 = 0.0;
  double time_average_slope = 0.0;
};

/// One full run per value, each in its own subdirectory, at most
/// output.workers at a time. Failed runs are recorded and the sweep goes on.
/// Writes sweep.csv keyed by the axis.
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                            const std::filesystem::path& out);

/// Rewrites the gnuplot scripts for the artifacts present in `out` and
/// returns the recorded checks from checks.json.
std::vector<Check> report(const std::filesystem::path& out);

}  // namespace pmaflow::cli
