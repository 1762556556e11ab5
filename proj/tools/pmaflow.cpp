#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmaflow/cli/run.hpp"
#include "pmaflow/grid/field_io.hpp"

namespace fs = std::filesystem;
using namespace pmaflow;
using namespace pmaflow::cli;

namespace {

struct Overrides {
  std::string config;
  std::optional<double> T, dt;
  std::optional<int> grid_N;
  std::string rhs;
  std::string out;
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig build_config(const Overrides& o) {
  auto j = nlohmann::ordered_json::parse(o.config.empty() ? to_json(RunConfig{}) : read_file(o.config));
  if (!o.rhs.empty()) j["rhs"] = nlohmann::ordered_json::parse(read_file(o.rhs));
  if (o.T) j["flow"]["T"] = *o.T;
  if (o.dt) j["flow"]["dt"] = *o.dt;
  if (o.grid_N) j["grid"]["N"] = *o.grid_N;
  if (o.seed) j["seed"] = *o.seed;
  if (!o.out.empty()) j["output"]["dir"] = o.out;
  return parse_config(j.dump());
}

int print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
  }
  return all_passed(checks) ? 0 : 2;
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option("--T", o.T, "final time");
  app->add_option("--dt", o.dt, "time step");
  app->add_option("--grid-N", o.grid_N, "points per real axis");
  app->add_option("--rhs", o.rhs, "JSON file with the rhs section");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--seed", o.seed, "seed for random initial data");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic complex Monge-Ampere flow experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string trajectory, axis;
  std::vector<std::string> values;
  std::optional<int> jobs;

  auto* solve_cmd = app.add_subcommand("solve", "solve the flow and write trajectory.bin");
  auto* estimate_cmd = app.add_subcommand("estimate", "solve (or load) and measure the estimates");
  auto* regularize_cmd = app.add_subcommand("regularize", "regularization sandwich and rates on the flow");
  auto* maxp_cmd = app.add_subcommand("maxprinciple", "paraboloid cap family for the contact-set estimate");
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per value of a scalar config field");
  auto* report_cmd = app.add_subcommand("report", "regenerate plot scripts and print recorded checks");
  for (auto* cmd : {solve_cmd, estimate_cmd, regularize_cmd, maxp_cmd, sweep_cmd, report_cmd}) add_common(cmd, o);
  for (auto* cmd : {estimate_cmd, regularize_cmd}) {
    cmd->add_option("--trajectory", trajectory, "reuse a saved trajectory instead of solving");
  }
  sweep_cmd->add_option("--axis", axis, "dotted config path, e.g. flow.dt")->required();
  sweep_cmd->add_option("--values", values, "values for the axis")->expected(0, CLI::detail::expected_max_vector_size);
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = build_config(o);
    const fs::path out = config.output.dir;
    auto load_or_solve = [&] {
      if (trajectory.empty()) return run_solve(config, out).phi;
      return io::load_trajectory(trajectory, config.torus().derivative_mode);
    };
    if (solve_cmd->parsed()) {
      const auto r = run_solve(config, out);
      return print_checks(r.checks);
    }
    if (estimate_cmd->parsed()) {
      return print_checks(run_estimate(config, load_or_solve(), out).checks);
    }
    if (regularize_cmd->parsed()) {
      return print_checks(run_regularize(config, load_or_solve(), out));
    }
    if (maxp_cmd->parsed()) return print_checks(run_maxprinciple(config, out));
    if (sweep_cmd->parsed()) {
      if (jobs) config.output.workers = *jobs;
      std::vector<double> numbers;
      for (const auto& v : values) {
        if (!v.empty()) numbers.push_back(std::stod(v));
      }
      const auto rows = sweep(config, axis, numbers, out);
      bool ok = true;
      for (const auto& r : rows) {
        std::cout << axis << " = " << r.value << ": ";
        if (r.ok) {
          std::cout << (r.checks_passed ? "checks passed" : "checks failed") << ", exact error " << r.exact_error
                    << '\n';
        } else {
          std::cout << "error: " << r.error << '\n';
        }
        ok = ok && r.ok && r.checks_passed;
      }
      return ok ? 0 : 2;
    }
    if (report_cmd->parsed()) return print_checks(report(out));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
