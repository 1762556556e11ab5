#include "pmaflow/cli/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "pmaflow/estimates/estimates.hpp"

namespace pmaflow::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// Strict reader: tracks consumed keys so leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  void get(const char* key, std::optional<double>& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const auto& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <class F>
  void object(const char* key, F&& read) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    Reader sub(j_.at(key), field(key));
    read(sub);
    sub.finish();
  }

  void modes(const char* key, std::vector<ModeConfig>& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const auto& arr = j_.at(key);
    if (!arr.is_array()) throw ConfigError(field(key) + ": expected an array");
    out.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader r(arr[i], field(key) + "[" + std::to_string(i) + "]");
      ModeConfig m;
      r.get("axis", m.axis);
      r.get("wavenumber", m.wavenumber);
      r.get("coefficient", m.coefficient);
      r.get("phase", m.phase);
      r.finish();
      out.push_back(m);
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key.c_str()) + ": unknown field");
    }
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }
  [[nodiscard]] std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

template <class F>
void wrap(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

}  // namespace

void RunConfig::validate() const {
  require(grid.n == 1 || grid.n == 2, "grid.n", "must be 1 or 2");
  require(grid.N >= 4 && grid.N % 2 == 0, "grid.N", "must be even and >= 4");
  require(grid.L > 0.0, "grid.L", "must be positive");
  require(one_of(grid.derivatives, {"spectral", "fd2"}), "grid.derivatives", "must be spectral or fd2");

  require(one_of(flow.equation, {"monge_ampere", "hessian"}), "flow.equation", "must be monge_ampere or hessian");
  require(one_of(flow.initial_guess, {"predictor", "extrapolate", "unit_rate"}), "flow.initial_guess",
          "must be predictor, extrapolate or unit_rate");
  wrap("flow", [&] { flow_params().validate(); });
  if (flow.equation == "hessian") wrap("flow.symbol", [&] { symbol().validate(); });

  require(one_of(initial.kind, {"zero", "constant", "random"}), "initial.kind", "must be zero, constant or random");
  require(initial.amplitude >= 0.0, "initial.amplitude", "must be >= 0");
  require(initial.kmax >= 1, "initial.kmax", "must be >= 1");
  require(initial.modes >= 1, "initial.modes", "must be >= 1");

  require(one_of(rhs.kind, {"zero", "time_only", "smooth_product", "mollified_log_singularity", "manufactured"}),
          "rhs.kind", "unknown right-hand side");
  require(one_of(rhs.profile, {"constant", "sine", "linear"}), "rhs.profile", "must be constant, sine or linear");
  for (std::size_t i = 0; i < rhs.modes.size(); ++i) {
    const std::string p = "rhs.modes[" + std::to_string(i) + "].axis";
    require(rhs.modes[i].axis >= 0 && rhs.modes[i].axis < 2 * grid.n, p, "out of range for grid.n");
  }
  require(rhs.center.size() == 4, "rhs.center", "needs 4 coordinates");
  require(rhs.strength >= 0.0, "rhs.strength", "must be >= 0");
  require(rhs.radius > 0.0, "rhs.radius", "must be positive");
  require(rhs.curvature >= 0.0, "rhs.curvature", "must be >= 0");
  require(rhs.p0 > 1.0, "rhs.p0", "must exceed 1");
  require(rhs.kind != "manufactured" || grid.n == 1, "rhs.kind", "manufactured needs grid.n = 1");
  if (rhs.kind == "manufactured") {
    const double a = flow.T + 0.5 * rhs.curvature * flow.T * flow.T;
    require(a * std::numbers::pi * std::numbers::pi < 2.0 * grid.L * grid.L, "flow.T",
            "manufactured solution is admissible only while (T + curvature T^2 / 2) pi^2 < 2 L^2");
  }

  require(estimates.p > 0.0, "estimates.p", "must be positive");
  require(estimates.weight_power == 1.0 || estimates.weight_power == grid.n + 1.0, "estimates.weight_power",
          "must be 1 or n+1");
  require(one_of(estimates.integrand, {"soft_power", "abs_power_plus_one"}), "estimates.integrand",
          "must be soft_power or abs_power_plus_one");
  require(estimates.alpha0 > 0.0, "estimates.alpha0", "must be positive");
  require(estimates.beta > 0.0, "estimates.beta", "must be positive");
  require(one_of(estimates.exponent_base, {"n_plus_1", "n_plus_2"}), "estimates.exponent_base",
          "must be n_plus_1 or n_plus_2");
  require(estimates.s_levels >= 2, "estimates.s_levels", "must be >= 2");
  require(estimates.delta > 0.0 && estimates.delta < 1.0, "estimates.delta", "must lie in (0, 1)");
  require(estimates.alpha_fraction > 0.0 && estimates.alpha_fraction < 1.0, "estimates.alpha_fraction",
          "must lie in (0, 1)");
  require(estimates.stability_eps > 0.0, "estimates.stability_eps", "must be positive");
  require(estimates.C1 > 0.0, "estimates.C1", "must be positive");
  require(estimates.convergence_levels >= 0 && estimates.convergence_levels <= 6, "estimates.convergence_levels",
          "must lie in [0, 6]");

  wrap("regularize", [&] { regularization().validate(torus()); });
  require(!regularize.eps_ladder.empty(), "regularize.eps_ladder", "must not be empty");
  for (double e : regularize.eps_ladder) {
    require(e > 0.0 && e < 0.5 * grid.L, "regularize.eps_ladder", "entries must lie in (0, L/2)");
  }

  require(one_of(maxprinciple.domain, {"box", "ball"}), "maxprinciple.domain", "must be box or ball");
  wrap("maxprinciple", [&] { maxprinciple_grid().validate(); });
  require(!maxprinciple.kappas.empty(), "maxprinciple.kappas", "must not be empty");
  for (double k : maxprinciple.kappas) require(k > 0.0, "maxprinciple.kappas", "entries must be positive");
  require(!maxprinciple.radii.empty(), "maxprinciple.radii", "must not be empty");
  for (double r : maxprinciple.radii) require(r > 0.0, "maxprinciple.radii", "entries must be positive");

  require(!output.dir.empty(), "output.dir", "must not be empty");
  require(output.workers >= 1, "output.workers", "must be >= 1");
}

TorusGrid RunConfig::torus() const {
  return TorusGrid(grid.n, grid.N, grid.L,
                   grid.derivatives == "fd2" ? DerivativeMode::finite_difference_2nd : DerivativeMode::spectral);
}

FlowParams RunConfig::flow_params() const {
  FlowParams p;
  p.T = flow.T;
  p.dt = flow.dt;
  p.newton_tol = flow.newton_tol;
  p.newton_max_iter = flow.newton_max_iter;
  p.damping = flow.damping;
  p.max_halvings = flow.max_halvings;
  p.admissibility_floor = flow.admissibility_floor;
  p.initial_guess = flow.initial_guess == "extrapolate" ? InitialGuess::extrapolate
                    : flow.initial_guess == "unit_rate" ? InitialGuess::unit_rate
                                                        : InitialGuess::predictor;
  return p;
}

RhsSpec RunConfig::rhs_spec() const {
  TemporalProfile g;
  g.kind = rhs.profile == "sine" ? TemporalProfile::Kind::sine
           : rhs.profile == "linear" ? TemporalProfile::Kind::linear
                                     : TemporalProfile::Kind::constant;
  g.offset = rhs.offset;
  g.amplitude = rhs.amplitude;
  g.frequency = rhs.frequency;
  RhsSpec spec;
  if (rhs.kind == "time_only") {
    spec = RhsSpec::time_only(g);
  } else if (rhs.kind == "smooth_product") {
    std::vector<SpatialMode> modes;
    for (const auto& m : rhs.modes) modes.push_back({m.axis, m.wavenumber, m.coefficient, m.phase});
    spec = RhsSpec::smooth_product(modes, g);
  } else if (rhs.kind == "mollified_log_singularity") {
    spec = RhsSpec::mollified_log_singularity({rhs.center[0], rhs.center[1], rhs.center[2], rhs.center[3]},
                                              rhs.strength, rhs.radius);
  } else if (rhs.kind == "manufactured") {
    spec = RhsSpec::manufactured(rhs.curvature);
  }
  spec.p0 = rhs.p0;
  return spec;
}

HessianSymbol RunConfig::symbol() const { return HessianSymbol::from_name(flow.symbol, grid.n, flow.k, flow.l); }

RegularizationParams RunConfig::regularization() const {
  RegularizationParams p;
  p.epsilon = regularize.epsilon;
  p.gamma = regularize.gamma;
  p.theta = regularize.theta;
  p.K = regularize.K;
  p.s_samples = regularize.s_samples;
  return p;
}

maxp::SpaceTimeGrid RunConfig::maxprinciple_grid() const {
  maxp::SpaceTimeGrid g;
  g.dim = maxprinciple.dim;
  g.points = maxprinciple.points;
  g.T = maxprinciple.T;
  g.time_steps = maxprinciple.time_steps;
  g.domain = maxprinciple.domain == "box" ? maxp::Domain::box : maxp::Domain::ball;
  return g;
}

ScalarField RunConfig::initial_field() const {
  const auto g = torus();
  if (initial.kind == "constant") return ScalarField(g, initial.value);
  if (initial.kind == "zero") return ScalarField(g, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(-initial.kmax, initial.kmax);
  std::uniform_real_distribution<double> cd(-initial.amplitude, initial.amplitude);
  struct Term {
    std::array<int, 4> k{};
    double a = 0.0, b = 0.0;
  };
  std::vector<Term> terms(initial.modes);
  for (auto& t : terms) {
    for (int a = 0; a < g.real_dim(); ++a) t.k[a] = kd(rng);
    t.a = cd(rng);
    t.b = cd(rng);
  }
  return ScalarField::from_function(g, [&](const std::array<double, 4>& x) {
    double s = initial.value;
    for (const auto& t : terms) {
      double arg = 0.0;
      for (int a = 0; a < 4; ++a) arg += t.k[a] * x[a];
      arg *= 2.0 * std::numbers::pi / g.period;
      s += t.a * std::cos(arg) + t.b * std::sin(arg);
    }
    return s;
  });
}

double RunConfig::stability_alpha() const {
  return estimates.alpha_fraction * alpha_limit(grid.n, rhs.p0);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  Reader r(j, "");
  r.get("seed", c.seed);
  r.object("grid", [&](Reader& s) {
    s.get("n", c.grid.n);
    s.get("N", c.grid.N);
    s.get("L", c.grid.L);
    s.get("derivatives", c.grid.derivatives);
  });
  r.object("flow", [&](Reader& s) {
    s.get("equation", c.flow.equation);
    s.get("symbol", c.flow.symbol);
    s.get("k", c.flow.k);
    s.get("l", c.flow.l);
    s.get("T", c.flow.T);
    s.get("dt", c.flow.dt);
    s.get("newton_tol", c.flow.newton_tol);
    s.get("newton_max_iter", c.flow.newton_max_iter);
    s.get("damping", c.flow.damping);
    s.get("max_halvings", c.flow.max_halvings);
    s.get("admissibility_floor", c.flow.admissibility_floor);
    s.get("initial_guess", c.flow.initial_guess);
  });
  r.object("initial", [&](Reader& s) {
    s.get("kind", c.initial.kind);
    s.get("value", c.initial.value);
    s.get("amplitude", c.initial.amplitude);
    s.get("kmax", c.initial.kmax);
    s.get("modes", c.initial.modes);
  });
  r.object("rhs", [&](Reader& s) {
    s.get("kind", c.rhs.kind);
    s.get("profile", c.rhs.profile);
    s.get("offset", c.rhs.offset);
    s.get("amplitude", c.rhs.amplitude);
    s.get("frequency", c.rhs.frequency);
    s.modes("modes", c.rhs.modes);
    s.get("center", c.rhs.center);
    s.get("strength", c.rhs.strength);
    s.get("radius", c.rhs.radius);
    s.get("curvature", c.rhs.curvature);
    s.get("p0", c.rhs.p0);
  });
  r.object("estimates", [&](Reader& s) {
    auto& e = c.estimates;
    s.get("p", e.p);
    s.get("weight_power", e.weight_power);
    s.get("integrand", e.integrand);
    s.get("alpha0", e.alpha0);
    s.get("beta", e.beta);
    s.get("exponent_base", e.exponent_base);
    s.get("mt_s", e.mt_s);
    s.get("s_levels", e.s_levels);
    s.get("delta", e.delta);
    s.get("alpha_fraction", e.alpha_fraction);
    s.get("stability_eps", e.stability_eps);
    s.get("C1", e.C1);
    s.get("convergence_levels", e.convergence_levels);
  });
  r.object("regularize", [&](Reader& s) {
    s.get("epsilon", c.regularize.epsilon);
    s.get("gamma", c.regularize.gamma);
    s.get("theta", c.regularize.theta);
    s.get("K", c.regularize.K);
    s.get("s_samples", c.regularize.s_samples);
    s.get("eps_ladder", c.regularize.eps_ladder);
  });
  r.object("maxprinciple", [&](Reader& s) {
    auto& m = c.maxprinciple;
    s.get("dim", m.dim);
    s.get("points", m.points);
    s.get("T", m.T);
    s.get("time_steps", m.time_steps);
    s.get("domain", m.domain);
    s.get("kappas", m.kappas);
    s.get("radii", m.radii);
  });
  r.object("output", [&](Reader& s) {
    s.get("dir", c.output.dir);
    s.get("workers", c.output.workers);
  });
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

ordered_json to_ordered(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["grid"] = {{"n", c.grid.n}, {"N", c.grid.N}, {"L", c.grid.L}, {"derivatives", c.grid.derivatives}};
  j["flow"] = {{"equation", c.flow.equation},
               {"symbol", c.flow.symbol},
               {"k", c.flow.k},
               {"l", c.flow.l},
               {"T", c.flow.T},
               {"dt", c.flow.dt},
               {"newton_tol", c.flow.newton_tol},
               {"newton_max_iter", c.flow.newton_max_iter},
               {"damping", c.flow.damping},
               {"max_halvings", c.flow.max_halvings},
               {"admissibility_floor", c.flow.admissibility_floor},
               {"initial_guess", c.flow.initial_guess}};
  j["initial"] = {{"kind", c.initial.kind},
                  {"value", c.initial.value},
                  {"amplitude", c.initial.amplitude},
                  {"kmax", c.initial.kmax},
                  {"modes", c.initial.modes}};
  ordered_json modes = ordered_json::array();
  for (const auto& m : c.rhs.modes) {
    modes.push_back({{"axis", m.axis}, {"wavenumber", m.wavenumber}, {"coefficient", m.coefficient}, {"phase", m.phase}});
  }
  j["rhs"] = {{"kind", c.rhs.kind},
              {"profile", c.rhs.profile},
              {"offset", c.rhs.offset},
              {"amplitude", c.rhs.amplitude},
              {"frequency", c.rhs.frequency},
              {"modes", modes},
              {"center", c.rhs.center},
              {"strength", c.rhs.strength},
              {"radius", c.rhs.radius},
              {"curvature", c.rhs.curvature},
              {"p0", c.rhs.p0}};
  const auto& e = c.estimates;
  j["estimates"] = {{"p", e.p},
                    {"weight_power", e.weight_power},
                    {"integrand", e.integrand},
                    {"alpha0", e.alpha0},
                    {"beta", e.beta},
                    {"exponent_base", e.exponent_base},
                    {"mt_s", e.mt_s},
                    {"s_levels", e.s_levels},
                    {"delta", e.delta},
                    {"alpha_fraction", e.alpha_fraction},
                    {"stability_eps", e.stability_eps},
                    {"C1", e.C1},
                    {"convergence_levels", e.convergence_levels}};
  j["regularize"] = {{"epsilon", c.regularize.epsilon},
                     {"gamma", c.regularize.gamma},
                     {"theta", c.regularize.theta},
                     {"K", c.regularize.K ? ordered_json(*c.regularize.K) : ordered_json(nullptr)},
                     {"s_samples", c.regularize.s_samples},
                     {"eps_ladder", c.regularize.eps_ladder}};
  const auto& m = c.maxprinciple;
  j["maxprinciple"] = {{"dim", m.dim},
                       {"points", m.points},
                       {"T", m.T},
                       {"time_steps", m.time_steps},
                       {"domain", m.domain},
                       {"kappas", m.kappas},
                       {"radii", m.radii}};
  j["output"] = {{"dir", c.output.dir}, {"workers", c.output.workers}};
  return j;
}

}  // namespace

std::string to_json(const RunConfig& c) { return to_ordered(c).dump(2); }

namespace {

ordered_json& scalar_node(ordered_json& j, const std::string& path) {
  ordered_json* node = &j;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) throw ConfigError(path + ": no such field");
    node = &(*node)[part];
  }
  if (!node->is_number() && !node->is_null()) throw ConfigError(path + ": not a scalar numeric field");
  return *node;
}

}  // namespace

std::optional<double> get_value(const RunConfig& config, const std::string& path) {
  auto j = to_ordered(config);
  const auto& node = scalar_node(j, path);
  if (node.is_null()) return std::nullopt;
  return node.get<double>();
}

RunConfig with_value(const RunConfig& config, const std::string& path, double value) {
  auto j = to_ordered(config);
  auto& node = scalar_node(j, path);
  if (node.is_number_integer()) {
    if (value != std::floor(value)) throw ConfigError(path + ": expects an integer");
    if (node.is_number_unsigned()) {
      if (value < 0) throw ConfigError(path + ": expects a nonnegative integer");
      node = static_cast<std::uint64_t>(value);
    } else {
      node = static_cast<long long>(value);
    }
  } else {
    node = value;
  }
  return parse_config(j.dump());
}

}  // namespace pmaflow::cli
