#include "pmaflow/grid/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "pmaflow/error.hpp"

namespace pmaflow {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectralOps::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpectralOps::SpectralOps(const TorusGrid& grid) : grid_(grid) {
  const int d = grid.real_dim();
  const int N = grid.points_per_axis;
  std::array<int, 4> dims{N, N, N, N};

  spectrum_size_ = 1;
  for (int a = 0; a + 1 < d; ++a) spectrum_size_ *= static_cast<std::size_t>(N);
  spectrum_size_ *= static_cast<std::size_t>(N / 2 + 1);

  auto plans = std::make_shared<Plans>();
  {
    std::lock_guard lock(planner_mutex());
    std::vector<double> real(grid.size());
    Spectrum spec(spectrum_size_);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->forward = fftw_plan_dft_r2c(d, dims.data(), real.data(), cplx, flags);
    plans->backward = fftw_plan_dft_c2r(d, dims.data(), cplx, real.data(), flags);
  }
  if (!plans->forward || !plans->backward) throw Error("SpectralOps: FFTW planning failed");
  plans_ = std::move(plans);

  const double base = 2.0 * std::numbers::pi / grid.period;
  modes_.resize(spectrum_size_);
  std::array<int, 4> extent{N, N, N, N};
  extent[d - 1] = N / 2 + 1;
  for (std::size_t flat = 0; flat < spectrum_size_; ++flat) {
    std::size_t rest = flat;
    Mode m;
    for (int a = d - 1; a >= 0; --a) {
      const int j = static_cast<int>(rest % static_cast<std::size_t>(extent[a]));
      rest /= static_cast<std::size_t>(extent[a]);
      const int k = (j <= N / 2) ? j : j - N;
      m.kappa[a] = base * k;
      m.kappa_odd[a] = (std::abs(k) == N / 2) ? 0.0 : base * k;
    }
    modes_[flat] = m;
  }
}

Spectrum SpectralOps::forward(std::span<const double> values) const {
  if (values.size() != grid_.size()) throw InvalidArgument("SpectralOps::forward: size mismatch");
  Spectrum spec(spectrum_size_);
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  return spec;
}

void SpectralOps::inverse(Spectrum spec, std::span<double> out) const {
  if (out.size() != grid_.size() || spec.size() != spectrum_size_) {
    throw InvalidArgument("SpectralOps::inverse: size mismatch");
  }
  fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (double& v : out) v *= scale;
}

ScalarField SpectralOps::apply(const Spectrum& spec, std::span<const double> symbol) const {
  Spectrum work(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) work[i] = spec[i] * symbol[i];
  ScalarField out(grid_);
  inverse(std::move(work), out.values());
  return out;
}

ScalarField SpectralOps::apply(const ScalarField& field, std::span<const double> symbol) const {
  return apply(forward(field.values()), symbol);
}

std::vector<double> SpectralOps::symbol(const std::function<double(const Mode&)>& f) const {
  std::vector<double> s(spectrum_size_);
  for (std::size_t i = 0; i < spectrum_size_; ++i) s[i] = f(modes_[i]);
  return s;
}

double SpectralOps::second_derivative_symbol(const Mode& m, int a, int b) const {
  if (grid_.derivative_mode == DerivativeMode::spectral) {
    if (a == b) return -m.kappa[a] * m.kappa[a];
    return -m.kappa_odd[a] * m.kappa_odd[b];
  }
  const double h = grid_.spacing();
  if (a == b) return (2.0 * std::cos(m.kappa[a] * h) - 2.0) / (h * h);
  return -std::sin(m.kappa[a] * h) * std::sin(m.kappa[b] * h) / (h * h);
}

const SpectralOps& spectral_ops(const TorusGrid& grid) {
  using Key = std::tuple<int, int, double, int>;
  static std::mutex cache_mutex;
  static std::map<Key, std::unique_ptr<SpectralOps>> cache;
  const Key key{grid.n_complex, grid.points_per_axis, grid.period,
                static_cast<int>(grid.derivative_mode)};
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<SpectralOps>(grid)).first;
  }
  return *it->second;
}

}  // namespace pmaflow
