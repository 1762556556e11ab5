#include "pmaflow/grid/convolution.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "pmaflow/error.hpp"
#include "pmaflow/grid/spectral.hpp"

namespace pmaflow {

namespace {

double sphere_area(int d) {
  // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace

RadialKernel::RadialKernel(int real_dim, int power) : dim_(real_dim), power_(power) {
  if (real_dim < 1 || power < 1) throw InvalidArgument("RadialKernel: bad dimension or power");
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const double area = sphere_area(dim_);
  const double mass = area * Gauss::integrate(
                                 [&](double r) {
                                   return std::pow(1.0 - r * r, power_) * std::pow(r, dim_ - 1);
                                 },
                                 0.0, 1.0);
  norm_ = 1.0 / mass;
  second_moment_ = norm_ * area *
                   Gauss::integrate(
                       [&](double r) { return std::pow(1.0 - r * r, power_) * std::pow(r, dim_ + 1); },
                       0.0, 1.0);
}

double RadialKernel::profile(double r) const {
  if (r < 0.0 || r >= 1.0) return 0.0;
  return norm_ * std::pow(1.0 - r * r, power_);
}

double RadialKernel::fourier(double xi) const {
  // FT of (1-|x|^2)_+^k in R^d: Gamma(k+1) 2^nu pi^{d/2} xi^{-nu} J_nu(xi), nu = d/2 + k.
  const double nu = 0.5 * dim_ + power_;
  const double pref = norm_ * std::tgamma(power_ + 1.0) * std::pow(2.0, nu) *
                      std::pow(std::numbers::pi, 0.5 * dim_);
  xi = std::abs(xi);
  double scaled;  // xi^{-nu} J_nu(xi)
  if (xi < 1e-3) {
    const double x2 = xi * xi;
    scaled = std::pow(2.0, -nu) / std::tgamma(nu + 1.0) *
             (1.0 - x2 / (4.0 * (nu + 1.0)) + x2 * x2 / (32.0 * (nu + 1.0) * (nu + 2.0)));
  } else {
    scaled = std::cyl_bessel_j(nu, xi) * std::pow(xi, -nu);
  }
  return pref * scaled;
}

const RadialKernel& default_kernel(int real_dim) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<RadialKernel>> cache;
  std::lock_guard lock(m);
  auto it = cache.find(real_dim);
  if (it == cache.end()) it = cache.emplace(real_dim, std::make_unique<RadialKernel>(real_dim)).first;
  return *it->second;
}

ScalarField convolve_radial(const ScalarField& field, double s, const RadialKernel& kernel,
                            KernelMode mode) {
  const auto& grid = field.grid();
  if (kernel.real_dim() != grid.real_dim()) {
    throw InvalidArgument("convolve_radial: kernel dimension does not match grid");
  }
  if (!(s > 0.0) || s >= 0.5 * grid.period) {
    throw InvalidArgument("convolve_radial: radius must satisfy 0 < s < L/2");
  }
  if (!field.all_finite()) throw InvalidArgument("convolve_radial: non-finite input");
  const auto& ops = spectral_ops(grid);

  if (mode == KernelMode::spectral) {
    const auto symbol = ops.symbol([&](const Mode& md) {
      double k2 = 0.0;
      for (int a = 0; a < grid.real_dim(); ++a) k2 += md.kappa[a] * md.kappa[a];
      return kernel.fourier(s * std::sqrt(k2));
    });
    return ops.apply(field, symbol);
  }

  // Sampled weights on minimal-image offsets, normalized to unit sum.
  ScalarField weights(grid, 0.0);
  const int N = grid.points_per_axis;
  const double h = grid.spacing();
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto idx = grid.multi_index(i);
    double r2 = 0.0;
    for (int a = 0; a < grid.real_dim(); ++a) {
      const int off = idx[a] <= N / 2 ? idx[a] : idx[a] - N;
      r2 += (off * h) * (off * h);
    }
    const double w = kernel.profile(std::sqrt(r2) / s);
    weights[i] = w;
    total += w;
  }
  for (auto& w : weights.values()) w /= total;
  const auto wspec = ops.forward(weights.values());
  std::vector<double> symbol(wspec.size());
  for (std::size_t i = 0; i < wspec.size(); ++i) symbol[i] = wspec[i].real();
  return ops.apply(field, symbol);
}

}  // namespace pmaflow
