#include "pmaflow/grid/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "pmaflow/error.hpp"

namespace pmaflow {

std::array<double, 2> Herm::eigenvalues() const {
  if (n == 1) return {a, a};
  const double mean = 0.5 * (a + b);
  const double radius = std::hypot(0.5 * (a - b), std::abs(c));
  return {mean - radius, mean + radius};
}

Herm Herm::inverse() const {
  if (n == 1) return {1, 1.0 / a, 0.0, {0.0, 0.0}};
  const double d = det();
  return {2, b / d, a / d, -c / d};
}

double Herm::pair(const Herm& o) const {
  if (n == 1) return a * o.a;
  // tr([[a,c],[c*,b]] [[p,q],[q*,r]]) = a p + b r + 2 Re(c q*)
  return a * o.a + b * o.b + 2.0 * (c * std::conj(o.c)).real();
}

Herm HessianData::at(std::size_t i) const {
  if (grid.n_complex == 1) return {1, a[i], 0.0, {0.0, 0.0}};
  return {2, a[i], b[i], {c_re[i], c_im[i]}};
}

double EigenvalueField::min() const {
  return *std::min_element(values.begin(), values.end());
}

const HessianSymbols& hessian_symbols(const TorusGrid& grid) {
  using Key = std::tuple<int, int, double, int>;
  static std::mutex m;
  static std::map<Key, std::unique_ptr<HessianSymbols>> cache;
  const Key key{grid.n_complex, grid.points_per_axis, grid.period,
                static_cast<int>(grid.derivative_mode)};
  std::lock_guard lock(m);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const auto& ops = spectral_ops(grid);
  auto sym = std::make_unique<HessianSymbols>();
  sym->a = ops.symbol([&](const Mode& md) {
    return 0.25 * (ops.second_derivative_symbol(md, 0, 0) + ops.second_derivative_symbol(md, 1, 1));
  });
  if (grid.n_complex == 2) {
    sym->b = ops.symbol([&](const Mode& md) {
      return 0.25 * (ops.second_derivative_symbol(md, 2, 2) + ops.second_derivative_symbol(md, 3, 3));
    });
    sym->c_re = ops.symbol([&](const Mode& md) {
      return 0.25 * (ops.second_derivative_symbol(md, 0, 2) + ops.second_derivative_symbol(md, 1, 3));
    });
    sym->c_im = ops.symbol([&](const Mode& md) {
      return 0.25 * (ops.second_derivative_symbol(md, 0, 3) - ops.second_derivative_symbol(md, 1, 2));
    });
  }
  return *cache.emplace(key, std::move(sym)).first->second;
}

HessianData complex_hessian(const Spectrum& spec, const TorusGrid& grid) {
  const auto& ops = spectral_ops(grid);
  const auto& sym = hessian_symbols(grid);
  HessianData h;
  h.grid = grid;
  auto take = [](ScalarField f) {
    auto v = f.values();
    return std::vector<double>(v.begin(), v.end());
  };
  h.a = take(ops.apply(spec, sym.a));
  if (grid.n_complex == 2) {
    h.b = take(ops.apply(spec, sym.b));
    h.c_re = take(ops.apply(spec, sym.c_re));
    h.c_im = take(ops.apply(spec, sym.c_im));
  }
  return h;
}

HessianData complex_hessian(const ScalarField& field) {
  if (!field.all_finite()) throw InvalidArgument("complex_hessian: non-finite input");
  const auto& ops = spectral_ops(field.grid());
  return complex_hessian(ops.forward(field.values()), field.grid());
}

EigenvalueField hessian_eigenvalues(const HessianData& h) {
  EigenvalueField out;
  out.n = h.grid.n_complex;
  out.values.resize(h.size() * static_cast<std::size_t>(out.n));
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto ev = h.at(i).plus_identity().eigenvalues();
    for (int k = 0; k < out.n; ++k) out.values[i * out.n + k] = ev[k];
  }
  return out;
}

ScalarField complex_laplacian(const ScalarField& field) {
  const auto h = complex_hessian(field);
  ScalarField out(field.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.at(i).trace();
  return out;
}

}  // namespace pmaflow
