#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow::testing {

/// Real trigonometric polynomial with modes |k_a| <= kmax on every axis.
struct TrigPoly {
  struct Term {
    std::array<int, 4> k{};
    double cos_coef = 0.0;
    double sin_coef = 0.0;
  };
  std::vector<Term> terms;
  double period = 1.0;

  double operator()(const std::array<double, 4>& x) const {
    double s = 0.0;
    for (const auto& t : terms) {
      double arg = 0.0;
      for (int a = 0; a < 4; ++a) arg += t.k[a] * x[a];
      arg *= 2.0 * std::numbers::pi / period;
      s += t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg);
    }
    return s;
  }

  /// Exact d^2 / dx_a dx_b.
  double second_derivative(const std::array<double, 4>& x, int a, int b) const {
    const double w = 2.0 * std::numbers::pi / period;
    double s = 0.0;
    for (const auto& t : terms) {
      double arg = 0.0;
      for (int c = 0; c < 4; ++c) arg += t.k[c] * x[c];
      arg *= w;
      s -= t.k[a] * t.k[b] * w * w * (t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg));
    }
    return s;
  }

  /// Average over one period: the constant term.
  double mean() const {
    double s = 0.0;
    for (const auto& t : terms) {
      if (t.k == std::array<int, 4>{}) s += t.cos_coef;
    }
    return s;
  }

  ScalarField sample(const TorusGrid& g) const {
    return ScalarField::from_function(g, [&](const std::array<double, 4>& x) { return (*this)(x); });
  }
};

inline TrigPoly random_trig_poly(std::mt19937_64& rng, int real_dim, int kmax, int count,
                                 double amplitude, double period = 1.0) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> cd(-amplitude, amplitude);
  TrigPoly p;
  p.period = period;
  for (int c = 0; c < count; ++c) {
    TrigPoly::Term t;
    for (int a = 0; a < real_dim; ++a) t.k[a] = kd(rng);
    t.cos_coef = cd(rng);
    t.sin_coef = cd(rng);
    p.terms.push_back(t);
  }
  return p;
}

}  // namespace pmaflow::testing
