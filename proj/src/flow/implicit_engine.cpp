#include "implicit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pmaflow/error.hpp"
#include "pmaflow/grid/spectral.hpp"

namespace pmaflow::detail {

bool PointwiseOperator::admissible(double rate, const Herm& A, double floor) const {
  return rate > 0.0 && A.eigenvalues()[0] >= floor;
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double sup_norm(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

Vec to_vec(std::span<const double> s) { return Vec(s.begin(), s.end()); }

struct Evaluation {
  Vec residual;
  bool admissible = true;
  Vec c0;                  // d_rate / dt
  std::vector<Herm> dmat;  // d_matrix
};

Evaluation evaluate(const PointwiseOperator& op, const ScalarField& prev, const ScalarField& next,
                    double dt, const ScalarField& f_next, double floor, bool linearize) {
  const auto h = complex_hessian(next);
  Evaluation ev;
  const std::size_t n = next.size();
  ev.residual.resize(n);
  if (linearize) {
    ev.c0.resize(n);
    ev.dmat.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = (prev[i] - next[i]) / dt;
    const Herm A = h.at(i).plus_identity();
    if (!op.admissible(rate, A, floor)) {
      ev.admissible = false;
      return ev;
    }
    if (linearize) {
      const auto lin = op.linearize(rate, A);
      ev.residual[i] = lin.value - std::exp(f_next[i]);
      ev.c0[i] = lin.d_rate / dt;
      ev.dmat[i] = lin.d_matrix;
    } else {
      ev.residual[i] = op.value(rate, A) - std::exp(f_next[i]);
    }
  }
  return ev;
}

/// J d = c0 d - Re tr(D H[d]) and its constant-coefficient preconditioner.
class NewtonSystem {
 public:
  NewtonSystem(const TorusGrid& grid, const Evaluation& ev)
      : grid_(grid), ops_(spectral_ops(grid)), ev_(ev) {
    const auto& sym = hessian_symbols(grid);
    const std::size_t n = ev.c0.size();
    double c0 = 0.0, da = 0.0, db = 0.0, dcr = 0.0, dci = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c0 += ev.c0[i];
      da += ev.dmat[i].a;
      db += ev.dmat[i].b;
      dcr += ev.dmat[i].c.real();
      dci += ev.dmat[i].c.imag();
    }
    const double inv = 1.0 / static_cast<double>(n);
    c0 *= inv, da *= inv, db *= inv, dcr *= inv, dci *= inv;
    inverse_symbol_.resize(sym.a.size());
    for (std::size_t k = 0; k < sym.a.size(); ++k) {
      double p = c0 - da * sym.a[k];
      if (grid.n_complex == 2) p -= db * sym.b[k] + 2.0 * (dcr * sym.c_re[k] + dci * sym.c_im[k]);
      inverse_symbol_[k] = 1.0 / std::max(p, 1e-14 * c0);
    }
  }

  Vec apply(const Vec& d) const {
    const auto h = complex_hessian(ops_.forward(d), grid_);
    Vec out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      out[i] = ev_.c0[i] * d[i] - ev_.dmat[i].pair(h.at(i));
    }
    return out;
  }

  Vec precondition(const Vec& r) const {
    return to_vec(ops_.apply(ops_.forward(r), inverse_symbol_).values());
  }

 private:
  const TorusGrid& grid_;
  const SpectralOps& ops_;
  const Evaluation& ev_;
  Vec inverse_symbol_;
};

/// Right-preconditioned BiCGSTAB from x = 0; returns the best iterate.
Vec bicgstab(const NewtonSystem& sys, const Vec& b, double rel_tol, int max_iter) {
  const std::size_t n = b.size();
  Vec x(n, 0.0), r = b, r_hat = b, p(n, 0.0), v(n, 0.0);
  const double target = rel_tol * norm2(b);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 0; it < max_iter && norm2(r) > target; ++it) {
    const double rho_new = dot(r_hat, r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    const Vec y = sys.precondition(p);
    v = sys.apply(y);
    const double rv = dot(r_hat, v);
    if (rv == 0.0) break;
    alpha = rho / rv;
    Vec s(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * y[i];
      s[i] = r[i] - alpha * v[i];
    }
    if (norm2(s) <= target) {
      r = std::move(s);
      break;
    }
    const Vec z = sys.precondition(s);
    const Vec t = sys.apply(z);
    const double tt = dot(t, t);
    if (tt == 0.0) break;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    if (omega == 0.0) break;
  }
  return x;
}

ScalarField initial_guess(const PointwiseOperator& op, const ScalarField& prev, double dt,
                          const ScalarField& f_next, const FlowParams& params,
                          const ScalarField* before, double dt_before) {
  ScalarField guess(prev.grid());
  switch (params.initial_guess) {
    case InitialGuess::unit_rate: return prev - dt;
    case InitialGuess::extrapolate:
      if (before != nullptr && dt_before > 0.0) {
        guess = prev + (dt / dt_before) * (prev - *before);
        if (evaluate(op, prev, guess, dt, f_next, params.admissibility_floor, false).admissible) {
          return guess;
        }
      }
      [[fallthrough]];
    case InitialGuess::predictor: break;
  }
  const auto h = complex_hessian(prev);
  double max_rate = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double r = op.rate_for(h.at(i).plus_identity(), std::exp(f_next[i]));
    guess[i] = prev[i] - dt * r;
    max_rate = std::max(max_rate, r);
  }
  if (evaluate(op, prev, guess, dt, f_next, params.admissibility_floor, false).admissible) {
    return guess;
  }
  return prev - dt * (max_rate > 0.0 ? max_rate : 1.0);
}

std::string at_time(const char* what, double t) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (at t = " << t << ")";
  return os.str();
}

}  // namespace

ScalarField residual(const PointwiseOperator& op, const ScalarField& prev, const ScalarField& next,
                     double dt, const ScalarField& f_next) {
  if (!(prev.grid() == next.grid()) || !(prev.grid() == f_next.grid())) {
    throw InvalidArgument("residual: fields live on different grids");
  }
  if (!(dt > 0.0)) throw InvalidArgument("residual: dt must be positive");
  const auto h = complex_hessian(next);
  ScalarField out(next.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = op.value((prev[i] - next[i]) / dt, h.at(i).plus_identity()) - std::exp(f_next[i]);
  }
  return out;
}

ScalarField step(const PointwiseOperator& op, const ScalarField& prev, double dt,
                 const ScalarField& f_next, const FlowParams& params, const ScalarField* before,
                 double dt_before) {
  if (!(prev.grid() == f_next.grid())) throw InvalidArgument("step: grid mismatch");
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  if (!prev.all_finite() || !f_next.all_finite()) throw InvalidArgument("step: non-finite input");
  if (!admissible_data(op, prev, params.admissibility_floor)) {
    throw AdmissibilityLost("step: previous level violates the eigenvalue floor");
  }
  const double floor = params.admissibility_floor;
  ScalarField next = initial_guess(op, prev, dt, f_next, params, before, dt_before);
  Evaluation ev = evaluate(op, prev, next, dt, f_next, floor, true);

  for (int iter = 0;; ++iter) {
    const double res_sup = sup_norm(ev.residual);
    if (ev.admissible && res_sup <= params.newton_tol) return next;
    if (iter >= params.newton_max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << params.newton_max_iter
         << " iterations (residual " << res_sup << ")";
      throw NewtonDiverged(os.str());
    }
    if (!ev.admissible) throw AdmissibilityLost("step: iterate left the admissible set");

    const NewtonSystem sys(prev.grid(), ev);
    const double rel_tol = std::clamp(1e-2 * res_sup, 1e-12, 1e-3);
    const Vec delta = bicgstab(sys, ev.residual, rel_tol, 400);

    const double merit = norm2(ev.residual);
    double lambda = params.damping;
    bool any_admissible = false;
    bool accepted = false;
    for (int k = 0; k <= params.max_halvings; ++k, lambda *= 0.5) {
      ScalarField trial = next;
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += lambda * delta[i];
      Evaluation tr = evaluate(op, prev, trial, dt, f_next, floor, true);
      if (!tr.admissible) continue;
      any_admissible = true;
      const double m = norm2(tr.residual);
      if (m <= (1.0 - 1e-4 * lambda) * merit || sup_norm(tr.residual) <= params.newton_tol) {
        next = std::move(trial);
        ev = std::move(tr);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_admissible) {
        throw AdmissibilityLost("step: every damped Newton step crossed the eigenvalue floor");
      }
      std::ostringstream os;
      os << "line search failed to reduce the residual (" << res_sup << ")";
      throw NewtonDiverged(os.str());
    }
  }
}

bool admissible_data(const PointwiseOperator& op, const ScalarField& phi, double floor) {
  const auto h = complex_hessian(phi);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!op.admissible(1.0, h.at(i).plus_identity(), floor)) return false;
  }
  return true;
}

std::vector<double> step_times(const FlowParams& params) {
  params.validate();
  const int K = params.step_count();
  std::vector<double> times(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k < K; ++k) times[k] = k * params.dt;
  times[K] = params.T;
  return times;
}

Trajectory march(const PointwiseOperator& op, const ScalarField& phi0,
                 const std::vector<double>& times, double nominal_dt,
                 const std::function<ScalarField(std::size_t)>& log_density,
                 const FlowParams& params) {
  if (times.empty()) throw InvalidArgument("march: no times");
  if (!admissible_data(op, phi0, params.admissibility_floor)) {
    throw AdmissibilityLost("initial data violates the eigenvalue floor");
  }
  Trajectory traj(phi0.grid(), nominal_dt);
  traj.push_back(times[0], phi0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double t = times[k];
    const double dt = t - times[k - 1];
    const ScalarField* before = k >= 2 ? &traj[k - 2] : nullptr;
    const double dt_before = k >= 2 ? times[k - 1] - times[k - 2] : 0.0;
    try {
      auto next = step(op, traj[k - 1], dt, log_density(k), params, before, dt_before);
      traj.push_back(t, std::move(next));
    } catch (const NewtonDiverged& e) {
      throw NewtonDiverged(at_time(e.what(), t));
    } catch (const AdmissibilityLost& e) {
      throw AdmissibilityLost(at_time(e.what(), t));
    } catch (const ConeViolation& e) {
      throw ConeViolation(at_time(e.what(), t));
    }
  }
  return traj;
}

}  // namespace pmaflow::detail
