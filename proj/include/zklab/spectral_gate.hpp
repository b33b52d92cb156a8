#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "zklab/banded.hpp"
#include "zklab/errors.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/radial_grid.hpp"

namespace zklab {

/// W solving L W = Lambda Q with the W Robin row.
struct LinearizedSolve {
  GroundState ground;
  RadialProfile w;
  double lin_residual_norm = 0.0;
  double tail_rate = 0.0;
};

struct SolverMeta {
  int newton_iterations = 0;
  double ode_residual = 0.0;
  double lin_residual = 0.0;
  double eig_residual = 0.0;
};

/// One (d, p) evaluation of nu = int (Lambda Q) W r^{d-1} dr.
/// The sphere-area constant C_d is not included.
struct SpectralScanRecord {
  int d = 0;
  double p = 0.0;
  double nu = 0.0;
  int neg_eigs = 0;
  double lambda0 = 0.0;
  double rmax = 0.0;
  std::size_t n = 0;
  SolverMeta solver_meta;
};

struct NegativeEigenResult {
  int count = 0;
  double lambda0 = 0.0;
  RadialProfile chi0;
  double residual = 0.0;
};

namespace detail {

inline double robin_coefficient_w(int d, double rmax) {
  return (d - 5 + 2.0 * rmax) / (2.0 * rmax);
}

inline std::vector<double> linearized_shift(const GroundState& q) {
  std::vector<double> shift(q.profile.size());
  for (std::size_t i = 0; i < shift.size(); ++i) {
    shift[i] = q.c - q.p * std::pow(std::abs(q.profile.values[i]), q.p - 1.0);
  }
  return shift;
}

}  // namespace detail

/// Applies the finite-difference discretization of L = -Delta + c - p Q^{p-1}
/// (radial part) on rows 0..n-2. The last entry is left at zero.
inline std::vector<double> apply_linearized(const GroundState& q, std::span<const double> v) {
  RadialStencil st(q.profile.grid, q.d, q.stencil_order);
  const auto shift = detail::linearized_shift(q);
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = st.laplacian(i).apply(v) + shift[i] * v[i];
  return out;
}

inline LinearizedSolve solve_w(const GroundState& q, const SolverConfig& config) {
  config.validate();
  const auto& grid = q.profile.grid;
  const std::size_t n = grid.size();
  RadialStencil st(grid, q.d, q.stencil_order);
  const auto shift = detail::linearized_shift(q);
  const double robin = detail::robin_coefficient_w(q.d, grid.rmax());
  BandedMatrix a = detail::assemble_operator(st, shift, robin);
  const auto lq = lambda_q(q);
  std::vector<double> rhs = lq.values;
  rhs[n - 1] = 0.0;
  BandedLU lu(a);
  auto w = lu.solve(rhs);

  const auto aw = a.multiply(w);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(aw[i] - rhs[i]));
  if (!std::isfinite(res)) fail(ErrorKind::SingularSystem, "linearized solve produced non-finite values");

  LinearizedSolve out;
  out.ground = q;
  out.w.grid = grid;
  out.w.derivs = st.derivative(w);
  out.w.values = std::move(w);
  out.lin_residual_norm = res;
  out.tail_rate = detail::fit_tail_rate(grid, out.w.values, -0.5 * (5 - q.d));
  return out;
}

/// Symmetric second-order finite-volume discretization of the radial L with
/// the Q Robin closure, in the B^{-1/2} A B^{-1/2} form (B = cell volumes).
/// Its inertia counts the negative eigenvalues of the radial operator.
struct RadialEigenProblem {
  SymTridiagonal t;
  std::vector<double> volume;
};

inline RadialEigenProblem radial_eigen_problem(const GroundState& q) {
  const auto& g = q.profile.grid;
  const std::size_t n = g.size();
  const double h = g.h();
  const int d = q.d;
  auto rpow = [d](double r) { return std::pow(r, d - 1); };
  auto cell_volume = [d](double a, double b) { return (std::pow(b, d) - std::pow(a, d)) / d; };

  std::vector<double> vol(n), diag(n, 0.0), off(n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i == 0 ? 0.0 : g[i] - 0.5 * h;
    const double b = i + 1 == n ? g[i] : g[i] + 0.5 * h;
    vol[i] = cell_volume(a, b);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double s = rpow(g[i] + 0.5 * h) / h;
    diag[i] += s;
    diag[i + 1] += s;
    off[i] = -s;
  }
  diag[n - 1] += rpow(g[n - 1]) * detail::robin_coefficient_q(d, g.rmax());
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] += (q.c - q.p * std::pow(q.profile.values[i], q.p - 1.0)) * vol[i];
  }
  RadialEigenProblem out;
  out.t.diag.resize(n);
  out.t.off.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) out.t.diag[i] = diag[i] / vol[i];
  for (std::size_t i = 0; i + 1 < n; ++i) out.t.off[i] = off[i] / std::sqrt(vol[i] * vol[i + 1]);
  out.volume = std::move(vol);
  return out;
}

/// Counts negative eigenvalues of the radial L by inertia and returns the
/// lowest eigenpair (bisection on the Sturm count, then inverse iteration).
/// chi0 is normalized to unit weighted L2 norm and positive at r = 0.
inline NegativeEigenResult negative_eig_count(const GroundState& q) {
  const auto prob = radial_eigen_problem(q);
  const auto& t = prob.t;
  const std::size_t n = t.size();
  NegativeEigenResult out;
  out.count = static_cast<int>(t.count_below(0.0));

  auto [lo, hi] = t.gershgorin();
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (t.count_below(mid) >= 1) hi = mid; else lo = mid;
  }
  double lambda = 0.5 * (lo + hi);

  std::vector<double> y(n, 1.0);
  double res = 0.0;
  auto normalize = [&](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
  };
  normalize(y);
  const double shift = lambda - 1e-9 * std::max(1.0, std::abs(lambda));
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    auto z = t.solve_shifted(shift, y);
    normalize(z);
    y.swap(z);
    const auto ty = t.multiply(y);
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += y[i] * ty[i];
    lambda = rq;
    res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(ty[i] - rq * y[i]));
    if (res <= 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(lambda)) fail(ErrorKind::EigFailure, "inverse iteration stagnated");

  RadialProfile chi{q.profile.grid, std::vector<double>(n), std::vector<double>(n)};
  const double sign = y[0] >= 0.0 ? 1.0 : -1.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    chi.values[i] = sign * y[i] / std::sqrt(prob.volume[i]);
    norm2 += prob.volume[i] * chi.values[i] * chi.values[i];
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (double& v : chi.values) v *= scale;
  RadialStencil st(q.profile.grid, q.d, q.stencil_order);
  chi.derivs = st.derivative(chi.values);
  out.lambda0 = lambda;
  out.chi0 = std::move(chi);
  out.residual = res;
  return out;
}

/// Sup-norm of L(Lambda Q) + Q over rows 0..n-2 of the stencil.
inline double lambda_q_identity_residual(const GroundState& q) {
  const auto lq = lambda_q(q);
  const auto llq = apply_linearized(q, lq.values);
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < llq.size(); ++i) m = std::max(m, std::abs(llq[i] + q.profile.values[i]));
  return m;
}

inline SpectralScanRecord nu_value(int d, double p, const SolverConfig& config) {
  const auto q = solve_ground_state(d, p, config);
  const auto sol = solve_w(q, config);
  const auto lq = lambda_q(q);
  std::vector<double> integrand(lq.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = lq.values[i] * sol.w.values[i];
  SpectralScanRecord rec;
  rec.d = d;
  rec.p = p;
  rec.nu = radial_quadrature(q.profile.grid, integrand, d - 1);
  const auto eig = negative_eig_count(q);
  rec.neg_eigs = eig.count;
  rec.lambda0 = eig.lambda0;
  rec.rmax = config.rmax;
  rec.n = config.n;
  rec.solver_meta.newton_iterations = q.newton_iterations;
  rec.solver_meta.ode_residual = q.ode_residual_norm;
  rec.solver_meta.lin_residual = sol.lin_residual_norm;
  rec.solver_meta.eig_residual = eig.residual;
  return rec;
}

/// The running integral nu(r) = int_0^r (Lambda Q) W s^{d-1} ds.
inline std::vector<double> nu_profile(const LinearizedSolve& sol) {
  const auto lq = lambda_q(sol.ground);
  std::vector<double> integrand(lq.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = lq.values[i] * sol.w.values[i];
  return cumulative_integral(sol.ground.profile.grid, integrand, sol.ground.d - 1);
}

/// Bisection on p -> nu(d, p) down to bracket width `tol`; returns the midpoint.
/// A SingularSystem during an evaluation is retried once at p +/- 1e-6.
inline double find_crossing(int d, double p_lo, double p_hi, double tol, const SolverConfig& config) {
  if (!(tol > 0.0) || !(p_hi > p_lo)) fail(ErrorKind::ConfigError, "invalid bisection bracket");
  auto eval = [&](double p) {
    try {
      return nu_value(d, p, config).nu;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularSystem) throw;
    }
    try {
      return nu_value(d, p + 1e-6, config).nu;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularSystem) throw;
    }
    return nu_value(d, p - 1e-6, config).nu;
  };
  double f_lo = eval(p_lo);
  const double f_hi = eval(p_hi);
  if (!(f_lo * f_hi < 0.0)) {
    fail(ErrorKind::BadBracket, "nu has the same sign at both ends of the bracket");
  }
  while (p_hi - p_lo > tol) {
    const double mid = 0.5 * (p_lo + p_hi);
    const double f_mid = eval(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      p_lo = mid;
      f_lo = f_mid;
    } else {
      p_hi = mid;
    }
  }
  return 0.5 * (p_lo + p_hi);
}

}  // namespace zklab
