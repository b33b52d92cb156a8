#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zklab/banded.hpp"
#include "zklab/errors.hpp"
#include "zklab/radial_grid.hpp"

namespace zklab {

struct SolverConfig {
  double rmax = 50.0;
  std::size_t n = 4096;
  double newton_tol = 1e-10;
  int newton_max_iters = 60;
  double abs_tol = 1e-8;
  double rel_tol = 1e-10;
  int stencil_order = 4;

  void validate() const {
    if (!(rmax >= 20.0)) fail(ErrorKind::ConfigError, "rmax must be at least 20");
    if (n < RadialGrid::kMinNodes) fail(ErrorKind::ConfigError, "n must be at least 64");
    if (!(newton_tol > 0.0)) fail(ErrorKind::ConfigError, "newton_tol must be positive");
    if (newton_max_iters < 1) fail(ErrorKind::ConfigError, "newton_max_iters must be positive");
    if (stencil_order != 4 && stencil_order != 6) fail(ErrorKind::ConfigError, "stencil_order must be 4 or 6");
  }
};

struct GroundState {
  int d = 2;
  double p = 2.0;
  double c = 1.0;
  RadialProfile profile;
  double ode_residual_norm = 0.0;
  double tail_rate = 1.0;
  int newton_iterations = 0;
  int stencil_order = 4;

  /// Q_c(r) for any r >= 0. Beyond rmax the fitted tail
  /// Q(rmax) (r/rmax)^{-(d-1)/2} exp(-tail_rate (r - rmax)) is used.
  double value_at(double r) const {
    const double rmax = profile.grid.rmax();
    if (r <= rmax) return profile.eval(r);
    const double qend = profile.values.back();
    return qend * std::pow(r / rmax, -0.5 * (d - 1)) * std::exp(-tail_rate * (r - rmax));
  }

  double deriv_at(double r) const {
    const double rmax = profile.grid.rmax();
    if (r <= rmax) return profile.eval_deriv(r);
    return value_at(r) * (-0.5 * (d - 1) / r - tail_rate);
  }
};

/// Sign-preserving power |q|^{p-1} q, equal to q^p for q >= 0.
inline double signed_pow(double q, double p) {
  return std::pow(std::abs(q), p - 1.0) * q;
}

/// Closed-form one-dimensional ground state
/// ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) r / 2).
inline double ground_state_1d(double r, double p) {
  const double amp = std::pow(0.5 * (p + 1.0), 1.0 / (p - 1.0));
  return amp * std::pow(1.0 / std::cosh(0.5 * (p - 1.0) * r), 2.0 / (p - 1.0));
}

inline double ground_state_1d_deriv(double r, double p) {
  const double x = 0.5 * (p - 1.0) * r;
  return -ground_state_1d(r, p) * std::tanh(x);
}

namespace detail {

inline void check_dimension_power(int d, double p) {
  if (d < 1 || d > 3) fail(ErrorKind::ConfigError, "dimension must be 1, 2 or 3");
  if (!(p > 1.0) || !std::isfinite(p)) fail(ErrorKind::ConfigError, "power p must exceed 1");
  if (d == 3 && !(p < 5.0)) fail(ErrorKind::ConfigError, "d = 3 requires p < 5");
}

inline double robin_coefficient_q(int d, double rmax) {
  return (d - 1 + 2.0 * rmax) / (2.0 * rmax);
}

/// Residual of the discrete ground-state system.
inline std::vector<double> ground_state_residual(const RadialStencil& st, const RadialGrid& grid,
                                                 std::span<const double> q, double p, double c) {
  const std::size_t n = q.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    f[i] = st.laplacian(i).apply(q) + c * q[i] - signed_pow(q[i], p);
  }
  f[n - 1] = st.d1(n - 1).apply(q) + robin_coefficient_q(st.dimension(), grid.rmax()) * q[n - 1];
  return f;
}

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Assembles -Delta_r + shift - potential with a Robin closing row
/// u'(rmax) + robin * u(rmax) = 0.
inline BandedMatrix assemble_operator(const RadialStencil& st, std::span<const double> diag_shift,
                                      double robin) {
  const std::size_t n = st.size();
  BandedMatrix a(n, st.lower_band(), st.upper_band());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& row = st.laplacian(i);
    for (std::size_t k = 0; k < row.count; ++k) a.add(i, row.first + k, row.w[k]);
    a.add(i, i, diag_shift[i]);
  }
  const auto& last = st.d1(n - 1);
  for (std::size_t k = 0; k < last.count; ++k) a.add(n - 1, last.first + k, last.w[k]);
  a.add(n - 1, n - 1, robin);
  return a;
}

/// Least-squares slope of log(|v| r^{power}) over the last quarter of the grid;
/// returns the decay rate (minus the slope).
inline double fit_tail_rate(const RadialGrid& grid, std::span<const double> v, double power) {
  const std::size_t n = grid.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = n - n / 4; i < n; ++i) {
    const double a = std::abs(v[i]);
    if (!(a > 0.0) || !std::isfinite(a)) continue;
    const double x = grid[i];
    const double y = std::log(a) + power * std::log(x);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double md = static_cast<double>(m);
  const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
  return -slope;
}

struct NewtonOutcome {
  std::vector<double> q;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton (up to 8 step halvings per iteration) on the discrete
/// ground-state system starting from `q`.
inline NewtonOutcome ground_state_newton(const RadialStencil& st, const RadialGrid& grid, double p,
                                         std::vector<double> q, const SolverConfig& config) {
  const std::size_t n = grid.size();
  const double initial_peak = sup_norm(q);
  const double robin = robin_coefficient_q(st.dimension(), grid.rmax());
  auto f = ground_state_residual(st, grid, q, p, 1.0);
  double fnorm = sup_norm(f);
  int iter = 0;
  while (fnorm > config.newton_tol) {
    if (iter >= config.newton_max_iters) {
      fail(ErrorKind::NonConvergence, "ground state Newton did not converge (p=" + std::to_string(p) +
                                          ", residual " + std::to_string(fnorm) + ")");
    }
    ++iter;
    std::vector<double> shift(n);
    for (std::size_t i = 0; i < n; ++i) shift[i] = 1.0 - p * std::pow(std::abs(q[i]), p - 1.0);
    BandedLU lu(assemble_operator(st, shift, robin));
    for (double& v : f) v = -v;
    const auto delta = lu.solve(f);

    double step = 1.0;
    std::vector<double> trial(n);
    std::vector<double> ftrial;
    double tnorm = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = q[i] + step * delta[i];
      ftrial = ground_state_residual(st, grid, trial, p, 1.0);
      tnorm = sup_norm(ftrial);
      if (tnorm < fnorm || tnorm <= config.newton_tol) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted && !(tnorm <= 10.0 * fnorm)) {
      fail(ErrorKind::NonConvergence, "ground state Newton line search failed (p=" + std::to_string(p) + ")");
    }
    q.swap(trial);
    f.swap(ftrial);
    fnorm = tnorm;
    if (sup_norm(q) < 1e-6 * initial_peak) {
      fail(ErrorKind::TrivialCollapse, "Newton iterates collapsed to the zero solution");
    }
  }
  return {std::move(q), fnorm, iter};
}

inline void check_ground_state_shape(const RadialGrid& grid, std::span<const double> q) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0) || (i > 0 && !(q[i] < q[i - 1]))) {
      fail(ErrorKind::NonConvergence,
           "converged profile is not a positive decreasing ground state at r=" + std::to_string(grid[i]));
    }
  }
}

}  // namespace detail

/// Solves -Q'' - (d-1)/r Q' + Q - Q^p = 0 with Q'(0) = 0 and the Robin
/// condition Q'(rmax) + (d-1+2 rmax)/(2 rmax) Q(rmax) = 0 by damped Newton.
/// The initial iterate is the d = 1 closed form stretched by 1.25 in r with
/// its amplitude scaled by 1 + 0.6 (d-1). If that start fails, the solve is
/// continued in p from p = 2 (unstretched start) in steps of at most 0.1.
inline GroundState solve_ground_state(int d, double p, const SolverConfig& config) {
  detail::check_dimension_power(d, p);
  config.validate();
  RadialGrid grid(config.rmax, config.n);
  RadialStencil st(grid, d, config.stencil_order);
  const std::size_t n = grid.size();

  auto initial_guess = [&](double power, double stretch) {
    const double amp_scale = 1.0 + 0.6 * (d - 1);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = amp_scale * ground_state_1d(grid[i] / stretch, power);
    return q;
  };

  detail::NewtonOutcome result;
  try {
    result = detail::ground_state_newton(st, grid, p, initial_guess(p, 1.25), config);
    detail::check_ground_state_shape(grid, result.q);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonConvergence && e.kind() != ErrorKind::SingularSystem) throw;
    const double start = 2.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(p - start) / 0.1)));
    auto outcome = detail::ground_state_newton(st, grid, start, initial_guess(start, 1.0), config);
    int total = outcome.iterations;
    for (int k = 1; k <= steps; ++k) {
      const double pk = start + (p - start) * static_cast<double>(k) / steps;
      outcome = detail::ground_state_newton(st, grid, pk, std::move(outcome.q), config);
      total += outcome.iterations;
    }
    outcome.iterations = total;
    result = std::move(outcome);
    detail::check_ground_state_shape(grid, result.q);
  }

  GroundState gs;
  gs.d = d;
  gs.p = p;
  gs.c = 1.0;
  gs.profile.derivs = st.derivative(result.q);
  gs.profile.values = std::move(result.q);
  gs.profile.grid = grid;
  gs.ode_residual_norm = result.residual;
  gs.tail_rate = detail::fit_tail_rate(grid, gs.profile.values, 0.5 * (d - 1));
  gs.newton_iterations = result.iterations;
  gs.stencil_order = config.stencil_order;
  return gs;
}

/// Q''(r) recovered from the ground-state ODE (regular limit at r = 0).
inline double ground_state_second_deriv(const GroundState& q, std::size_t i) {
  const double r = q.profile.grid[i];
  const double v = q.profile.values[i];
  const double rhs = q.c * v - signed_pow(v, q.p);
  if (i == 0) return rhs / q.d;
  return rhs - (q.d - 1) / r * q.profile.derivs[i];
}

/// Lambda Q = Q/(p-1) + r Q'/2 on the ground state's grid.
inline RadialProfile lambda_q(const GroundState& q) {
  const auto& g = q.profile.grid;
  const std::size_t n = g.size();
  RadialProfile out{g, std::vector<double>(n), std::vector<double>(n)};
  const double a = 1.0 / (q.p - 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g[i];
    const double v = q.profile.values[i];
    const double dv = q.profile.derivs[i];
    out.values[i] = a * v + 0.5 * r * dv;
    out.derivs[i] = (a + 0.5) * dv + 0.5 * r * ground_state_second_deriv(q, i);
  }
  return out;
}

/// Q_c(r) = c^{1/(p-1)} Q(sqrt(c) r), sampled on the same grid by cubic
/// Hermite interpolation, with the fitted tail past rmax.
inline GroundState rescale_profile(const GroundState& q, double c) {
  if (!(c > 0.0)) fail(ErrorKind::ConfigError, "speed c must be positive");
  if (c == 1.0 && q.c == 1.0) return q;
  const double amp = std::pow(c, 1.0 / (q.p - 1.0));
  const double s = std::sqrt(c);
  GroundState out = q;
  out.c = c * q.c;
  const auto& g = q.profile.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.profile.values[i] = amp * q.value_at(s * g[i]);
    out.profile.derivs[i] = amp * s * q.deriv_at(s * g[i]);
  }
  out.tail_rate = q.tail_rate * s;
  return out;
}

}  // namespace zklab
