#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zklab/errors.hpp"
#include "zklab/field2d.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/zk_evolver.hpp"

namespace zklab {

struct ModulationState {
  double t = 0.0;
  double c = 1.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::array<double, 3> ortho_residuals{};
  double eta_h1 = 0.0;
  int iterations = 0;
};

/// Q_c(x - rho) and its gradient sampled on a box (minimum-image wrapping).
struct SolitonSample {
  Field2D value, d1, d2;
};

inline SolitonSample sample_soliton(const Box2D& box, const GroundState& q, double c, double rho1,
                                    double rho2) {
  const double e = 1.0 / (q.p - 1.0);
  const double amp = std::pow(c / q.c, e);
  const double s = std::sqrt(c / q.c);
  SolitonSample out{Field2D(box), Field2D(box), Field2D(box)};
  for (std::size_t i = 0; i < box.n1; ++i) {
    const double y1 = wrap_centered(box.x1(i) - rho1, box.L1);
    for (std::size_t j = 0; j < box.n2; ++j) {
      const double y2 = wrap_centered(box.x2(j) - rho2, box.L2);
      const double r = std::hypot(y1, y2);
      out.value(i, j) = amp * q.value_at(s * r);
      if (r > 0.0) {
        const double dr = amp * s * q.deriv_at(s * r) / r;
        out.d1(i, j) = dr * y1;
        out.d2(i, j) = dr * y2;
      }
    }
  }
  return out;
}

struct ModulationOptions {
  int max_iters = 50;
  double fd_step = 1e-6;
};

/// Fits (c, rho1, rho2) so that eta = u(. + rho) - Q_c is orthogonal to
/// d_1 Q_c, d_2 Q_c and Q_c. Translations of u are spectral; the Jacobian is
/// a central finite difference.
inline ModulationState fit_modulation(const Field2D& u, const GroundState& q, const ModulationState& guess,
                                      double tol, const ModulationOptions& opt = {}) {
  if (!(tol > 0.0)) fail(ErrorKind::ConfigError, "fit tolerance must be positive");
  if (!(guess.c > 0.0) || !std::isfinite(guess.rho1) || !std::isfinite(guess.rho2)) {
    fail(ErrorKind::FitDiverged, "modulation guess is not finite");
  }
  const Box2D& box = u.box;
  Spectral2D fft(box);
  const Spectrum uhat = fft.forward(u.values);

  auto shifted = [&](double a1, double a2) {
    Spectrum s = uhat;
    fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) { s[idx] *= fft.shift_factor(i, j, a1, a2); });
    return Field2D(box, fft.inverse(s));
  };
  auto residual = [&](const Eigen::Vector3d& x, Field2D* eta_out) {
    if (!(x[0] > 0.0)) fail(ErrorKind::FitDiverged, "fitted speed became non-positive");
    const Field2D us = shifted(x[1], x[2]);
    const auto sol = sample_soliton(box, q, x[0], 0.0, 0.0);
    Field2D eta(box);
    for (std::size_t k = 0; k < eta.values.size(); ++k) eta.values[k] = us.values[k] - sol.value.values[k];
    Eigen::Vector3d f(inner(eta, sol.d1), inner(eta, sol.d2), inner(eta, sol.value));
    if (eta_out) *eta_out = std::move(eta);
    return f;
  };

  Eigen::Vector3d x(guess.c, guess.rho1, guess.rho2);
  Eigen::Vector3d f = residual(x, nullptr);
  int it = 0;
  while (f.cwiseAbs().maxCoeff() > tol) {
    if (++it > opt.max_iters) fail(ErrorKind::FitDiverged, "modulation Newton did not converge");
    Eigen::Matrix3d jac;
    for (int k = 0; k < 3; ++k) {
      const double h = opt.fd_step * (k == 0 ? x[0] : 1.0);
      Eigen::Vector3d xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      jac.col(k) = (residual(xp, nullptr) - residual(xm, nullptr)) / (2.0 * h);
    }
    Eigen::Vector3d dx = jac.fullPivLu().solve(-f);
    if (!dx.allFinite()) fail(ErrorKind::FitDiverged, "singular modulation Jacobian");
    // Keep c positive.
    double step = 1.0;
    while (x[0] + step * dx[0] <= 0.5 * x[0]) step *= 0.5;
    x += step * dx;
    f = residual(x, nullptr);
    if (!f.allFinite()) fail(ErrorKind::FitDiverged, "modulation residual is not finite");
  }
  if (!(x[0] > 0.5 * guess.c && x[0] < 1.5 * guess.c)) {
    fail(ErrorKind::FitDiverged, "fitted speed left the 50% window around the guess");
  }
  Field2D eta;
  f = residual(x, &eta);
  ModulationState out;
  out.t = guess.t;
  out.c = x[0];
  out.rho1 = x[1];
  out.rho2 = x[2];
  out.ortho_residuals = {f[0], f[1], f[2]};
  out.eta_h1 = h1_norm(fft, eta);
  out.iterations = it;
  return out;
}

struct SolitonParams {
  double c = 1.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
};

struct MultiModulationState {
  double t = 0.0;
  std::vector<SolitonParams> solitons;
  std::vector<double> ortho_residuals;
  double eta_h1 = 0.0;
  int iterations = 0;
};

/// u - sum_j Q_{c_j}(. - rho_j).
inline Field2D multi_soliton_residual(const Field2D& u, const GroundState& q,
                                      const std::vector<SolitonParams>& sol) {
  Field2D eta = u;
  for (const auto& s : sol) {
    const auto smp = sample_soliton(u.box, q, s.c, s.rho1, s.rho2);
    for (std::size_t k = 0; k < eta.values.size(); ++k) eta.values[k] -= smp.value.values[k];
  }
  return eta;
}

/// Multi-soliton version of fit_modulation: three orthogonality conditions per
/// soliton against its own translated profile, profiles sampled directly.
inline MultiModulationState fit_multi_modulation(const Field2D& u, const GroundState& q,
                                                 const MultiModulationState& guess, double tol,
                                                 const ModulationOptions& opt = {}) {
  const std::size_t ns = guess.solitons.size();
  if (ns == 0) fail(ErrorKind::ConfigError, "need at least one soliton");
  const std::size_t m = 3 * ns;
  auto unpack = [&](const Eigen::VectorXd& x) {
    std::vector<SolitonParams> s(ns);
    for (std::size_t j = 0; j < ns; ++j) s[j] = {x[3 * j], x[3 * j + 1], x[3 * j + 2]};
    return s;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    const auto sol = unpack(x);
    for (const auto& s : sol) {
      if (!(s.c > 0.0)) fail(ErrorKind::FitDiverged, "fitted speed became non-positive");
    }
    const Field2D eta = multi_soliton_residual(u, q, sol);
    Eigen::VectorXd f(m);
    for (std::size_t j = 0; j < ns; ++j) {
      const auto smp = sample_soliton(u.box, q, sol[j].c, sol[j].rho1, sol[j].rho2);
      f[3 * j] = inner(eta, smp.d1);
      f[3 * j + 1] = inner(eta, smp.d2);
      f[3 * j + 2] = inner(eta, smp.value);
    }
    return f;
  };
  Eigen::VectorXd x(m);
  for (std::size_t j = 0; j < ns; ++j) {
    x[3 * j] = guess.solitons[j].c;
    x[3 * j + 1] = guess.solitons[j].rho1;
    x[3 * j + 2] = guess.solitons[j].rho2;
  }
  Eigen::VectorXd f = residual(x);
  int it = 0;
  while (f.cwiseAbs().maxCoeff() > tol) {
    if (++it > opt.max_iters) fail(ErrorKind::FitDiverged, "multi-soliton modulation did not converge");
    Eigen::MatrixXd jac(m, m);
    for (std::size_t k = 0; k < m; ++k) {
      const double h = opt.fd_step * (k % 3 == 0 ? x[k] : 1.0);
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      jac.col(k) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    Eigen::VectorXd dx = jac.fullPivLu().solve(-f);
    if (!dx.allFinite()) fail(ErrorKind::FitDiverged, "singular modulation Jacobian");
    x += dx;
    f = residual(x);
    if (!f.allFinite()) fail(ErrorKind::FitDiverged, "modulation residual is not finite");
  }
  MultiModulationState out;
  out.t = guess.t;
  out.solitons = unpack(x);
  for (std::size_t j = 0; j < ns; ++j) {
    const double c0 = guess.solitons[j].c;
    if (!(out.solitons[j].c > 0.5 * c0 && out.solitons[j].c < 1.5 * c0)) {
      fail(ErrorKind::FitDiverged, "fitted speed left the 50% window around the guess");
    }
  }
  out.ortho_residuals.assign(f.data(), f.data() + m);
  Spectral2D fft(u.box);
  out.eta_h1 = h1_norm(fft, multi_soliton_residual(u, q, out.solitons));
  out.iterations = it;
  return out;
}

}  // namespace zklab
