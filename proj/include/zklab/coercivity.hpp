#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zklab/errors.hpp"
#include "zklab/field2d.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/modulation.hpp"
#include "zklab/weights.hpp"
#include "zklab/zk_evolver.hpp"

namespace zklab {

enum class Projection {
  None,
  Translations,  // d_1 Q, d_2 Q
  Full,          // Lambda Q, d_1 Q, d_2 Q
};

struct CoercivityOptions {
  Projection projection = Projection::Full;
  double hermite_scale = 1.0;
  double A0 = 1.0;
  double rank_tol = 1e-10;
};

struct CoercivityResult {
  double min_quotient = 0.0;
  int basis_size = 0;
  int constrained_dim = 0;
};

/// Background fields for H_A on a box, with Q centred in the box.
struct CoercivityBackground {
  Box2D box;
  std::vector<double> weight;     // phi(x1 / A)
  std::vector<double> potential;  // p Q^{p-1}
  Field2D q, lambda_q, dq1, dq2;
  double centre1 = 0.0, centre2 = 0.0;
};

inline CoercivityBackground coercivity_background(const GroundState& q, double A, const Box2D& box) {
  if (q.d != 2) fail(ErrorKind::ConfigError, "coercivity needs a d = 2 ground state");
  CoercivityBackground bg;
  bg.box = box;
  bg.centre1 = 0.5 * box.L1;
  bg.centre2 = 0.5 * box.L2;
  const auto smp = sample_soliton(box, q, q.c, bg.centre1, bg.centre2);
  bg.q = smp.value;
  bg.dq1 = smp.d1;
  bg.dq2 = smp.d2;
  const auto lq = lambda_q(q);
  bg.lambda_q = sample_radial(box, bg.centre1, bg.centre2, [&](double r, double, double) {
    if (r >= q.profile.grid.rmax()) {
      return q.value_at(r) / (q.p - 1.0) + 0.5 * r * q.deriv_at(r);
    }
    return lq.eval(r);
  });
  bg.weight.resize(box.size());
  bg.potential.resize(box.size());
  for (std::size_t i = 0; i < box.n1; ++i) {
    const double w = phi((box.x1(i) - bg.centre1) / A);
    for (std::size_t j = 0; j < box.n2; ++j) {
      const std::size_t k = i * box.n2 + j;
      bg.weight[k] = w;
      bg.potential[k] = q.p * std::pow(std::abs(bg.q.values[k]), q.p - 1.0);
    }
  }
  return bg;
}

/// H_A(v, v) and N_A(v) = int phi_A (|grad v|^2 + v^2) for one field.
inline std::pair<double, double> coercivity_forms(const CoercivityBackground& bg, const Field2D& v) {
  Spectral2D fft(bg.box);
  const auto g1 = fft.d1(v);
  const auto g2 = fft.d2(v);
  double h = 0.0, n = 0.0;
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    const double grad = g1.values[k] * g1.values[k] + g2.values[k] * g2.values[k];
    const double v2 = v.values[k] * v.values[k];
    h += bg.weight[k] * (grad + v2 - bg.potential[k] * v2);
    n += bg.weight[k] * (grad + v2);
  }
  const double da = bg.box.cell_area();
  return {h * da, n * da};
}

inline double rayleigh_quotient(const CoercivityBackground& bg, const Field2D& v) {
  const auto [h, n] = coercivity_forms(bg, v);
  return h / n;
}

namespace detail {

/// Hermite functions h_0..h_n and their derivatives at x (unit scale).
inline void hermite_functions(double x, int n, std::vector<double>& h, std::vector<double>& dh) {
  h.assign(n + 2, 0.0);
  dh.assign(n + 1, 0.0);
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  h[1] = std::sqrt(2.0) * x * h[0];
  for (int k = 1; k <= n; ++k) {
    h[k + 1] = std::sqrt(2.0 / (k + 1)) * x * h[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * h[k - 1];
  }
  for (int k = 0; k <= n; ++k) {
    dh[k] = (k > 0 ? std::sqrt(k / 2.0) * h[k - 1] : 0.0) - std::sqrt((k + 1) / 2.0) * h[k + 1];
  }
}

/// Index pairs (a, b) ordered by total degree, then by a descending.
inline std::vector<std::pair<int, int>> hermite_order(int count) {
  std::vector<std::pair<int, int>> out;
  for (int deg = 0; static_cast<int>(out.size()) < count; ++deg) {
    for (int a = deg; a >= 0 && static_cast<int>(out.size()) < count; --a) out.emplace_back(a, deg - a);
  }
  return out;
}

}  // namespace detail

/// Minimum of H_A(v,v)/N_A(v) over the span of the first k_modes tensor
/// Hermite functions (ordered by total degree, centred on Q), restricted to
/// v orthogonal to the projected directions. Rayleigh-Ritz: the subspaces are
/// nested, so the result is non-increasing in k_modes.
inline CoercivityResult coercivity_min_rayleigh(const GroundState& q, double A, const Box2D& box, int k_modes,
                                                const CoercivityOptions& opt = {}) {
  box.validate();
  if (!(A >= opt.A0)) fail(ErrorKind::ConfigError, "A must be at least A0");
  if (k_modes < 1) fail(ErrorKind::ConfigError, "k_modes must be positive");
  const auto bg = coercivity_background(q, A, box);
  const auto order = detail::hermite_order(k_modes);
  int max_deg = 0;
  for (auto [a, b] : order) max_deg = std::max({max_deg, a, b});

  const double s = opt.hermite_scale;
  const std::size_t n1 = box.n1, n2 = box.n2;
  Eigen::MatrixXd h1(n1, max_deg + 1), d1(n1, max_deg + 1), h2(n2, max_deg + 1), d2(n2, max_deg + 1);
  std::vector<double> h, dh;
  const double norm = 1.0 / std::sqrt(s);
  for (std::size_t i = 0; i < n1; ++i) {
    detail::hermite_functions((box.x1(i) - bg.centre1) / s, max_deg, h, dh);
    for (int k = 0; k <= max_deg; ++k) {
      h1(i, k) = norm * h[k];
      d1(i, k) = norm * dh[k] / s;
    }
  }
  for (std::size_t j = 0; j < n2; ++j) {
    detail::hermite_functions((box.x2(j) - bg.centre2) / s, max_deg, h, dh);
    for (int k = 0; k <= max_deg; ++k) {
      h2(j, k) = norm * h[k];
      d2(j, k) = norm * dh[k] / s;
    }
  }

  const std::size_t npts = box.size();
  const int kb = k_modes;
  Eigen::MatrixXd B(npts, kb), Bx(npts, kb), By(npts, kb);
  for (int m = 0; m < kb; ++m) {
    const auto [a, b] = order[m];
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j) {
        const std::size_t k = i * n2 + j;
        B(k, m) = h1(i, a) * h2(j, b);
        Bx(k, m) = d1(i, a) * h2(j, b);
        By(k, m) = h1(i, a) * d2(j, b);
      }
    }
  }
  const double da = box.cell_area();
  Eigen::VectorXd w(npts), wv(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    w[k] = bg.weight[k] * da;
    wv[k] = bg.weight[k] * (1.0 - bg.potential[k]) * da;
  }
  const Eigen::MatrixXd grad = Bx.transpose() * w.asDiagonal() * Bx + By.transpose() * w.asDiagonal() * By;
  Eigen::MatrixXd H = grad + B.transpose() * wv.asDiagonal() * B;
  Eigen::MatrixXd N = grad + B.transpose() * w.asDiagonal() * B;

  std::vector<const Field2D*> dirs;
  if (opt.projection == Projection::Full) dirs.push_back(&bg.lambda_q);
  if (opt.projection != Projection::None) {
    dirs.push_back(&bg.dq1);
    dirs.push_back(&bg.dq2);
  }
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(kb, kb);
  if (!dirs.empty()) {
    Eigen::MatrixXd C(dirs.size(), kb);
    for (std::size_t r = 0; r < dirs.size(); ++r) {
      Eigen::Map<const Eigen::VectorXd> g(dirs[r]->values.data(), npts);
      C.row(r) = (B.transpose() * g).transpose() * da;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k) {
      if (sv[k] > opt.rank_tol * std::max(1.0, sv[0])) ++rank;
    }
    Z = svd.matrixV().rightCols(kb - rank);
  }
  CoercivityResult res;
  res.basis_size = kb;
  res.constrained_dim = static_cast<int>(Z.cols());
  if (Z.cols() == 0) fail(ErrorKind::EigFailure, "no admissible directions left after projection");
  const Eigen::MatrixXd Hr = Z.transpose() * H * Z;
  const Eigen::MatrixXd Nr = Z.transpose() * N * Z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (Hr + Hr.transpose()),
                                                                 0.5 * (Nr + Nr.transpose()));
  if (ges.info() != Eigen::Success) fail(ErrorKind::EigFailure, "generalized eigensolve failed");
  res.min_quotient = ges.eigenvalues().minCoeff();
  if (!std::isfinite(res.min_quotient)) fail(ErrorKind::EigFailure, "non-finite eigenvalue");
  return res;
}

}  // namespace zklab
