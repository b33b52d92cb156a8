#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "zklab/errors.hpp"
#include "zklab/field2d.hpp"
#include "zklab/modulation.hpp"
#include "zklab/weights.hpp"

namespace zklab {

struct MonotonicitySample {
  double t = 0.0;
  double value = 0.0;
  double y0 = 0.0;
  double t0 = 0.0;
  double theta = 0.0;
};

/// Reference frame of the weights: the modulation fitted at t0.
struct ProbeFrame {
  double t0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double c = 1.0;
  double y0 = 0.0;
  double M = 8.0;
};

inline ProbeFrame make_frame(const ModulationState& mods_t0, double t0, double y0, double M) {
  return {t0, mods_t0.rho1, mods_t0.rho2, mods_t0.c, y0, M};
}

namespace detail {

inline void check_frame(const ProbeFrame& f, double t) {
  if (!(f.M >= 4.0)) fail(ErrorKind::ConfigError, "monotonicity weights need M >= 4");
  if (!(f.y0 > 0.0)) fail(ErrorKind::ConfigError, "y0 must be positive");
  if (!(t <= f.t0)) fail(ErrorKind::ConfigError, "probe time must not exceed t0");
}

/// Weighted integral of `density` with psi_M evaluated at
/// x1 + tan_theta x2 - rho1(t0) + (t0 - t)/2 - y0. x1 is unwrapped around the
/// predicted centre rho1(t0) - c(t0)(t0 - t), x2 around rho2(t0).
template <class Density>
double weighted_integral(const Box2D& box, const ProbeFrame& f, double t, double tan_theta,
                         Density&& density) {
  const double lag = f.t0 - t;
  const double centre = f.rho1 - f.c * lag;
  double s = 0.0;
  for (std::size_t i = 0; i < box.n1; ++i) {
    const double rel1 = wrap_centered(box.x1(i) - centre, box.L1);
    const double base = rel1 - f.c * lag + 0.5 * lag - f.y0;
    for (std::size_t j = 0; j < box.n2; ++j) {
      const double rel2 = wrap_centered(box.x2(j) - f.rho2, box.L2);
      s += density(i * box.n2 + j) * psi(base + tan_theta * rel2, f.M);
    }
  }
  return s * box.cell_area();
}

inline double oblique_coefficient(double theta) {
  if (!(std::abs(theta) < std::numbers::pi / 3.0)) {
    fail(ErrorKind::AngleOutOfRange, "oblique monotonicity needs |theta| < pi/3");
  }
  return std::tan(theta);
}

}  // namespace detail

/// I(t) = int u^2 psi_M(x1 + tan(theta) x2 - rho1(t0) + (t0 - t)/2 - y0).
inline MonotonicitySample oblique_mass(const Field2D& u, const ProbeFrame& f, double t, double theta) {
  const double tan_theta = detail::oblique_coefficient(theta);
  detail::check_frame(f, t);
  const double v = detail::weighted_integral(u.box, f, t, tan_theta, [&](std::size_t k) {
    return u.values[k] * u.values[k];
  });
  return {t, v, f.y0, f.t0, theta};
}

inline MonotonicitySample localized_mass_I(const Field2D& u, const ProbeFrame& f, double t) {
  return oblique_mass(u, f, t, 0.0);
}

/// J(t) = int (|grad u|^2 - 2/(p+1) u^{p+1}) psi_M(x~1), gradients spectral.
inline MonotonicitySample localized_energy_J(const Spectral2D& fft, const Field2D& u, const ProbeFrame& f,
                                             double t, double p = 2.0) {
  detail::check_frame(f, t);
  const auto g1 = fft.d1(u);
  const auto g2 = fft.d2(u);
  const double v = detail::weighted_integral(u.box, f, t, 0.0, [&](std::size_t k) {
    return g1.values[k] * g1.values[k] + g2.values[k] * g2.values[k] -
           2.0 * potential_density(u.values[k], p);
  });
  return {t, v, f.y0, f.t0, 0.0};
}

/// max over t <= t0 of [value(t0) - value(t)]_+ for samples sharing one frame.
inline double monotonicity_defect(const std::vector<MonotonicitySample>& samples) {
  double at_t0 = 0.0;
  bool found = false;
  for (const auto& s : samples) {
    if (s.t == s.t0) {
      at_t0 = s.value;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::ConfigError, "samples do not contain t = t0");
  double d = 0.0;
  for (const auto& s : samples) {
    if (s.t <= s.t0) d = std::max(d, at_t0 - s.value);
  }
  return d;
}

/// Exponential rate kappa of a least-squares fit defect ~ exp(-kappa y0).
inline double defect_decay_rate(const std::vector<double>& y0, const std::vector<double>& defect) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < y0.size(); ++k) {
    if (!(defect[k] > 0.0)) continue;
    const double ly = std::log(defect[k]);
    sx += y0[k];
    sy += ly;
    sxx += y0[k] * y0[k];
    sxy += y0[k] * ly;
    ++m;
  }
  if (m < 2) return std::nan("");
  const double md = static_cast<double>(m);
  return -(md * sxy - sx * sy) / (md * sxx - sx * sx);
}

struct PartitionMasses {
  std::vector<double> mass;    // M_1 .. M_N
  std::vector<double> d_proxy; // M_j / M_1
};

/// M_1 = 1/2 int u^2 and M_j = 1/2 int u^2 psi_A(x1 - x_j - sigma_j t),
/// sigma_j = (c_j + c_{j-1})/2, for j >= 2. `lines` holds x_j, the initial
/// position of each dividing line; x1 is unwrapped around the moving line.
inline PartitionMasses partition_masses(const Field2D& u, const std::vector<double>& c, double t, double A,
                                        const std::vector<double>& lines = {}) {
  const std::size_t n = c.size();
  if (n == 0) fail(ErrorKind::ConfigError, "need at least one speed");
  for (std::size_t j = 1; j < n; ++j) {
    if (!(c[j] > c[j - 1])) fail(ErrorKind::ConfigError, "speeds must be increasing");
  }
  if (!lines.empty() && lines.size() != n) fail(ErrorKind::ConfigError, "one line offset per soliton");
  if (!(A > 0.0)) fail(ErrorKind::ConfigError, "A must be positive");
  const Box2D& box = u.box;
  PartitionMasses out;
  out.mass.push_back(0.5 * mass(u));
  for (std::size_t j = 1; j < n; ++j) {
    const double sigma = 0.5 * (c[j] + c[j - 1]);
    const double line = (lines.empty() ? 0.0 : lines[j]) + sigma * t;
    double s = 0.0;
    for (std::size_t i = 0; i < box.n1; ++i) {
      const double w = psi(wrap_centered(box.x1(i) - line, box.L1), A);
      for (std::size_t k = 0; k < box.n2; ++k) {
        const double v = u(i, k);
        s += v * v * w;
      }
    }
    out.mass.push_back(0.5 * s * box.cell_area());
  }
  for (double m : out.mass) out.d_proxy.push_back(m / out.mass.front());
  return out;
}

}  // namespace zklab
