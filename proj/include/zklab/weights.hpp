#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "zklab/errors.hpp"

namespace zklab {

/// psi_L(y) = (2/pi) arctan(e^{y/L}).
inline double psi(double y, double L) {
  return 2.0 / std::numbers::pi * std::atan(std::exp(y / L));
}

inline double psi_prime(double y, double L) {
  return 1.0 / (std::numbers::pi * L * std::cosh(y / L));
}

inline double psi_third(double y, double L) {
  const double s = 1.0 / std::cosh(y / L);
  return psi_prime(y, L) / (L * L) * (1.0 - 2.0 * s * s);
}

namespace detail {

constexpr double kPhiKnee = 1.0;
constexpr double kPhiTail = 1.5;

/// Quintic smoothstep with zero first and second derivatives at both ends.
inline std::array<double, 3> smoothstep5(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {t3 * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * (1.0 - t) * (1.0 - t),
          60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)};
}

}  // namespace detail

/// Even C^2 virial weight: 1 on [0, 1], e^{-x} from 1.5 on, and a smoothstep
/// blend of the two in between. Non-increasing on x >= 0 with
/// e^{-x} <= phi(x) <= 3 e^{-x}.
inline double phi(double x) {
  x = std::abs(x);
  if (x <= detail::kPhiKnee) return 1.0;
  const double e = std::exp(-x);
  if (x >= detail::kPhiTail) return e;
  const double t = (x - detail::kPhiKnee) / (detail::kPhiTail - detail::kPhiKnee);
  const double s = detail::smoothstep5(t)[0];
  return (1.0 - s) + s * e;
}

inline double phi_deriv(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x <= detail::kPhiKnee) return 0.0;
  const double e = std::exp(-x);
  if (x >= detail::kPhiTail) return -sign * e;
  const double w = detail::kPhiTail - detail::kPhiKnee;
  const double t = (x - detail::kPhiKnee) / w;
  const auto s = detail::smoothstep5(t);
  return sign * (s[1] / w * (e - 1.0) - s[0] * e);
}

/// varphi(x) = int_0^x phi, odd, equal to x on [-1, 1].
inline double varphi(double x) {
  static constexpr std::array<double, 5> nodes = {0.0, 0.5384693101056831, 0.9061798459386640,
                                                  -0.5384693101056831, -0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.5688888888888889, 0.4786286704993665,
                                                    0.2369268850561891, 0.4786286704993665,
                                                    0.2369268850561891};
  auto blend_integral = [](double b) {
    // Gauss-Legendre on [1, b], two panels of five points.
    double s = 0.0;
    const double a = detail::kPhiKnee;
    const double mid = 0.5 * (a + b);
    for (const auto [lo, hi] : {std::array<double, 2>{a, mid}, std::array<double, 2>{mid, b}}) {
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (std::size_t k = 0; k < nodes.size(); ++k) s += h * weights[k] * phi(c + h * nodes[k]);
    }
    return s;
  };
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax <= detail::kPhiKnee) return x;
  if (ax <= detail::kPhiTail) return sign * (detail::kPhiKnee + blend_integral(ax));
  static const double at_tail = detail::kPhiKnee + blend_integral(detail::kPhiTail);
  return sign * (at_tail + std::exp(-detail::kPhiTail) - std::exp(-ax));
}

enum class WeightKind { Psi, PhiPrime, Varphi };

inline std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Psi: return "psi";
    case WeightKind::PhiPrime: return "phi_prime";
    case WeightKind::Varphi: return "varphi";
  }
  return "unknown";
}

struct WeightParams {
  WeightKind kind = WeightKind::Psi;
  double scale = 4.0;   // L, M or A
  double offset = 0.0;  // argument is x - offset
  double angle = 0.0;   // tan(theta) coefficient of x2 in oblique arguments

  void validate() const {
    if (!(scale > 0.0)) fail(ErrorKind::ConfigError, "weight scale must be positive");
    if (kind == WeightKind::Psi && scale < 4.0) fail(ErrorKind::ConfigError, "psi weights need L >= 4");
    if (!(std::abs(angle) < std::sqrt(3.0))) {
      fail(ErrorKind::AngleOutOfRange, "oblique coefficient must satisfy |tan theta| < sqrt(3)");
    }
  }
};

/// psi_L, phi(./A) or A varphi(./A) at x - offset.
inline double weight_eval(const WeightParams& w, double x) {
  const double y = x - w.offset;
  switch (w.kind) {
    case WeightKind::Psi: return psi(y, w.scale);
    case WeightKind::PhiPrime: return phi(y / w.scale);
    case WeightKind::Varphi: return w.scale * varphi(y / w.scale);
  }
  return 0.0;
}

inline double weight_deriv(const WeightParams& w, double x) {
  const double y = x - w.offset;
  switch (w.kind) {
    case WeightKind::Psi: return psi_prime(y, w.scale);
    case WeightKind::PhiPrime: return phi_deriv(y / w.scale) / w.scale;
    case WeightKind::Varphi: return phi(y / w.scale);
  }
  return 0.0;
}

}  // namespace zklab
