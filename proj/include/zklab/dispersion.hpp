#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/tools/minima.hpp>

namespace zklab {

struct WaveVector {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Dispersion relation of u_t + d_1 Delta u = 0 for u = exp(i(k.x - w t)).
inline double omega(WaveVector k) {
  return -(k.k1 * k.k1 * k.k1 + k.k1 * k.k2 * k.k2);
}

inline std::pair<double, double> group_velocity(WaveVector k) {
  return {-(3.0 * k.k1 * k.k1 + k.k2 * k.k2), -2.0 * k.k1 * k.k2};
}

/// tan of the angle between the group velocity and the x2-axis as a function
/// of r = |k1|/|k2|:  (3 r^2 + 1) / (2 r).
inline double group_angle_objective(double r) {
  return (3.0 * r * r + 1.0) / (2.0 * r);
}

struct GroupAngle {
  double angle = 0.0;      // radians, measured from the x2-axis
  double minimizer = 0.0;  // ratio |k1|/|k2| attaining it
};

/// Infimum over wave vectors of the group-velocity angle to the x2-axis.
/// Brent minimization in log r; the analytic minimizer is r = 1/sqrt(3).
inline GroupAngle min_group_angle_detail() {
  auto f = [](double s) { return group_angle_objective(std::exp(s)); };
  std::uintmax_t iters = 200;
  const auto [s, fmin] = boost::math::tools::brent_find_minima(f, -8.0, 8.0, 52, iters);
  return {std::atan(fmin), std::exp(s)};
}

inline double min_group_angle() {
  return min_group_angle_detail().angle;
}

/// K(k1, k2) = 3 k1^2 - k2^2, zero on the cone |k2| = sqrt(3) |k1|.
inline double ckz_symbol(WaveVector k) {
  return 3.0 * k.k1 * k.k1 - k.k2 * k.k2;
}

}  // namespace zklab
