#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "zklab/errors.hpp"

namespace zklab {

/// Uniform grid r_i = i*h on [0, rmax].
class RadialGrid {
 public:
  static constexpr std::size_t kMinNodes = 64;

  RadialGrid() = default;
  RadialGrid(double rmax, std::size_t n) : rmax_(rmax), h_(0.0), nodes_(n) {
    if (!(rmax > 0.0) || !std::isfinite(rmax)) fail(ErrorKind::ConfigError, "rmax must be positive");
    if (n < kMinNodes) fail(ErrorKind::ConfigError, "radial grid needs at least 64 nodes");
    h_ = rmax / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) nodes_[i] = static_cast<double>(i) * h_;
    nodes_[n - 1] = rmax;
  }

  double rmax() const { return rmax_; }
  double h() const { return h_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.rmax_ == b.rmax_ && a.nodes_.size() == b.nodes_.size();
  }

 private:
  double rmax_ = 0.0;
  double h_ = 0.0;
  std::vector<double> nodes_;
};

/// A sampled radial function together with its r-derivative.
struct RadialProfile {
  RadialGrid grid;
  std::vector<double> values;
  std::vector<double> derivs;

  std::size_t size() const { return values.size(); }

  /// Cubic Hermite interpolation on [0, rmax]; r is clamped into the grid.
  double eval(double r) const { return hermite(r, false); }
  double eval_deriv(double r) const { return hermite(r, true); }

 private:
  double hermite(double r, bool derivative) const {
    const double h = grid.h();
    const std::size_t n = values.size();
    r = std::clamp(r, 0.0, grid.rmax());
    auto i = static_cast<std::size_t>(r / h);
    if (i >= n - 1) i = n - 2;
    const double t = (r - grid[i]) / h;
    const double y0 = values[i], y1 = values[i + 1];
    const double m0 = derivs[i] * h, m1 = derivs[i + 1] * h;
    if (!derivative) {
      const double t2 = t * t, t3 = t2 * t;
      return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
             (t3 - t2) * m1;
    }
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
            (3 * t2 - 2 * t) * m1) /
           h;
  }
};

/// Finite-difference weights (Fornberg) for derivatives 0..max_order at x0.
/// Returns weights[order][k] for the nodes xs[k].
inline std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs,
                                                   std::size_t max_order) {
  const std::size_t n = xs.size();
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// One row of a sparse stencil: a contiguous run of at most 10 weights.
struct StencilRow {
  static constexpr std::size_t kCapacity = 10;
  std::size_t first = 0;
  std::size_t count = 0;
  std::array<double, kCapacity> w{};

  double apply(std::span<const double> v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += w[k] * v[first + k];
    return s;
  }
  void add(std::size_t col, double weight) {
    if (count == 0) {
      first = col;
      count = 1;
      w[0] = weight;
      return;
    }
    if (col < first) {
      const std::size_t shift = first - col;
      for (std::size_t k = count; k-- > 0;) w[k + shift] = w[k];
      for (std::size_t k = 0; k < shift; ++k) w[k] = 0.0;
      first = col;
      count += shift;
    }
    if (col >= first + count) {
      for (std::size_t k = count; k <= col - first; ++k) w[k] = 0.0;
      count = col - first + 1;
    }
    w[col - first] += weight;
  }
};

/// Centred finite-difference stencils of order `order` (4 or 6) for the radial
/// operators acting on an even function of r:
///   d1(i)        ~ u'(r_i)
///   laplacian(i) ~ -(u'' + (d-1)/r u')(r_i)   for i < n-1
/// Ghost nodes at negative r fold onto their mirror images. At r = 0 the
/// singular term takes its regular limit (d-1) u''(0). Rows whose centred
/// stencil would leave the grid use off-centred stencils of the same order,
/// and d1 at the last node is one-sided.
class RadialStencil {
 public:
  RadialStencil(const RadialGrid& grid, int d, int order = 6)
      : d_(d), order_(order), d1_(grid.size()), lap_(grid.size()) {
    if (order != 4 && order != 6) fail(ErrorKind::ConfigError, "stencil order must be 4 or 6");
    const std::size_t n = grid.size();
    const double h = grid.h();
    const double dm1 = static_cast<double>(d - 1);
    const auto m = static_cast<std::size_t>(order / 2);

    std::vector<double> offsets(2 * m + 1);
    for (std::size_t k = 0; k < offsets.size(); ++k) offsets[k] = static_cast<double>(k) - static_cast<double>(m);
    const auto centred = fd_weights(0.0, offsets, 2);

    for (std::size_t i = 0; i < n; ++i) {
      StencilRow r1, r2;
      if (i + m < n) {
        for (std::size_t k = 0; k < offsets.size(); ++k) {
          const long idx = static_cast<long>(i) + static_cast<long>(k) - static_cast<long>(m);
          const auto col = static_cast<std::size_t>(idx < 0 ? -idx : idx);
          r1.add(col, centred[1][k] / h);
          r2.add(col, centred[2][k] / (h * h));
        }
      } else {
        // first derivative: order+1 trailing points; second: order+2.
        const std::size_t n2 = static_cast<std::size_t>(order) + 2;
        const std::size_t n1 = i == n - 1 ? static_cast<std::size_t>(order) + 1 : n2;
        std::vector<double> xs2(n2), xs1(n1);
        for (std::size_t k = 0; k < n2; ++k) xs2[k] = grid[n - n2 + k];
        for (std::size_t k = 0; k < n1; ++k) xs1[k] = grid[n - n1 + k];
        const auto w2 = fd_weights(grid[i], xs2, 2);
        const auto w1 = fd_weights(grid[i], xs1, 1);
        for (std::size_t k = 0; k < n1; ++k) r1.add(n - n1 + k, w1[1][k]);
        for (std::size_t k = 0; k < n2; ++k) r2.add(n - n2 + k, w2[2][k]);
      }
      d1_[i] = r1;
      if (i + 1 == n) continue;
      StencilRow lap;
      if (i == 0) {
        for (std::size_t k = 0; k < r2.count; ++k) lap.add(r2.first + k, -static_cast<double>(d) * r2.w[k]);
      } else {
        const double r = grid[i];
        for (std::size_t k = 0; k < r2.count; ++k) lap.add(r2.first + k, -r2.w[k]);
        for (std::size_t k = 0; k < r1.count; ++k) lap.add(r1.first + k, -dm1 / r * r1.w[k]);
      }
      lap_[i] = lap;
    }
  }

  int dimension() const { return d_; }
  int order() const { return order_; }
  const StencilRow& d1(std::size_t i) const { return d1_[i]; }
  const StencilRow& laplacian(std::size_t i) const { return lap_[i]; }
  std::size_t size() const { return d1_.size(); }

  std::vector<double> derivative(std::span<const double> v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = d1_[i].apply(v);
    return out;
  }

  /// Bandwidths of the assembled system, including the Robin row.
  std::size_t lower_band() const { return static_cast<std::size_t>(order_); }
  std::size_t upper_band() const { return static_cast<std::size_t>(order_ / 2); }

 private:
  int d_;
  int order_;
  std::vector<StencilRow> d1_;
  std::vector<StencilRow> lap_;
};

/// Composite quadrature of f(r) * r^k over [0, rmax]: Simpson's rule, with a
/// Simpson 3/8 panel closing an odd number of intervals. Fourth order.
inline double radial_quadrature(const RadialGrid& grid, std::span<const double> f, int k) {
  if (k < 0) fail(ErrorKind::ConfigError, "weight power must be non-negative");
  const std::size_t n = grid.size();
  const double h = grid.h();
  auto g = [&](std::size_t i) { return k == 0 ? f[i] : f[i] * std::pow(grid[i], k); };
  const std::size_t intervals = n - 1;
  const std::size_t simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    s += (h / 3.0) * (g(i) + 4.0 * g(i + 1) + g(i + 2));
  }
  if (simpson_end != intervals) {
    const std::size_t i = simpson_end;
    s += (3.0 * h / 8.0) * (g(i) + 3.0 * g(i + 1) + 3.0 * g(i + 2) + g(i + 3));
  }
  return s;
}

inline double radial_quadrature(const RadialProfile& f, int k) {
  return radial_quadrature(f.grid, f.values, k);
}

/// Running integral nu(r_i) = int_0^{r_i} f(s) s^k ds, advancing interval by
/// interval with the exact integral of the local cubic through four nodes.
inline std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f, int k) {
  const std::size_t n = grid.size();
  const double h = grid.h();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = k == 0 ? f[i] : f[i] * std::pow(grid[i], k);
  std::vector<double> nu(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double inc;
    if (i == 0) {
      // nodes 0,1,2,3, integrate over [0,1]
      inc = h * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0;
    } else if (i + 2 < n) {
      // nodes i-1..i+2, integrate over the middle interval
      inc = h * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]) / 24.0;
    } else {
      // nodes i-2..i+1, integrate over the last interval
      inc = h * (g[i - 2] - 5.0 * g[i - 1] + 19.0 * g[i] + 9.0 * g[i + 1]) / 24.0;
    }
    nu[i + 1] = nu[i] + inc;
  }
  return nu;
}

}  // namespace zklab
