#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "zklab/errors.hpp"

namespace zklab {

/// Square banded matrix with `lower` sub-diagonals and `upper` super-diagonals.
/// Each row stores the window of columns [i - lower, i + upper + lower], which
/// leaves room for the fill-in produced by partial pivoting.
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), lower_(lower), upper_(upper), width_(2 * lower + upper + 1),
        data_(n * width_, 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t lower() const { return lower_; }
  std::size_t upper() const { return upper_; }

  bool in_window(std::size_t i, std::size_t j) const {
    return j + lower_ >= i && j <= i + upper_ + lower_;
  }

  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + (j + lower_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + lower_ - i)]; }

  /// Adds to an entry inside the declared band.
  void add(std::size_t i, std::size_t j, double v) {
    if (j + lower_ < i || j > i + upper_) {
      fail(ErrorKind::ConfigError, "banded matrix entry outside declared band");
    }
    at(i, j) += v;
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= lower_ ? i - lower_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + upper_);
      double s = 0.0;
      for (std::size_t j = j0; j <= j1; ++j) s += at(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t n_, lower_, upper_, width_;
  std::vector<double> data_;
};

/// LU factorization with partial pivoting of a banded matrix.
/// Throws SingularSystem when a pivot falls below `rel_pivot_tol * max|A|`.
class BandedLU {
 public:
  explicit BandedLU(BandedMatrix a, double rel_pivot_tol = 1e-14)
      : lu_(std::move(a)), piv_(lu_.size()) {
    const std::size_t n = lu_.size();
    const std::size_t kl = lu_.lower();
    const std::size_t ku = lu_.upper();
    const double scale = lu_.max_abs();
    if (scale == 0.0) fail(ErrorKind::SingularSystem, "zero matrix");
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t last_row = std::min(n - 1, k + kl);
      const std::size_t last_col = std::min(n - 1, k + kl + ku);
      std::size_t p = k;
      double best = std::abs(lu_.at(k, k));
      for (std::size_t r = k + 1; r <= last_row; ++r) {
        const double v = std::abs(lu_.at(r, k));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (!(best > rel_pivot_tol * scale)) {
        fail(ErrorKind::SingularSystem, "banded LU: pivot below tolerance at row " + std::to_string(k));
      }
      piv_[k] = p;
      if (p != k) {
        for (std::size_t j = k; j <= last_col; ++j) std::swap(lu_.at(k, j), lu_.at(p, j));
      }
      const double pivot = lu_.at(k, k);
      for (std::size_t r = k + 1; r <= last_row; ++r) {
        const double m = lu_.at(r, k) / pivot;
        lu_.at(r, k) = m;
        if (m == 0.0) continue;
        for (std::size_t j = k + 1; j <= last_col; ++j) lu_.at(r, j) -= m * lu_.at(k, j);
      }
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    const std::size_t n = lu_.size();
    const std::size_t kl = lu_.lower();
    const std::size_t ku = lu_.upper();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) {
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
      const std::size_t last_row = std::min(n - 1, k + kl);
      for (std::size_t r = k + 1; r <= last_row; ++r) x[r] -= lu_.at(r, k) * x[k];
    }
    for (std::size_t kk = n; kk-- > 0;) {
      const std::size_t last_col = std::min(n - 1, kk + kl + ku);
      double s = x[kk];
      for (std::size_t j = kk + 1; j <= last_col; ++j) s -= lu_.at(kk, j) * x[j];
      x[kk] = s / lu_.at(kk, kk);
    }
    return x;
  }

 private:
  BandedMatrix lu_;
  std::vector<std::size_t> piv_;
};

/// Symmetric tridiagonal matrix (diag, off) where off[i] couples i and i+1.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  /// Number of eigenvalues strictly below `shift` (Sylvester inertia of the
  /// LDL^T factorization of T - shift*I).
  std::size_t count_below(double shift) const {
    std::size_t count = 0;
    double d = diag[0] - shift;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
      if (d == 0.0) d = 1e-300;
      d = diag[i] - shift - off[i - 1] * off[i - 1] / d;
      if (d < 0.0) ++count;
    }
    return count;
  }

  /// Solves (T - shift*I) x = b by Gaussian elimination without pivoting.
  std::vector<double> solve_shifted(double shift, std::span<const double> b) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n), x(b.begin(), b.end());
    double d = diag[0] - shift;
    if (d == 0.0) d = 1e-300;
    c[0] = d;
    for (std::size_t i = 1; i < n; ++i) {
      const double m = off[i - 1] / c[i - 1];
      x[i] -= m * x[i - 1];
      d = diag[i] - shift - m * off[i - 1];
      if (d == 0.0) d = 1e-300;
      c[i] = d;
    }
    x[n - 1] /= c[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - off[i] * x[i + 1]) / c[i];
    return x;
  }

  std::vector<double> multiply(std::span<const double> x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  std::pair<double, double> gershgorin() const {
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < diag.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < diag.size()) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }
};

}  // namespace zklab
