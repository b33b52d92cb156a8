#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "zklab/errors.hpp"

namespace zklab {

/// Periodic box [0, L1) x [0, L2) with n1 x n2 nodes.
struct Box2D {
  double L1 = 40.0;
  double L2 = 40.0;
  std::size_t n1 = 128;
  std::size_t n2 = 128;

  void validate() const {
    if (!(L1 > 0.0) || !(L2 > 0.0)) fail(ErrorKind::ConfigError, "box lengths must be positive");
    auto pow2 = [](std::size_t n) { return n >= 64 && std::has_single_bit(n); };
    if (!pow2(n1) || !pow2(n2)) fail(ErrorKind::ConfigError, "grid sizes must be powers of two >= 64");
  }
  double dx1() const { return L1 / static_cast<double>(n1); }
  double dx2() const { return L2 / static_cast<double>(n2); }
  double x1(std::size_t i) const { return static_cast<double>(i) * dx1(); }
  double x2(std::size_t j) const { return static_cast<double>(j) * dx2(); }
  double cell_area() const { return dx1() * dx2(); }
  std::size_t size() const { return n1 * n2; }

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

/// Real field on a Box2D, row-major: values[i * n2 + j] = u(x1_i, x2_j).
struct Field2D {
  Box2D box;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(const Box2D& b) : box(b), values(b.size(), 0.0) {}
  Field2D(const Box2D& b, std::vector<double> v) : box(b), values(std::move(v)) {
    if (values.size() != box.size()) fail(ErrorKind::ConfigError, "field size does not match box");
  }

  double& operator()(std::size_t i, std::size_t j) { return values[i * box.n2 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * box.n2 + j]; }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Wraps x into [-L/2, L/2).
inline double wrap_centered(double x, double L) {
  x = std::fmod(x + 0.5 * L, L);
  if (x < 0.0) x += L;
  return x - 0.5 * L;
}

using Spectrum = std::vector<std::complex<double>>;

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex transforms on a Box2D. The spectrum has n1 x (n2/2+1)
/// entries; index i runs over k1, index j over the non-negative k2.
class Spectral2D {
 public:
  explicit Spectral2D(const Box2D& box) : box_(box), nh_(box.n2 / 2 + 1) {
    box.validate();
    const int n1 = static_cast<int>(box.n1), n2 = static_cast<int>(box.n2);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    double* r = fftw_alloc_real(box.size());
    fftw_complex* c = fftw_alloc_complex(spectrum_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_r2c_2d(n1, n2, r, c, flags);
    inv_ = fftw_plan_dft_c2r_2d(n1, n2, c, r, flags);
    fftw_free(r);
    fftw_free(c);
    k1_.resize(box.n1);
    k2_.resize(nh_);
    for (std::size_t i = 0; i < box.n1; ++i) {
      const double m = i <= box.n1 / 2 ? static_cast<double>(i) : static_cast<double>(i) - box.n1;
      k1_[i] = 2.0 * std::numbers::pi * m / box.L1;
    }
    for (std::size_t j = 0; j < nh_; ++j) k2_[j] = 2.0 * std::numbers::pi * j / box.L2;
  }
  ~Spectral2D() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  Spectral2D(const Spectral2D&) = delete;
  Spectral2D& operator=(const Spectral2D&) = delete;

  const Box2D& box() const { return box_; }
  std::size_t spectrum_size() const { return box_.n1 * nh_; }
  std::size_t half() const { return nh_; }
  double k1(std::size_t i) const { return k1_[i]; }
  double k2(std::size_t j) const { return k2_[j]; }
  bool nyquist1(std::size_t i) const { return i == box_.n1 / 2; }
  bool nyquist2(std::size_t j) const { return j == box_.n2 / 2; }
  /// k1 with the Nyquist mode zeroed, for odd-order operators.
  double k1_odd(std::size_t i) const { return nyquist1(i) ? 0.0 : k1_[i]; }
  double k2_odd(std::size_t j) const { return nyquist2(j) ? 0.0 : k2_[j]; }

  /// 2/3-rule mask: keeps |m1| < n1/3 and |m2| < n2/3.
  bool keep(std::size_t i, std::size_t j) const {
    const std::size_t m1 = i <= box_.n1 / 2 ? i : box_.n1 - i;
    return 3 * m1 < box_.n1 && 3 * j < box_.n2;
  }

  Spectrum forward(std::span<const double> u) const {
    Spectrum out(spectrum_size());
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(u.data()), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  /// Normalized inverse transform.
  std::vector<double> inverse(const Spectrum& s) const {
    Spectrum tmp = s;
    std::vector<double> out(box_.size());
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
    const double scale = 1.0 / static_cast<double>(box_.size());
    for (double& v : out) v *= scale;
    return out;
  }

  template <class F>
  void for_each_mode(F&& f) const {
    for (std::size_t i = 0; i < box_.n1; ++i) {
      for (std::size_t j = 0; j < nh_; ++j) f(i, j, i * nh_ + j);
    }
  }

  Field2D d1(const Field2D& u) const { return apply(u, [&](std::size_t i, std::size_t) {
      return std::complex<double>(0.0, k1_odd(i)); }); }
  Field2D d2(const Field2D& u) const { return apply(u, [&](std::size_t, std::size_t j) {
      return std::complex<double>(0.0, k2_odd(j)); }); }
  Field2D laplacian(const Field2D& u) const { return apply(u, [&](std::size_t i, std::size_t j) {
      return std::complex<double>(-(k1_[i] * k1_[i] + k2_[j] * k2_[j]), 0.0); }); }

  /// Multiplier of the translation u -> u(. + a). Nyquist modes get the real
  /// part of the phase so the result stays real.
  std::complex<double> shift_factor(std::size_t i, std::size_t j, double a1, double a2) const {
    const std::complex<double> p1 = nyquist1(i) ? std::complex<double>(std::cos(k1_[i] * a1), 0.0)
                                                : std::polar(1.0, k1_[i] * a1);
    const std::complex<double> p2 = nyquist2(j) ? std::complex<double>(std::cos(k2_[j] * a2), 0.0)
                                                : std::polar(1.0, k2_[j] * a2);
    return p1 * p2;
  }

  /// u(. + a) by spectral interpolation.
  Field2D shift(const Field2D& u, double a1, double a2) const {
    return apply(u, [&](std::size_t i, std::size_t j) { return shift_factor(i, j, a1, a2); });
  }

  template <class M>
  Field2D apply(const Field2D& u, M&& mult) const {
    auto s = forward(u.values);
    for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) { s[idx] *= mult(i, j); });
    return Field2D(box_, inverse(s));
  }

 private:
  Box2D box_;
  std::size_t nh_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
  std::vector<double> k1_, k2_;
};

/// Integral of u^2 over the box (rectangle rule, spectrally accurate).
inline double mass(const Field2D& u) {
  double s = 0.0;
  for (double v : u.values) s += v * v;
  return s * u.box.cell_area();
}

inline double integral(const Field2D& u) {
  double s = 0.0;
  for (double v : u.values) s += v;
  return s * u.box.cell_area();
}

inline double inner(const Field2D& a, const Field2D& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s * a.box.cell_area();
}

/// u^{p+1}/(p+1) with the real power for integer p, |u|^{p+1}/(p+1) otherwise.
inline double potential_density(double u, double p) {
  const double e = p + 1.0;
  if (e == std::round(e)) return std::pow(u, e) / e;
  return std::pow(std::abs(u), e) / e;
}

/// H(u) = int 1/2 |grad u|^2 - u^{p+1}/(p+1), gradients spectral.
inline double energy(const Spectral2D& fft, const Field2D& u, double p) {
  const auto g1 = fft.d1(u);
  const auto g2 = fft.d2(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    s += 0.5 * (g1.values[k] * g1.values[k] + g2.values[k] * g2.values[k]) -
         potential_density(u.values[k], p);
  }
  return s * u.box.cell_area();
}

inline double energy(const Field2D& u, double p) {
  Spectral2D fft(u.box);
  return energy(fft, u, p);
}

inline double h1_norm(const Spectral2D& fft, const Field2D& u) {
  const auto g1 = fft.d1(u);
  const auto g2 = fft.d2(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    s += u.values[k] * u.values[k] + g1.values[k] * g1.values[k] + g2.values[k] * g2.values[k];
  }
  return std::sqrt(s * u.box.cell_area());
}

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) fail(ErrorKind::IoError, "snapshot truncated");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline constexpr char kSnapshotMagic[8] = {'Z', 'K', 'S', 'N', 'A', 'P', '0', '1'};

/// Header: magic, L1, L2 (f64), n1, n2 (u64), t (f64); then n1*n2 f64, all
/// little-endian.
inline void write_snapshot(std::ostream& os, const Field2D& u, double t) {
  os.write(kSnapshotMagic, 8);
  detail::put_le(os, u.box.L1);
  detail::put_le(os, u.box.L2);
  detail::put_le(os, static_cast<std::uint64_t>(u.box.n1));
  detail::put_le(os, static_cast<std::uint64_t>(u.box.n2));
  detail::put_le(os, t);
  for (double v : u.values) detail::put_le(os, v);
}

inline std::pair<Field2D, double> read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0) {
    fail(ErrorKind::IoError, "not a snapshot");
  }
  Box2D box;
  box.L1 = detail::get_le<double>(is);
  box.L2 = detail::get_le<double>(is);
  box.n1 = detail::get_le<std::uint64_t>(is);
  box.n2 = detail::get_le<std::uint64_t>(is);
  const double t = detail::get_le<double>(is);
  box.validate();
  Field2D u(box);
  for (double& v : u.values) v = detail::get_le<double>(is);
  return {std::move(u), t};
}

inline void save_snapshot(const std::string& path, const Field2D& u, double t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot open " + path);
  write_snapshot(os, u, t);
  if (!os) fail(ErrorKind::IoError, "write failed for " + path);
}

inline std::pair<Field2D, double> load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::IoError, "cannot open " + path);
  return read_snapshot(is);
}

}  // namespace zklab
