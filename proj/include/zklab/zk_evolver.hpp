#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "zklab/dispersion.hpp"
#include "zklab/errors.hpp"
#include "zklab/field2d.hpp"
#include "zklab/ground_state.hpp"

namespace zklab {

enum class Scheme { ETDRK4, IMEXBDF2 };

inline std::string to_string(Scheme s) {
  return s == Scheme::ETDRK4 ? "etdrk4" : "imex-bdf2";
}

struct EvolveParams {
  double dt = 0.0;  // 0 selects the preflight bound
  double t_end = 0.0;
  bool dealias = true;
  int output_every = 1;
  Scheme scheme = Scheme::ETDRK4;
  double blowup_factor = 1e3;

  void validate() const {
    if (!(dt >= 0.0) || !std::isfinite(dt)) fail(ErrorKind::ConfigError, "dt must be non-negative");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail(ErrorKind::ConfigError, "t_end must be non-negative");
    if (output_every < 1) fail(ErrorKind::ConfigError, "output_every must be positive");
  }
};

/// Largest |omega(k)| over the grid's wave vectors.
inline double max_abs_omega(const Spectral2D& fft) {
  double m = 0.0;
  fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t) {
    m = std::max(m, std::abs(omega({fft.k1(i), fft.k2(j)})));
  });
  return m;
}

/// dt preflight bound 0.5 / max|omega|.
inline double dt_bound(const Spectral2D& fft) {
  return 0.5 / max_abs_omega(fft);
}

/// Resolves dt = 0 to the preflight bound; IMEX-BDF2 must respect the bound.
inline double resolve_dt(const EvolveParams& params, const Spectral2D& fft) {
  params.validate();
  const double bound = dt_bound(fft);
  if (params.dt == 0.0) return bound;
  if (params.scheme == Scheme::IMEXBDF2 && params.dt > bound) {
    fail(ErrorKind::ConfigError, "dt exceeds the IMEX preflight bound " + std::to_string(bound));
  }
  return params.dt;
}

/// Time stepper for v_t = L v + N(v) in Fourier space with diagonal L.
class SpectralStepper {
 public:
  using Nonlinear = std::function<void(const Spectrum&, Spectrum&)>;

  SpectralStepper(Spectrum linear, Nonlinear nonlinear, double dt, Scheme scheme)
      : lin_(std::move(linear)), nl_(std::move(nonlinear)), dt_(dt), scheme_(scheme) {
    const std::size_t m = lin_.size();
    e_.resize(m);
    e2_.resize(m);
    q_.resize(m);
    f1_.resize(m);
    f2_.resize(m);
    f3_.resize(m);
    // Contour-integral evaluation of the phi-functions (32 points on a unit circle).
    constexpr int kContour = 32;
    std::vector<std::complex<double>> roots(kContour);
    for (int r = 0; r < kContour; ++r) {
      roots[r] = std::polar(1.0, std::numbers::pi * (r + 0.5) / (kContour / 2));
    }
    for (std::size_t k = 0; k < m; ++k) {
      const std::complex<double> z = lin_[k] * dt_;
      e_[k] = std::exp(z);
      e2_[k] = std::exp(0.5 * z);
      std::complex<double> sq = 0, s1 = 0, s2 = 0, s3 = 0;
      for (const auto& root : roots) {
        const std::complex<double> w = z + root;
        const std::complex<double> ew = std::exp(w);
        const std::complex<double> w3 = w * w * w;
        sq += (std::exp(0.5 * w) - 1.0) / w;
        s1 += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
        s2 += (2.0 + w + ew * (-2.0 + w)) / w3;
        s3 += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
      }
      q_[k] = dt_ * sq / static_cast<double>(kContour);
      f1_[k] = dt_ * s1 / static_cast<double>(kContour);
      f2_[k] = dt_ * s2 / static_cast<double>(kContour);
      f3_[k] = dt_ * s3 / static_cast<double>(kContour);
    }
  }

  double dt() const { return dt_; }

  void step(Spectrum& v) {
    if (scheme_ == Scheme::IMEXBDF2 && have_prev_) {
      bdf2(v);
    } else {
      Spectrum old = v;
      Spectrum nv(v.size());
      nl_(v, nv);
      etdrk4(v, nv);
      if (scheme_ == Scheme::IMEXBDF2) {
        prev_ = std::move(old);
        prev_n_ = std::move(nv);
        have_prev_ = true;
      }
    }
  }

 private:
  void etdrk4(Spectrum& v, const Spectrum& nv) {
    const std::size_t m = v.size();
    Spectrum a(m), b(m), c(m), na(m), nb(m), nc(m);
    for (std::size_t k = 0; k < m; ++k) a[k] = e2_[k] * v[k] + q_[k] * nv[k];
    nl_(a, na);
    for (std::size_t k = 0; k < m; ++k) b[k] = e2_[k] * v[k] + q_[k] * na[k];
    nl_(b, nb);
    for (std::size_t k = 0; k < m; ++k) c[k] = e2_[k] * a[k] + q_[k] * (2.0 * nb[k] - nv[k]);
    nl_(c, nc);
    for (std::size_t k = 0; k < m; ++k) {
      v[k] = e_[k] * v[k] + f1_[k] * nv[k] + 2.0 * f2_[k] * (na[k] + nb[k]) + f3_[k] * nc[k];
    }
  }

  void bdf2(Spectrum& v) {
    const std::size_t m = v.size();
    Spectrum nv(m);
    nl_(v, nv);
    Spectrum next(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::complex<double> rhs = 4.0 * v[k] - prev_[k] + 2.0 * dt_ * (2.0 * nv[k] - prev_n_[k]);
      next[k] = rhs / (3.0 - 2.0 * dt_ * lin_[k]);
    }
    prev_ = std::move(v);
    prev_n_ = std::move(nv);
    v = std::move(next);
  }

  Spectrum lin_;
  Nonlinear nl_;
  double dt_;
  Scheme scheme_;
  Spectrum e_, e2_, q_, f1_, f2_, f3_;
  Spectrum prev_, prev_n_;
  bool have_prev_ = false;
};

/// Linear multiplier of u_t = -d_1 Delta u: i k1 |k|^2 = -i omega(k).
/// The k1 Nyquist mode is frozen.
inline Spectrum zk_linear_symbol(const Spectral2D& fft) {
  Spectrum lin(fft.spectrum_size());
  fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
    lin[idx] = fft.nyquist1(i) ? 0.0 : std::complex<double>(0.0, -omega({fft.k1(i), fft.k2(j)}));
  });
  return lin;
}

inline Spectrum dealias_mask(const Spectral2D& fft, bool dealias) {
  Spectrum mask(fft.spectrum_size());
  fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
    const bool keep = dealias ? fft.keep(i, j) : !fft.nyquist1(i);
    mask[idx] = keep ? std::complex<double>(0.0, -fft.k1(i)) : 0.0;
  });
  return mask;
}

using Observer = std::function<void(double, const Field2D&)>;

struct Trajectory {
  Field2D final;
  double t = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<double> output_times;
};

namespace detail {

inline Trajectory run_stepper(const Spectral2D& fft, SpectralStepper& stepper, const Field2D& u0,
                              Spectrum v, double t_end, const EvolveParams& params,
                              const std::vector<Observer>& observers) {
  Trajectory tr;
  tr.dt = stepper.dt();
  const double peak0 = u0.sup_norm();
  auto emit = [&](double t, const Field2D& u) {
    tr.output_times.push_back(t);
    for (const auto& obs : observers) obs(t, u);
  };
  Field2D u(u0.box, fft.inverse(v));
  emit(0.0, u);
  const auto nsteps = static_cast<std::size_t>(std::llround(t_end / stepper.dt()));
  for (std::size_t s = 1; s <= nsteps; ++s) {
    stepper.step(v);
    u.values = fft.inverse(v);
    const double peak = u.sup_norm();
    if (!std::isfinite(peak) || peak > params.blowup_factor * std::max(peak0, 1e-300)) {
      fail(ErrorKind::BlowupDetected, "sup-norm grew past " + std::to_string(params.blowup_factor) +
                                          "x its initial value at t=" + std::to_string(s * stepper.dt()));
    }
    const double t = static_cast<double>(s) * stepper.dt();
    if (s % static_cast<std::size_t>(params.output_every) == 0 || s == nsteps) emit(t, u);
  }
  tr.steps = nsteps;
  tr.t = static_cast<double>(nsteps) * stepper.dt();
  tr.final = std::move(u);
  return tr;
}

/// dt shrunk so that an integer number of steps lands on t_end.
inline double fit_dt(double dt, double t_end) {
  if (t_end == 0.0) return dt;
  const double steps = std::ceil(t_end / dt - 1e-9);
  return t_end / steps;
}

}  // namespace detail

/// Pseudo-spectral ZK solver u_t + d_1(Delta u + u^2) = 0 on a periodic box.
class ZKEvolver {
 public:
  ZKEvolver(const Box2D& box, const EvolveParams& params)
      : fft_(box), params_(params), mask_(dealias_mask(fft_, params.dealias)) {
    dt_ = detail::fit_dt(resolve_dt(params, fft_), params.t_end);
    stepper_ = std::make_unique<SpectralStepper>(zk_linear_symbol(fft_), nonlinear(), dt_, params.scheme);
  }

  const Spectral2D& fft() const { return fft_; }
  double dt() const { return dt_; }

  /// One step of size dt() from u.
  Field2D step(const Field2D& u) {
    auto v = fft_.forward(u.values);
    stepper_->step(v);
    Field2D out(u.box, fft_.inverse(v));
    if (!std::isfinite(out.sup_norm()) || out.sup_norm() > params_.blowup_factor * std::max(u.sup_norm(), 1e-300)) {
      fail(ErrorKind::BlowupDetected, "sup-norm blew up in one step");
    }
    return out;
  }

  /// Full run; with dealiasing on the initial data is projected onto the kept modes.
  Trajectory evolve(const Field2D& u0, const std::vector<Observer>& observers = {}) {
    if (!(u0.box == fft_.box())) fail(ErrorKind::ConfigError, "field box differs from evolver box");
    auto v = fft_.forward(u0.values);
    if (params_.dealias) {
      fft_.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
        if (!fft_.keep(i, j)) v[idx] = 0.0;
      });
    }
    return detail::run_stepper(fft_, *stepper_, u0, std::move(v), params_.t_end, params_, observers);
  }

 private:
  SpectralStepper::Nonlinear nonlinear() {
    return [this](const Spectrum& v, Spectrum& out) {
      auto u = fft_.inverse(v);
      for (double& x : u) x *= x;
      out = fft_.forward(u);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= mask_[k];
    };
  }

  Spectral2D fft_;
  EvolveParams params_;
  Spectrum mask_;
  double dt_ = 0.0;
  std::unique_ptr<SpectralStepper> stepper_;
};

inline Trajectory evolve(const Field2D& u0, const EvolveParams& params,
                         const std::vector<Observer>& observers = {}) {
  if (params.t_end == 0.0) {
    Trajectory tr;
    tr.final = u0;
    for (const auto& obs : observers) obs(0.0, u0);
    tr.output_times.push_back(0.0);
    return tr;
  }
  ZKEvolver ev(u0.box, params);
  return ev.evolve(u0, observers);
}

/// Linearized flow eta_t = d_1(-Delta eta + c0 eta - p Q^{p-1} eta) about a
/// static background (co-moving frame).
class LinearizedEvolver {
 public:
  LinearizedEvolver(const Field2D& background, double c0, double p, const EvolveParams& params)
      : fft_(background.box), params_(params), c0_(c0), potential_(background.box) {
    if (!(c0 > 0.0)) fail(ErrorKind::ConfigError, "c0 must be positive");
    for (std::size_t k = 0; k < potential_.values.size(); ++k) {
      potential_.values[k] = p * std::pow(std::abs(background.values[k]), p - 1.0);
    }
    mask_ = dealias_mask(fft_, params.dealias);
    Spectrum lin(fft_.spectrum_size());
    fft_.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
      const double kk = fft_.k1(i) * fft_.k1(i) + fft_.k2(j) * fft_.k2(j);
      lin[idx] = std::complex<double>(0.0, fft_.k1_odd(i) * (kk + c0_));
    });
    // dt bound from the shifted symbol k1 (|k|^2 + c0).
    double wmax = 0.0;
    for (const auto& l : lin) wmax = std::max(wmax, std::abs(l));
    double dt = params.dt == 0.0 ? 0.5 / wmax : params.dt;
    if (params.scheme == Scheme::IMEXBDF2 && dt > 0.5 / wmax) {
      fail(ErrorKind::ConfigError, "dt exceeds the IMEX preflight bound");
    }
    params.validate();
    dt_ = detail::fit_dt(dt, params.t_end);
    stepper_ = std::make_unique<SpectralStepper>(std::move(lin), nonlinear(), dt_, params.scheme);
  }

  const Spectral2D& fft() const { return fft_; }
  double dt() const { return dt_; }

  /// d_1(-Delta eta + c0 eta - V eta), evaluated spectrally.
  Field2D rhs(const Field2D& eta) const {
    auto lap = fft_.laplacian(eta);
    Field2D w(eta.box);
    for (std::size_t k = 0; k < w.values.size(); ++k) {
      w.values[k] = -lap.values[k] + c0_ * eta.values[k] - potential_.values[k] * eta.values[k];
    }
    return fft_.d1(w);
  }

  Trajectory evolve(const Field2D& eta0, const std::vector<Observer>& observers = {}) {
    auto v = fft_.forward(eta0.values);
    return detail::run_stepper(fft_, *stepper_, eta0, std::move(v), params_.t_end, params_, observers);
  }

 private:
  SpectralStepper::Nonlinear nonlinear() {
    return [this](const Spectrum& v, Spectrum& out) {
      auto e = fft_.inverse(v);
      for (std::size_t k = 0; k < e.size(); ++k) e[k] *= potential_.values[k];
      out = fft_.forward(e);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= mask_[k];
    };
  }

  Spectral2D fft_;
  EvolveParams params_;
  double c0_;
  Field2D potential_;
  Spectrum mask_;
  double dt_ = 0.0;
  std::unique_ptr<SpectralStepper> stepper_;
};

inline Trajectory linearized_evolve(const Field2D& eta0, const Field2D& q_background, double c0,
                                    const EvolveParams& params, const std::vector<Observer>& observers = {},
                                    double p = 2.0) {
  LinearizedEvolver ev(q_background, c0, p, params);
  return ev.evolve(eta0, observers);
}

/// Samples f(|x - center|) with minimum-image periodic wrapping.
template <class F>
Field2D sample_radial(const Box2D& box, double c1, double c2, F&& f) {
  Field2D u(box);
  for (std::size_t i = 0; i < box.n1; ++i) {
    const double y1 = wrap_centered(box.x1(i) - c1, box.L1);
    for (std::size_t j = 0; j < box.n2; ++j) {
      const double y2 = wrap_centered(box.x2(j) - c2, box.L2);
      u(i, j) = f(std::hypot(y1, y2), y1, y2);
    }
  }
  return u;
}

/// Q_c(|x - center|) on the box. The profile must be the c = 1 ground state.
inline Field2D init_soliton_field(const Box2D& box, const GroundState& q, double c,
                                  std::pair<double, double> center) {
  box.validate();
  if (q.d != 2) fail(ErrorKind::ConfigError, "soliton fields need a d = 2 ground state");
  if (!(c > 0.0)) fail(ErrorKind::ConfigError, "speed c must be positive");
  const double amp = std::pow(c, 1.0 / (q.p - 1.0)) / std::pow(q.c, 1.0 / (q.p - 1.0));
  const double s = std::sqrt(c / q.c);
  const double peak = amp * q.value_at(0.0);
  const double edge = amp * q.value_at(s * 0.5 * std::min(box.L1, box.L2));
  if (edge > 1e-8 * peak) {
    fail(ErrorKind::BoxTooSmall, "soliton tail at the box edge is " + std::to_string(edge / peak) +
                                     " of its peak");
  }
  return sample_radial(box, center.first, center.second,
                       [&](double r, double, double) { return amp * q.value_at(s * r); });
}

}  // namespace zklab
