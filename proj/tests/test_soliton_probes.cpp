#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "zklab/coercivity.hpp"
#include "zklab/modulation.hpp"
#include "zklab/monotonicity.hpp"
#include "zklab/weights.hpp"

using namespace zklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

const GroundState& q2() {
  static const GroundState q = solve_ground_state(2, 2.0, SolverConfig{});
  return q;
}

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

Field2D bump(const Box2D& box, double a, double x1, double x2) {
  Field2D u(box);
  for (std::size_t i = 0; i < box.n1; ++i) {
    for (std::size_t j = 0; j < box.n2; ++j) {
      const double y1 = box.x1(i) - x1, y2 = box.x2(j) - x2;
      u(i, j) = a * (1.0 + 0.5 * y1) * std::exp(-(y1 * y1 + y2 * y2) / 4.0);
    }
  }
  return u;
}

// Orthogonality residuals of u - Q_c(. - rho) in the lab frame.
std::array<double, 3> ortho(const Field2D& u, double c, double r1, double r2) {
  const auto s = sample_soliton(u.box, q2(), c, r1, r2);
  Field2D eta = u;
  for (std::size_t k = 0; k < eta.values.size(); ++k) eta.values[k] -= s.value.values[k];
  return {inner(eta, s.d1), inner(eta, s.d2), inner(eta, s.value)};
}

// Compass search on |F|^2 over (c, rho1, rho2).
std::array<double, 3> compass_fit(const Field2D& u, std::array<double, 3> x) {
  auto cost = [&](const std::array<double, 3>& y) {
    const auto f = ortho(u, y[0], y[1], y[2]);
    return f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
  };
  double best = cost(x);
  std::array<double, 3> step{0.02, 0.05, 0.05};
  while (step[1] > 1e-8) {
    bool moved = false;
    for (int k = 0; k < 3; ++k) {
      for (double sgn : {1.0, -1.0}) {
        auto y = x;
        y[k] += sgn * step[k];
        const double cy = cost(y);
        if (cy < best) {
          best = cy;
          x = y;
          moved = true;
        }
      }
    }
    if (!moved) {
      for (double& s : step) s *= 0.5;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("psi weight", "[weights]") {
  for (double L : {4.0, 8.0}) {
    CHECK_THAT(psi(0.0, L), WithinAbs(0.5, 1e-15));
    for (double y : {-20.0, -3.0, 0.5, 7.0, 40.0}) {
      CHECK_THAT(psi(y, L) + psi(-y, L), WithinAbs(1.0, 1e-14));
      CHECK(psi_prime(y, L) > 0.0);
      const double h = 1e-5;
      CHECK_THAT(psi_prime(y, L), WithinAbs((psi(y + h, L) - psi(y - h, L)) / (2 * h), 1e-9));
      const double fd3 = (psi_prime(y + h, L) - 2 * psi_prime(y, L) + psi_prime(y - h, L)) / (h * h);
      CHECK_THAT(psi_third(y, L), WithinAbs(fd3, 1e-5));
      CHECK(std::abs(psi_third(y, L)) <= psi_prime(y, L) / (L * L) * (1 + 1e-12));
    }
  }
  CHECK(psi(-1e3, 4.0) >= 0.0);
  CHECK(psi(1e3, 4.0) <= 1.0);
}

TEST_CASE("virial weights", "[weights]") {
  double prev = phi(0.0);
  for (int i = 0; i <= 800; ++i) {
    const double x = i * 0.01;
    const double v = phi(x);
    REQUIRE(v <= prev + 1e-15);
    REQUIRE(v >= std::exp(-x) - 1e-15);
    REQUIRE(v <= 3.0 * std::exp(-x) + 1e-15);
    REQUIRE(phi(-x) == v);
    prev = v;
    const double h = 1e-6;
    REQUIRE_THAT(phi_deriv(x + 1e-3), WithinAbs((phi(x + 1e-3 + h) - phi(x + 1e-3 - h)) / (2 * h), 1e-7));
    REQUIRE_THAT(varphi(-x), WithinAbs(-varphi(x), 1e-15));
    REQUIRE_THAT((varphi(x + 1e-3 + h) - varphi(x + 1e-3 - h)) / (2 * h), WithinAbs(phi(x + 1e-3), 1e-7));
  }
  CHECK(phi(0.7) == 1.0);
  CHECK(varphi(0.4) == 0.4);
  CHECK(phi(2.0) == std::exp(-2.0));
}

TEST_CASE("modulation fit recovers planted parameters", "[modulation]") {
  const Box2D box{40, 40, 128, 128};
  const auto u = sample_soliton(box, q2(), 1.3, 17.3, 22.1).value;
  const ModulationState guess{0.0, 1.2, 17.0, 22.4};
  const auto fit = fit_modulation(u, q2(), guess, 1e-11);
  CHECK_THAT(fit.c, WithinAbs(1.3, 1e-8));
  CHECK_THAT(fit.rho1, WithinAbs(17.3, 1e-8));
  CHECK_THAT(fit.rho2, WithinAbs(22.1, 1e-8));
  for (double r : fit.ortho_residuals) CHECK(std::abs(r) <= 1e-11);
  CHECK(fit.eta_h1 <= 1e-6);

  const auto again = fit_modulation(u, q2(), fit, 1e-11);
  CHECK(again.iterations == 0);
  CHECK(again.c == fit.c);
  CHECK(again.rho1 == fit.rho1);
}

TEST_CASE("modulation fit agrees with a compass search under perturbation", "[modulation]") {
  const Box2D box{40, 40, 128, 128};
  auto u = sample_soliton(box, q2(), 1.0, 20.0, 20.0).value;
  const auto b = bump(box, 1e-3, 21.0, 19.0);
  for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] += b.values[k];
  const auto fit = fit_modulation(u, q2(), {0.0, 1.0, 20.0, 20.0}, 1e-12);
  const auto ref = compass_fit(u, {1.0, 20.0, 20.0});
  CHECK_THAT(fit.c, WithinAbs(ref[0], 1e-6));
  CHECK_THAT(fit.rho1, WithinAbs(ref[1], 1e-6));
  CHECK_THAT(fit.rho2, WithinAbs(ref[2], 1e-6));
  CHECK(std::abs(fit.c - 1.0) > 1e-6);
}

TEST_CASE("modulation fit failures", "[modulation]") {
  const Box2D box{40, 40, 128, 128};
  const auto u = sample_soliton(box, q2(), 1.0, 20.0, 20.0).value;
  CHECK(thrown_kind([&] { fit_modulation(u, q2(), {0.0, 1.0, NAN, 0.0}, 1e-10); }) == ErrorKind::FitDiverged);
  CHECK(thrown_kind([&] { fit_modulation(u, q2(), {0.0, 1.0, 20.0, 20.0}, 0.0); }) == ErrorKind::ConfigError);
  const Field2D zero(box);
  CHECK(thrown_kind([&] { fit_modulation(zero, q2(), {0.0, 1.0, 20.0, 20.0}, 1e-10); }) ==
        ErrorKind::FitDiverged);
}

TEST_CASE("localized mass and energy", "[monotonicity]") {
  const Box2D box{80, 40, 256, 128};
  const auto u = sample_soliton(box, q2(), 1.0, 40.0, 20.0).value;
  const double m = mass(u);

  const ProbeFrame near{5.0, 40.0, 20.0, 1.0, 1e-12, 8.0};
  CHECK_THAT(localized_mass_I(u, near, 5.0).value, WithinRel(0.5 * m, 1e-9));

  const ProbeFrame far{5.0, 40.0, 20.0, 1.0, 30.0, 8.0};
  const auto I = localized_mass_I(u, far, 5.0);
  CHECK(I.value < 0.03 * m);
  CHECK(oblique_mass(u, far, 5.0, 0.0).value == I.value);
  CHECK(oblique_mass(u, far, 5.0, kPi / 6).value > 0.0);
  CHECK(thrown_kind([&] { oblique_mass(u, far, 5.0, kPi / 3); }) == ErrorKind::AngleOutOfRange);
  CHECK(thrown_kind([&] { oblique_mass(u, far, 5.0, -kPi / 3); }) == ErrorKind::AngleOutOfRange);
  CHECK(thrown_kind([&] { localized_mass_I(u, far, 6.0); }) == ErrorKind::ConfigError);

  Spectral2D fft(box);
  const double h = energy(fft, u, 2.0);
  const auto J = localized_energy_J(fft, u, far, 5.0);
  CHECK(std::abs(J.value) < 0.05 * std::abs(2 * h));
  CHECK(localized_energy_J(fft, Field2D(box), far, 5.0).value == 0.0);
}

TEST_CASE("monotonicity defect and decay rate", "[monotonicity]") {
  std::vector<MonotonicitySample> s{{0.0, 1.0, 5, 2, 0}, {1.0, 1.5, 5, 2, 0}, {2.0, 1.2, 5, 2, 0}};
  CHECK_THAT(monotonicity_defect(s), WithinAbs(0.2, 1e-15));
  s[0].value = 3.0;
  CHECK(monotonicity_defect(s) == 0.0);
  s.pop_back();
  CHECK(thrown_kind([&] { monotonicity_defect(s); }) == ErrorKind::ConfigError);

  const std::vector<double> y0{5, 10, 15, 20};
  std::vector<double> d;
  for (double y : y0) d.push_back(3.0 * std::exp(-0.125 * y));
  CHECK_THAT(defect_decay_rate(y0, d), WithinAbs(0.125, 1e-12));
  CHECK(std::isnan(defect_decay_rate(y0, {0, 0, 0, 1e-3})));
}

TEST_CASE("partition masses of a two-soliton train", "[partition]") {
  const Box2D box{80, 40, 256, 128};
  const auto s1 = sample_soliton(box, q2(), 1.0, 20.0, 20.0).value;
  const auto s2 = sample_soliton(box, q2(), 2.0, 60.0, 20.0).value;
  Field2D u = s1;
  for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] += s2.values[k];
  const auto pm = partition_masses(u, {1.0, 2.0}, 0.0, 4.0, {0.0, 40.0});
  REQUIRE(pm.mass.size() == 2);
  CHECK_THAT(pm.mass[0], WithinRel(0.5 * mass(u), 1e-14));
  CHECK_THAT(pm.mass[1], WithinRel(0.5 * mass(s2), 1e-2));
  CHECK_THAT(pm.d_proxy[1], WithinRel(pm.mass[1] / pm.mass[0], 1e-14));
  // The dividing line moves at (c1 + c2)/2.
  const auto later = partition_masses(u, {1.0, 2.0}, 4.0, 4.0, {0.0, 34.0});
  CHECK_THAT(later.mass[1], WithinRel(pm.mass[1], 1e-12));
  CHECK(thrown_kind([&] { partition_masses(u, {2.0, 1.0}, 0.0, 4.0); }) == ErrorKind::ConfigError);
}

TEST_CASE("localized coercivity", "[coercivity]") {
  const Box2D box{40, 40, 128, 128};
  const auto& q = q2();
  double prev = 1e300;
  for (int k : {10, 21, 36}) {
    const auto r = coercivity_min_rayleigh(q, 10.0, box, k);
    CHECK(r.min_quotient <= prev + 1e-12);
    CHECK(r.min_quotient > 0.0);
    CHECK(r.basis_size == k);
    CHECK(r.constrained_dim == k - 3);
    prev = r.min_quotient;
  }
  CoercivityOptions none;
  none.projection = Projection::None;
  CHECK(coercivity_min_rayleigh(q, 10.0, box, 36, none).min_quotient < 0.0);

  const auto bg = coercivity_background(q, 10.0, box);
  CHECK(rayleigh_quotient(bg, bg.lambda_q) < 0.0);
  CHECK(std::abs(rayleigh_quotient(bg, bg.dq1)) < 1e-3);
  CHECK(thrown_kind([&] { coercivity_min_rayleigh(q, 0.5, box, 10); }) == ErrorKind::ConfigError);
}
