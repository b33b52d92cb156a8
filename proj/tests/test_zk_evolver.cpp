#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "zklab/modulation.hpp"
#include "zklab/zk_evolver.hpp"

using namespace zklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

const GroundState& q2() {
  static const GroundState q = solve_ground_state(2, 2.0, SolverConfig{});
  return q;
}

Field2D plane_wave(const Box2D& box, double a, double k1, double k2, double t) {
  Field2D u(box);
  const double w = omega({k1, k2});
  for (std::size_t i = 0; i < box.n1; ++i) {
    for (std::size_t j = 0; j < box.n2; ++j) u(i, j) = a * std::cos(k1 * box.x1(i) + k2 * box.x2(j) - w * t);
  }
  return u;
}

}  // namespace

TEST_CASE("box and grid validation", "[field]") {
  CHECK_NOTHROW(Box2D{40, 40, 128, 64}.validate());
  CHECK_THROWS_AS((Box2D{40, 40, 96, 128}.validate()), Error);
  CHECK_THROWS_AS((Box2D{40, 40, 32, 32}.validate()), Error);
  CHECK_THROWS_AS((Box2D{0, 40, 64, 64}.validate()), Error);
}

TEST_CASE("mass and integral of simple fields", "[field]") {
  const Box2D box{10.0, 6.0, 64, 64};
  Field2D one(box);
  for (double& v : one.values) v = 1.0;
  CHECK_THAT(mass(one), WithinRel(60.0, 1e-14));
  CHECK_THAT(integral(one), WithinRel(60.0, 1e-14));
  const auto s = plane_wave(box, 1.0, 2 * kPi / 10.0, 0.0, 0.0);
  CHECK_THAT(mass(s), WithinRel(30.0, 1e-13));
  CHECK_THAT(integral(s), WithinAbs(0.0, 1e-12));
}

TEST_CASE("spectral derivatives of a plane wave", "[field]") {
  const Box2D box{10.0, 6.0, 64, 64};
  const double k1 = 2 * kPi * 3 / 10.0, k2 = 2 * kPi * 2 / 6.0;
  const auto u = plane_wave(box, 1.0, k1, k2, 0.0);
  Spectral2D fft(box);
  const auto d1 = fft.d1(u);
  const auto lap = fft.laplacian(u);
  double e1 = 0.0, el = 0.0;
  for (std::size_t i = 0; i < box.n1; ++i) {
    for (std::size_t j = 0; j < box.n2; ++j) {
      const double ph = k1 * box.x1(i) + k2 * box.x2(j);
      e1 = std::max(e1, std::abs(d1(i, j) + k1 * std::sin(ph)));
      el = std::max(el, std::abs(lap(i, j) + (k1 * k1 + k2 * k2) * std::cos(ph)));
    }
  }
  CHECK(e1 <= 1e-12);
  CHECK(el <= 1e-11);
  const auto back = fft.shift(fft.shift(u, 0.37, -1.2), -0.37, 1.2);
  for (std::size_t k = 0; k < u.values.size(); ++k) REQUIRE_THAT(back.values[k], WithinAbs(u.values[k], 1e-13));
}

TEST_CASE("two-thirds dealiasing mask", "[evolver]") {
  const Box2D box{40, 40, 64, 64};
  Spectral2D fft(box);
  const auto mask = dealias_mask(fft, true);
  std::size_t kept = 0;
  fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
    const std::size_t m1 = i <= 32 ? i : 64 - i;
    const bool keep = 3 * m1 < 64 && 3 * j < 64;
    if (keep) {
      ++kept;
      REQUIRE(mask[idx] == std::complex<double>(0.0, -fft.k1(i)));
    } else {
      REQUIRE(mask[idx] == std::complex<double>(0.0, 0.0));
    }
  });
  CHECK(kept == 43 * 22);
  const auto raw = dealias_mask(fft, false);
  fft.for_each_mode([&](std::size_t i, std::size_t, std::size_t idx) {
    if (i == 32) REQUIRE(raw[idx] == std::complex<double>(0.0, 0.0));
  });
}

TEST_CASE("linear stepper advances each mode by its exact phase", "[evolver]") {
  const Box2D box{20, 20, 64, 64};
  Spectral2D fft(box);
  const auto lin = zk_linear_symbol(fft);
  SpectralStepper st(lin, [](const Spectrum& v, Spectrum& out) { out.assign(v.size(), 0.0); }, 0.01,
                     Scheme::ETDRK4);
  const auto u = plane_wave(box, 1.0, 2 * kPi * 2 / 20, 2 * kPi * 5 / 20, 0.0);
  auto v = fft.forward(u.values);
  const auto v0 = v;
  for (int s = 0; s < 10; ++s) st.step(v);
  fft.for_each_mode([&](std::size_t i, std::size_t j, std::size_t idx) {
    const double w = omega({fft.k1(i), fft.k2(j)});
    const auto exact = fft.nyquist1(i) ? v0[idx] : v0[idx] * std::polar(1.0, -w * 0.1);
    REQUIRE(std::abs(v[idx] - exact) <= 1e-9 * (1.0 + std::abs(v0[idx])));
  });
}

TEST_CASE("small-amplitude plane wave follows the linear flow", "[evolver]") {
  const Box2D box{20, 20, 64, 64};
  const double k1 = 2 * kPi * 2 / 20, k2 = 2 * kPi * 1 / 20;
  const double a = 1e-6;
  for (auto scheme : {Scheme::ETDRK4, Scheme::IMEXBDF2}) {
    EvolveParams prm;
    prm.t_end = 1.0;
    prm.scheme = scheme;
    const auto tr = evolve(plane_wave(box, a, k1, k2, 0.0), prm);
    const auto exact = plane_wave(box, a, k1, k2, tr.t);
    double err = 0.0;
    for (std::size_t k = 0; k < exact.values.size(); ++k) err = std::max(err, std::abs(tr.final.values[k] - exact.values[k]));
    INFO(to_string(scheme));
    CHECK(err <= 1e-4 * a);
    CHECK_THAT(tr.t, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("zero data stays zero and t_end = 0 returns the input", "[evolver]") {
  const Box2D box{40, 40, 64, 64};
  EvolveParams prm;
  prm.dt = 0.01;
  prm.t_end = 0.1;
  const auto tr = evolve(Field2D(box), prm);
  CHECK(tr.final.sup_norm() == 0.0);
  CHECK(tr.steps == 10);

  Field2D u = plane_wave(box, 0.3, 2 * kPi / 40, 0.0, 0.0);
  EvolveParams none;
  int calls = 0;
  const auto tr0 = evolve(u, none, {[&](double t, const Field2D&) { ++calls; CHECK(t == 0.0); }});
  CHECK(calls == 1);
  CHECK(tr0.final.values == u.values);
  CHECK(tr0.steps == 0);
}

TEST_CASE("dt is fitted to t_end and IMEX respects the preflight bound", "[evolver]") {
  const Box2D box{40, 40, 64, 64};
  EvolveParams prm;
  prm.dt = 0.03;
  prm.t_end = 1.0;
  ZKEvolver ev(box, prm);
  CHECK_THAT(ev.dt(), WithinRel(1.0 / 34.0, 1e-14));
  EvolveParams imex = prm;
  imex.scheme = Scheme::IMEXBDF2;
  imex.dt = 10.0 * dt_bound(Spectral2D(box));
  CHECK(thrown_kind([&] { ZKEvolver bad(box, imex); }) == ErrorKind::ConfigError);
  EvolveParams neg;
  neg.dt = -1.0;
  CHECK(thrown_kind([&] { ZKEvolver bad(box, neg); }) == ErrorKind::ConfigError);
}

TEST_CASE("sampled soliton mass matches the radial integral", "[soliton]") {
  const Box2D box{40, 40, 128, 128};
  const auto u = init_soliton_field(box, q2(), 1.0, {20.0, 20.0});
  std::vector<double> f(q2().profile.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = q2().profile.values[i] * q2().profile.values[i];
  const double radial = 2 * kPi * radial_quadrature(q2().profile.grid, f, 1);
  CHECK_THAT(mass(u), WithinRel(radial, 1e-4));

  const auto u2 = init_soliton_field(box, q2(), 2.0, {20.0, 20.0});
  CHECK_THAT(mass(u2), WithinRel(2.0 * radial, 1e-4));
}

TEST_CASE("soliton placement is periodic", "[soliton]") {
  const Box2D box{40, 40, 128, 128};
  const auto a = init_soliton_field(box, q2(), 1.0, {7.0, 33.0});
  const auto b = init_soliton_field(box, q2(), 1.0, {47.0, -7.0});
  for (std::size_t k = 0; k < a.values.size(); ++k) REQUIRE_THAT(a.values[k], WithinAbs(b.values[k], 1e-13));
}

TEST_CASE("a box shorter than the soliton tail is refused", "[soliton]") {
  const Box2D box{16, 16, 64, 64};
  CHECK(thrown_kind([&] { init_soliton_field(box, q2(), 1.0, {8.0, 8.0}); }) == ErrorKind::BoxTooSmall);
  CHECK(thrown_kind([&] { init_soliton_field({40, 40, 128, 128}, q2(), -1.0, {8.0, 8.0}); }) ==
        ErrorKind::ConfigError);
}

TEST_CASE("short soliton run conserves mass and energy", "[soliton]") {
  const Box2D box{40, 40, 128, 128};
  const auto u0 = init_soliton_field(box, q2(), 1.0, {20.0, 20.0});
  EvolveParams prm;
  prm.dt = 0.005;
  prm.t_end = 0.5;
  const auto tr = evolve(u0, prm);
  Spectral2D fft(box);
  CHECK_THAT(mass(tr.final), WithinRel(mass(u0), 1e-8));
  CHECK_THAT(energy(fft, tr.final, 2.0), WithinRel(energy(fft, u0, 2.0), 1e-7));
}

TEST_CASE("linearized right-hand side on the kernel directions", "[linearized]") {
  const Box2D box{40, 40, 128, 128};
  const auto smp = sample_soliton(box, q2(), 1.0, 20.0, 20.0);
  LinearizedEvolver ev(smp.value, 1.0, 2.0, EvolveParams{0.01, 0.1, false});
  const auto lq = lambda_q(q2());
  const auto lq_field = sample_radial(box, 20.0, 20.0, [&](double r, double, double) {
    return r >= q2().profile.grid.rmax() ? 0.0 : lq.eval(r);
  });
  // L Lambda Q = -Q, so the rhs is -d_1 Q.
  const auto r1 = ev.rhs(lq_field);
  const auto r0 = ev.rhs(smp.d1);
  const double scale = smp.d1.sup_norm();
  double e1 = 0.0, e0 = 0.0;
  for (std::size_t k = 0; k < r1.values.size(); ++k) {
    e1 = std::max(e1, std::abs(r1.values[k] + smp.d1.values[k]));
    e0 = std::max(e0, std::abs(r0.values[k]));
  }
  CHECK(e1 / scale <= 1e-5);
  CHECK(e0 / scale <= 5e-5);
  CHECK(thrown_kind([&] { LinearizedEvolver bad(smp.value, 0.0, 2.0, EvolveParams{0.01, 0.1}); }) ==
        ErrorKind::ConfigError);
}

TEST_CASE("snapshot round trip is bit exact", "[io]") {
  const Box2D box{40, 20, 64, 128};
  auto u = plane_wave(box, 0.7, 2 * kPi / 40, 2 * kPi / 20, 0.3);
  u.values[5] = 1.0 / 3.0;
  std::stringstream ss;
  write_snapshot(ss, u, 2.5);
  const auto [v, t] = read_snapshot(ss);
  CHECK(t == 2.5);
  CHECK(v.box == u.box);
  CHECK(v.values == u.values);
  std::stringstream bad("ZKSNAPXX");
  CHECK(thrown_kind([&] { read_snapshot(bad); }) == ErrorKind::IoError);
}
