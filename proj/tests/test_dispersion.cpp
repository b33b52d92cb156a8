#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "zklab/dispersion.hpp"

using namespace zklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dispersion relation examples", "[dispersion]") {
  CHECK(omega({1.0, 0.0}) == -1.0);
  CHECK(omega({1.0, 1.0}) == -2.0);
  CHECK(omega({0.0, 3.0}) == 0.0);
  const auto [g1, g2] = group_velocity({1.0, 1.0});
  CHECK(g1 == -4.0);
  CHECK(g2 == -2.0);
}

TEST_CASE("group velocity is the gradient of omega", "[dispersion]") {
  const double h = 1e-5;
  for (auto k : {WaveVector{0.3, -1.2}, WaveVector{-2.0, 0.5}, WaveVector{1.1, 1.7}}) {
    const double d1 = (omega({k.k1 + h, k.k2}) - omega({k.k1 - h, k.k2})) / (2 * h);
    const double d2 = (omega({k.k1, k.k2 + h}) - omega({k.k1, k.k2 - h})) / (2 * h);
    const auto [g1, g2] = group_velocity(k);
    CHECK_THAT(g1, WithinAbs(d1, 1e-7));
    CHECK_THAT(g2, WithinAbs(d2, 1e-7));
  }
}

TEST_CASE("symmetries of the dispersion relation", "[dispersion]") {
  for (auto k : {WaveVector{0.3, -1.2}, WaveVector{-2.0, 0.5}}) {
    CHECK(omega({-k.k1, -k.k2}) == -omega(k));
    CHECK(omega({k.k1, -k.k2}) == omega(k));
    const auto [a1, a2] = group_velocity(k);
    const auto [b1, b2] = group_velocity({-k.k1, -k.k2});
    CHECK(a1 == b1);
    CHECK(a2 == b2);
    CHECK(a1 <= 0.0);
  }
}

TEST_CASE("minimal group angle", "[dispersion]") {
  CHECK_THAT(group_angle_objective(1.0 / std::sqrt(3.0)), WithinRel(std::sqrt(3.0), 1e-15));
  CHECK(group_angle_objective(1.0) == 2.0);
  const auto ga = min_group_angle_detail();
  CHECK_THAT(ga.angle, WithinAbs(std::numbers::pi / 3.0, 1e-12));
  CHECK_THAT(ga.minimizer, WithinRel(1.0 / std::sqrt(3.0), 1e-6));
  // Brute force over a log-spaced sweep never beats the minimum.
  double best = 1e300;
  for (int i = -4000; i <= 4000; ++i) best = std::min(best, group_angle_objective(std::exp(i * 1e-3)));
  CHECK(std::atan(best) >= min_group_angle() - 1e-15);
  CHECK_THAT(std::atan(best), WithinAbs(min_group_angle(), 1e-6));
}

TEST_CASE("cone symbol", "[dispersion]") {
  CHECK_THAT(ckz_symbol({1.0, std::sqrt(3.0)}), WithinAbs(0.0, 1e-14));
  CHECK(ckz_symbol({1.0, 0.0}) == 3.0);
  CHECK(ckz_symbol({0.0, 1.0}) == -1.0);
  CHECK(ckz_symbol({2.0, 1.0}) == 11.0);
}
