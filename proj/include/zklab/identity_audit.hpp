#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "zklab/errors.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/radial_grid.hpp"
#include "zklab/spectral_gate.hpp"

namespace zklab {

struct IdentityItem {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityItem> items;
  GroundState ground;

  bool all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const IdentityItem& it) { return it.pass; });
  }
};

enum class IdentityScope {
  General,  // items valid for every (d, p)
  Cubic,    // adds the d = 2, p = 2 items
};

inline IdentityItem make_identity_item(std::string name, double lhs, double rhs, double tol) {
  IdentityItem it{std::move(name), lhs, rhs, 0.0, false};
  it.rel_err = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-30);
  it.pass = it.rel_err <= tol;
  return it;
}

/// Integral identities of the ground state, all as radial integrals with the
/// weight r^{d-1}; the angular factor is common to both sides and dropped.
inline IdentityReport audit_identities(const GroundState& q, double tol = 1e-5,
                                       IdentityScope scope = IdentityScope::Cubic) {
  if (scope == IdentityScope::Cubic && (q.d != 2 || q.p != 2.0)) {
    fail(ErrorKind::WrongRegime, "cubic identities need d = 2 and p = 2");
  }
  if (!(tol > 0.0)) fail(ErrorKind::ConfigError, "tolerance must be positive");
  const auto& g = q.profile.grid;
  const std::size_t n = g.size();
  const int k = q.d - 1;
  const auto& v = q.profile.values;
  const auto& dv = q.profile.derivs;

  std::vector<double> f(n);
  auto integrate = [&](auto&& fn) {
    for (std::size_t i = 0; i < n; ++i) f[i] = fn(i);
    return radial_quadrature(g, f, k);
  };
  const double grad2 = integrate([&](std::size_t i) { return dv[i] * dv[i]; });
  const double mass = integrate([&](std::size_t i) { return v[i] * v[i]; });
  const double pot = integrate([&](std::size_t i) { return std::pow(v[i], q.p + 1.0); });
  const auto lq = lambda_q(q);
  const double q_lq = integrate([&](std::size_t i) { return v[i] * lq.values[i]; });

  IdentityReport rep;
  rep.ground = q;
  rep.items.push_back(make_identity_item("pohozaev_energy", grad2 + q.c * mass, pot, tol));
  if (scope == IdentityScope::Cubic) {
    rep.items.push_back(make_identity_item("mass_vs_cubic", mass, 2.0 / 3.0 * pot, tol));
    rep.items.push_back(make_identity_item("gradient_split", 0.5 * grad2, 0.25 * mass, tol));
    const double h0 = 0.5 * grad2 - pot / 3.0;
    const double m0 = 0.5 * mass;
    rep.items.push_back(make_identity_item("energy_mass_ratio", h0 / m0, -0.5, tol));
  }
  const double cpd = 1.0 / (q.p - 1.0) - 0.25 * q.d;
  rep.items.push_back(make_identity_item("q_lambda_q", q_lq, cpd * mass, tol));

  // L(Lambda Q) = -Q, reported as |Q| + |L Lambda Q + Q| against |Q| so that
  // rel_err is the weighted L2 residual relative to |Q|.
  const auto llq = apply_linearized(q, lq.values);
  const double res2 = integrate([&](std::size_t i) {
    if (i + 1 == n) return 0.0;
    const double r = llq[i] + v[i];
    return r * r;
  });
  const double qnorm = std::sqrt(mass);
  rep.items.push_back(make_identity_item("lambda_q_equation", qnorm + std::sqrt(res2), qnorm, tol));
  return rep;
}

inline nlohmann::json to_json(const IdentityReport& rep) {
  auto items = nlohmann::json::array();
  for (const auto& it : rep.items) {
    items.push_back({{"name", it.name}, {"lhs", it.lhs}, {"rhs", it.rhs}, {"rel_err", it.rel_err},
                     {"pass", it.pass}});
  }
  return {{"d", rep.ground.d}, {"p", rep.ground.p}, {"c", rep.ground.c}, {"items", items}};
}

}  // namespace zklab
