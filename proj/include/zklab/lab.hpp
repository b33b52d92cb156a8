#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "zklab/coercivity.hpp"
#include "zklab/dispersion.hpp"
#include "zklab/identity_audit.hpp"
#include "zklab/lab_config.hpp"
#include "zklab/modulation.hpp"
#include "zklab/monotonicity.hpp"
#include "zklab/profile_io.hpp"
#include "zklab/spectral_gate.hpp"
#include "zklab/zk_evolver.hpp"

namespace zklab {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::IoError, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

/// Explicit count if positive, else ZKLAB_THREADS, else the hardware count.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ZKLAB_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) fail(ErrorKind::ConfigError, "ZKLAB_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// fn(0..count-1) on up to `threads` workers; results are stored by index.
/// The first failing index (not the first in time) is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int threads, F&& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        out[k] = fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t nt = std::min<std::size_t>(std::max(threads, 1), count);
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Artifact {
  std::string name;
  std::string bytes;
};

struct RunOptions {
  std::string output_dir;  // overrides the config's output_dir when set
  int threads = 0;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> artifacts;  // manifest order
  std::vector<std::string> hashes;
  nlohmann::json summary;
};

namespace detail {

inline std::string csv_line(std::initializer_list<std::string> cols) {
  std::string s;
  bool first = true;
  for (const auto& c : cols) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

inline std::string num(double v) { return format_double(v); }

/// Unit-H1 localized bump exp(-r^2/4)(1 + a y1 + b y2), a and b drawn from the seed.
inline Field2D seeded_bump(const Spectral2D& fft, double x1, double x2, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  const double a = unit() - 0.5;
  const double b = unit() - 0.5;
  Field2D g = sample_radial(fft.box(), x1, x2, [&](double r, double y1, double y2) {
    return std::exp(-0.25 * r * r) * (1.0 + a * y1 + b * y2);
  });
  const double nrm = h1_norm(fft, g);
  for (double& v : g.values) v /= nrm;
  return g;
}

inline void add_scaled(Field2D& u, const Field2D& g, double s) {
  for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] += s * g.values[k];
}

inline EvolveParams evolve_params(const ExperimentConfig& cfg) {
  EvolveParams ep;
  ep.dt = cfg.real("dt");
  ep.t_end = cfg.real("t_end");
  ep.output_every = static_cast<int>(cfg.integer("output_every"));
  ep.dealias = cfg.flag("dealias");
  ep.scheme = cfg.text("scheme") == "etdrk4" ? Scheme::ETDRK4 : Scheme::IMEXBDF2;
  return ep;
}

inline std::string modulation_header() { return "t,c,rho1,rho2,res1,res2,res3,eta_h1\n"; }

inline std::string modulation_row(double t, double c, double rho1, double rho2, const double* res, double eta) {
  return csv_line({num(t), num(c), num(rho1), num(rho2), num(res[0]), num(res[1]), num(res[2]), num(eta)});
}

constexpr double kFitTol = 1e-11;

struct Output {
  std::vector<Artifact> files;
  nlohmann::json summary;

  void add(std::string name, std::string bytes) { files.push_back({std::move(name), std::move(bytes)}); }
};

inline Output run_groundstate(const ExperimentConfig& cfg) {
  const auto q = solve_ground_state(static_cast<int>(cfg.integer("d")), cfg.real("p"), solver_config(cfg));
  Output out;
  std::ostringstream os;
  write_profile(os, q);
  out.add("profile.txt", os.str());
  const int k = q.d - 1;
  const auto& g = q.profile.grid;
  std::vector<double> q2(q.profile.size()), qp(q.profile.size()), dq2(q.profile.size());
  for (std::size_t i = 0; i < q2.size(); ++i) {
    const double v = q.profile.values[i];
    q2[i] = v * v;
    qp[i] = std::pow(std::abs(v), q.p + 1.0);
    dq2[i] = q.profile.derivs[i] * q.profile.derivs[i];
  }
  out.summary = {{"d", q.d},
                 {"p", q.p},
                 {"c", q.c},
                 {"rmax", g.rmax()},
                 {"n", q.profile.size()},
                 {"stencil_order", q.stencil_order},
                 {"newton_iterations", q.newton_iterations},
                 {"ode_residual", q.ode_residual_norm},
                 {"tail_rate", q.tail_rate},
                 {"q0", q.profile.values.front()},
                 {"int_q2", radial_quadrature(g, q2, k)},
                 {"int_qp1", radial_quadrature(g, qp, k)},
                 {"int_dq2", radial_quadrature(g, dq2, k)},
                 {"lambda_q_residual", lambda_q_identity_residual(q)}};
  return out;
}

inline Output run_scan(const ExperimentConfig& cfg, int threads) {
  struct Point {
    int d;
    double p;
  };
  std::vector<Point> pts;
  const auto& ds = cfg.integers("d");
  std::vector<std::size_t> order(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ds[a] < ds[b]; });
  const double step = cfg.real("p_step");
  for (std::size_t k : order) {
    const double lo = per_entry(cfg.reals("p_min"), k, "p_min");
    const double hi = per_entry(cfg.reals("p_max"), k, "p_max");
    const auto m = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long j = 0; j <= m; ++j) {
      // Snap to a 1e-10 lattice.
      const double p = std::round((lo + static_cast<double>(j) * step) * 1e10) / 1e10;
      pts.push_back({static_cast<int>(ds[k]), p});
    }
  }
  std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.d != b.d ? a.d < b.d : a.p < b.p;
  });
  const auto sc = solver_config(cfg);
  const auto recs = parallel_map<SpectralScanRecord>(pts.size(), threads, [&](std::size_t k) {
    return nu_value(pts[k].d, pts[k].p, sc);
  });
  Output out;
  std::string csv = "d,p,nu,neg_eigs,lambda0,rmax,n\n";
  auto rows = nlohmann::json::array();
  for (const auto& r : recs) {
    csv += csv_line({std::to_string(r.d), num(r.p), num(r.nu), std::to_string(r.neg_eigs), num(r.lambda0),
                     num(r.rmax), std::to_string(r.n)});
    rows.push_back({{"d", r.d},
                    {"p", r.p},
                    {"nu", r.nu},
                    {"neg_eigs", r.neg_eigs},
                    {"lambda0", r.lambda0},
                    {"newton_iterations", r.solver_meta.newton_iterations},
                    {"ode_residual", r.solver_meta.ode_residual},
                    {"lin_residual", r.solver_meta.lin_residual},
                    {"eig_residual", r.solver_meta.eig_residual}});
  }
  out.add("scan.csv", csv);
  out.summary = {{"rows", rows}};
  return out;
}

inline Output run_crossing(const ExperimentConfig& cfg, int threads) {
  const auto& ds = cfg.integers("d");
  const auto sc = solver_config(cfg);
  const double tol = cfg.real("tol");
  const auto ps = parallel_map<double>(ds.size(), threads, [&](std::size_t k) {
    return find_crossing(static_cast<int>(ds[k]), per_entry(cfg.reals("p_lo"), k, "p_lo"),
                         per_entry(cfg.reals("p_hi"), k, "p_hi"), tol, sc);
  });
  Output out;
  std::string csv = "d,p_star,p_lo,p_hi,tol\n";
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const double lo = per_entry(cfg.reals("p_lo"), k, "p_lo"), hi = per_entry(cfg.reals("p_hi"), k, "p_hi");
    csv += csv_line({std::to_string(ds[k]), num(ps[k]), num(lo), num(hi), num(tol)});
    rows.push_back({{"d", ds[k]}, {"p_star", ps[k]}});
  }
  out.add("crossings.csv", csv);
  out.summary = {{"crossings", rows}};
  return out;
}

inline Output run_identities(const ExperimentConfig& cfg) {
  const auto q = solve_ground_state(static_cast<int>(cfg.integer("d")), cfg.real("p"), solver_config(cfg));
  const auto scope = cfg.text("scope") == "cubic" ? IdentityScope::Cubic : IdentityScope::General;
  const auto rep = audit_identities(q, cfg.real("tol"), scope);
  Output out;
  const auto js = to_json(rep);
  out.add("identities.json", js.dump(2) + "\n");
  out.summary = {{"all_pass", rep.all_pass()}, {"report", js}};
  return out;
}

inline Output run_dispersion(const ExperimentConfig& cfg) {
  const auto ga = min_group_angle_detail();
  const long n = cfg.integer("samples");
  std::string csv = "r,tan_angle,angle\n";
  for (long k = 0; k < n; ++k) {
    const double r = std::exp(-4.0 + 8.0 * static_cast<double>(k) / static_cast<double>(n - 1));
    const double f = group_angle_objective(r);
    csv += csv_line({num(r), num(f), num(std::atan(f))});
  }
  Output out;
  out.add("group_angle.csv", csv);
  out.summary = {{"min_group_angle", ga.angle},
                 {"minimizer", ga.minimizer},
                 {"pi_over_3", std::numbers::pi / 3.0},
                 {"ckz_at_1_sqrt3", ckz_symbol({1.0, std::sqrt(3.0)})}};
  out.add("dispersion.json", out.summary.dump(2) + "\n");
  return out;
}

inline GroundState zk_ground_state(const ExperimentConfig& cfg) {
  return solve_ground_state(2, 2.0, solver_config(cfg));
}

inline Output run_evolve_soliton(const ExperimentConfig& cfg) {
  const auto q = zk_ground_state(cfg);
  const auto box = box_from(cfg.reals("box"));
  const double c = cfg.reals("c")[0];
  const double x1 = cfg.reals("center")[0] * box.L1, x2 = cfg.reals("center")[1] * box.L2;
  Spectral2D fft(box);
  Field2D u0 = init_soliton_field(box, q, c, {x1, x2});
  if (cfg.real("eps") > 0.0) {
    add_scaled(u0, seeded_bump(fft, x1 - 3.0, x2 + 2.0, static_cast<std::uint64_t>(cfg.integer("seed"))),
               cfg.real("eps"));
  }
  std::string mass_csv = "t,value\n", energy_csv = "t,value\n", mod_csv = modulation_header();
  double m0 = 0.0, h0 = 0.0, dm = 0.0, dh = 0.0;
  ModulationState guess{0.0, c, x1, x2};
  ModulationState first, last;
  bool have_first = false;
  double t_prev = 0.0;
  Observer obs = [&](double t, const Field2D& u) {
    const double m = mass(u), h = energy(fft, u, 2.0);
    if (!have_first) {
      m0 = m;
      h0 = h;
    }
    dm = std::max(dm, std::abs(m - m0) / m0);
    dh = std::max(dh, std::abs(h - h0) / std::abs(h0));
    mass_csv += csv_line({num(t), num(m)});
    energy_csv += csv_line({num(t), num(h)});
    guess.rho1 += guess.c * (t - t_prev);
    guess.t = t;
    t_prev = t;
    const auto fit = fit_modulation(u, q, guess, kFitTol);
    mod_csv += modulation_row(t, fit.c, fit.rho1, fit.rho2, fit.ortho_residuals.data(), fit.eta_h1);
    if (!have_first) first = fit;
    have_first = true;
    last = fit;
    guess = fit;
  };
  const auto tr = evolve(u0, evolve_params(cfg), {obs});
  Output out;
  out.add("mass.csv", mass_csv);
  out.add("energy.csv", energy_csv);
  out.add("modulation.csv", mod_csv);
  std::ostringstream snap;
  write_snapshot(snap, tr.final, tr.t);
  out.add("final.snap", snap.str());
  const double t_end = cfg.real("t_end");
  out.summary = {{"dt", tr.dt},
                 {"steps", tr.steps},
                 {"mass_drift", dm},
                 {"energy_drift", dh},
                 {"grid_spacing", box.dx1()},
                 {"displacement", last.rho1 - first.rho1},
                 {"speed", t_end > 0.0 ? (last.rho1 - first.rho1) / t_end : 0.0},
                 {"fit_initial", {{"c", first.c}, {"rho1", first.rho1}, {"rho2", first.rho2}}},
                 {"fit_final", {{"c", last.c}, {"rho1", last.rho1}, {"rho2", last.rho2}}},
                 {"planted", {{"c", c}, {"rho1", x1}, {"rho2", x2}}}};
  return out;
}

inline Output run_evolve_linearized(const ExperimentConfig& cfg) {
  const auto q = zk_ground_state(cfg);
  const auto box = box_from(cfg.reals("box"));
  const double c0 = cfg.reals("c")[0];
  const double x1 = 0.5 * box.L1, x2 = 0.5 * box.L2;
  Spectral2D fft(box);
  const auto bg = init_soliton_field(box, q, c0, {x1, x2});
  const auto smp = sample_soliton(box, q, c0, x1, x2);
  const auto ep = evolve_params(cfg);
  const auto& mode = cfg.text("mode");
  Output out;
  out.summary = nlohmann::json::object();

  if (mode != "generic") {
    Field2D eta0 = smp.d1;
    add_scaled(eta0, smp.d2, 0.5);
    const double peak = eta0.sup_norm();
    std::string csv = "t,value\n";
    double worst = 0.0;
    Observer obs = [&](double t, const Field2D& eta) {
      double dev = 0.0;
      for (std::size_t k = 0; k < eta.values.size(); ++k) dev = std::max(dev, std::abs(eta.values[k] - eta0.values[k]));
      dev /= peak;
      worst = std::max(worst, dev);
      csv += csv_line({num(t), num(dev)});
    };
    linearized_evolve(eta0, bg, c0, ep, {obs});
    out.add("stationarity.csv", csv);
    out.summary["translation_max_deviation"] = worst;
  }
  if (mode != "translation") {
    Field2D eta0 = seeded_bump(fft, x1 - 2.0, x2 + 1.0, static_cast<std::uint64_t>(cfg.integer("seed")));
    // d_1 Q, d_2 Q and Q are mutually orthogonal by parity.
    for (const Field2D* dir : {&smp.d1, &smp.d2, &smp.value}) {
      add_scaled(eta0, *dir, -inner(eta0, *dir) / inner(*dir, *dir));
    }
    const double L = cfg.real("L"), y0 = cfg.reals("y0")[0];
    std::vector<double> w(box.n1);
    for (std::size_t i = 0; i < box.n1; ++i) w[i] = psi(wrap_centered(box.x1(i) - x1, box.L1) + y0, L);
    std::string csv = "t,value\n";
    std::vector<double> values;
    Observer obs = [&](double t, const Field2D& eta) {
      double s = 0.0;
      for (std::size_t i = 0; i < box.n1; ++i) {
        for (std::size_t j = 0; j < box.n2; ++j) s += eta(i, j) * eta(i, j) * w[i];
      }
      s *= box.cell_area();
      values.push_back(s);
      csv += csv_line({num(t), num(s)});
    };
    linearized_evolve(eta0, bg, c0, ep, {obs});
    bool decreasing = true;
    for (std::size_t k = 1; k < values.size(); ++k) decreasing = decreasing && values[k] < values[k - 1];
    out.add("weighted_mass.csv", csv);
    out.summary["generic_orthogonality"] = {inner(eta0, smp.d1), inner(eta0, smp.d2), inner(eta0, smp.value)};
    out.summary["generic_initial"] = values.front();
    out.summary["generic_final"] = values.back();
    out.summary["generic_strictly_decreasing"] = decreasing;
  }
  return out;
}

inline Output run_evolve_multisoliton(const ExperimentConfig& cfg) {
  const auto q = zk_ground_state(cfg);
  const auto box = box_from(cfg.reals("box"));
  const auto& cs = cfg.reals("c");
  const std::size_t ns = cs.size();
  const double sep = cfg.real("L");
  const double x2 = 0.5 * box.L2;
  Spectral2D fft(box);
  Field2D u0(box);
  MultiModulationState guess;
  std::vector<double> lines(ns, 0.0);
  for (std::size_t j = 0; j < ns; ++j) {
    const double x1 = 0.25 * box.L1 + sep * static_cast<double>(j);
    add_scaled(u0, init_soliton_field(box, q, cs[j], {x1, x2}), 1.0);
    guess.solitons.push_back({cs[j], x1, x2});
    if (j > 0) lines[j] = x1 - 0.5 * sep;
  }
  if (cfg.real("eps") > 0.0) {
    add_scaled(u0,
               seeded_bump(fft, 0.25 * box.L1 - 3.0, x2 + 2.0, static_cast<std::uint64_t>(cfg.integer("seed"))),
               cfg.real("eps"));
  }
  std::vector<std::string> mod_csv(ns, modulation_header());
  std::string part_csv = "t,j,mass,d_proxy\n";
  std::vector<double> c_first(ns);
  double eta0 = -1.0, eta_sup = 0.0, drift = 0.0, deviation = 0.0, min_sep = 1e300;
  double t_prev = 0.0;
  Observer obs = [&](double t, const Field2D& u) {
    for (auto& s : guess.solitons) s.rho1 += s.c * (t - t_prev);
    t_prev = t;
    guess.t = t;
    const auto fit = fit_multi_modulation(u, q, guess, kFitTol);
    if (eta0 < 0.0) {
      eta0 = fit.eta_h1;
      for (std::size_t j = 0; j < ns; ++j) c_first[j] = fit.solitons[j].c;
    }
    eta_sup = std::max(eta_sup, fit.eta_h1);
    for (std::size_t j = 0; j < ns; ++j) {
      const auto& s = fit.solitons[j];
      drift = std::max(drift, std::abs(s.c - c_first[j]));
      deviation = std::max(deviation, std::abs(s.c - cs[j]));
      if (j > 0) min_sep = std::min(min_sep, s.rho1 - fit.solitons[j - 1].rho1);
      mod_csv[j] += modulation_row(t, s.c, s.rho1, s.rho2, &fit.ortho_residuals[3 * j], fit.eta_h1);
    }
    const auto pm = partition_masses(u, cs, t, cfg.real("A"), lines);
    for (std::size_t j = 0; j < ns; ++j) {
      part_csv += csv_line({num(t), std::to_string(j + 1), num(pm.mass[j]), num(pm.d_proxy[j])});
    }
    guess = fit;
  };
  const auto tr = evolve(u0, evolve_params(cfg), {obs});
  Output out;
  for (std::size_t j = 0; j < ns; ++j) out.add("modulation_" + std::to_string(j + 1) + ".csv", mod_csv[j]);
  out.add("partition.csv", part_csv);
  std::ostringstream snap;
  write_snapshot(snap, tr.final, tr.t);
  out.add("final.snap", snap.str());
  out.summary = {{"dt", tr.dt},
                 {"steps", tr.steps},
                 {"speed_drift", drift},
                 {"speed_deviation", deviation},
                 {"eta_initial", eta0},
                 {"eta_sup", eta_sup},
                 {"eta_ratio", eta_sup / eta0},
                 {"min_separation", min_sep}};
  return out;
}

inline Output run_probe_suite(const ExperimentConfig& cfg, int threads) {
  const auto q = zk_ground_state(cfg);
  const auto box = box_from(cfg.reals("box"));
  const double c = cfg.reals("c")[0];
  const double x1 = 0.25 * box.L1, x2 = 0.5 * box.L2;
  Spectral2D fft(box);
  Field2D u0 = init_soliton_field(box, q, c, {x1, x2});
  if (cfg.real("eps") > 0.0) {
    add_scaled(u0, seeded_bump(fft, x1 - 3.0, x2 + 2.0, static_cast<std::uint64_t>(cfg.integer("seed"))),
               cfg.real("eps"));
  }
  std::vector<double> times;
  std::vector<Field2D> snaps;
  std::vector<ModulationState> mods;
  std::string mod_csv = modulation_header();
  ModulationState guess{0.0, c, x1, x2};
  double t_prev = 0.0;
  Observer obs = [&](double t, const Field2D& u) {
    guess.rho1 += guess.c * (t - t_prev);
    guess.t = t;
    t_prev = t;
    const auto fit = fit_modulation(u, q, guess, kFitTol);
    mod_csv += modulation_row(t, fit.c, fit.rho1, fit.rho2, fit.ortho_residuals.data(), fit.eta_h1);
    times.push_back(t);
    snaps.push_back(u);
    mods.push_back(fit);
    guess = fit;
  };
  evolve(u0, evolve_params(cfg), {obs});

  const auto& t0s = cfg.reals("t0");
  const auto& y0s = cfg.reals("y0");
  const auto& thetas = cfg.reals("theta");
  const double M = cfg.real("M");
  const double dt_out = cfg.real("dt") * static_cast<double>(cfg.integer("output_every"));
  std::vector<std::size_t> t0_index;
  for (double t0 : t0s) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (std::abs(times[k] - t0) < std::abs(times[best] - t0)) best = k;
    }
    if (std::abs(times[best] - t0) > 1e-6 * dt_out) {
      fail(ErrorKind::ConfigError, "t0 = " + num(t0) + " is not an output time");
    }
    t0_index.push_back(best);
  }

  // One task per (t0, y0): samples for every t <= t0 and every probe.
  struct Task {
    std::size_t i0;
    double y0;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < t0s.size(); ++a) {
    for (double y0 : y0s) tasks.push_back({t0_index[a], y0});
  }
  const std::size_t nprobe = thetas.size() + 1;  // I at each theta, then J
  using Block = std::vector<std::vector<MonotonicitySample>>;
  const auto blocks = parallel_map<Block>(tasks.size(), threads, [&](std::size_t k) {
    const auto& task = tasks[k];
    const double t0 = times[task.i0];
    const auto frame = make_frame(mods[task.i0], t0, task.y0, M);
    Spectral2D local(box);
    Block b(nprobe);
    for (std::size_t i = 0; i <= task.i0; ++i) {
      for (std::size_t th = 0; th < thetas.size(); ++th) b[th].push_back(oblique_mass(snaps[i], frame, times[i], thetas[th]));
      b.back().push_back(localized_energy_J(local, snaps[i], frame, times[i]));
    }
    return b;
  });

  std::string probe_csv = "t,value,y0,t0,theta,kind\n";
  std::string defect_csv = "kind,theta,y0,defect\n";
  auto defects = nlohmann::json::array();
  for (std::size_t pr = 0; pr < nprobe; ++pr) {
    const bool is_j = pr == thetas.size();
    const char* kind = is_j ? "J" : "I";
    const double theta = is_j ? 0.0 : thetas[pr];
    std::vector<double> dvals;
    for (double y0 : y0s) {
      double dmax = 0.0;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        if (tasks[k].y0 != y0) continue;
        for (const auto& s : blocks[k][pr]) {
          probe_csv += csv_line({num(s.t), num(s.value), num(s.y0), num(s.t0), num(theta), kind});
        }
        dmax = std::max(dmax, monotonicity_defect(blocks[k][pr]));
      }
      dvals.push_back(dmax);
      defect_csv += csv_line({kind, num(theta), num(y0), num(dmax)});
    }
    const double rate = defect_decay_rate(y0s, dvals);
    defects.push_back({{"kind", kind},
                       {"theta", theta},
                       {"y0", y0s},
                       {"defect", dvals},
                       {"decay_rate", std::isfinite(rate) ? nlohmann::json(rate) : nlohmann::json(nullptr)}});
  }
  Output out;
  out.add("probe.csv", probe_csv);
  out.add("defects.csv", defect_csv);
  out.add("modulation.csv", mod_csv);
  out.summary = {{"M", M}, {"defects", defects}, {"eta_initial", mods.front().eta_h1}};
  return out;
}

inline Output run_coercivity(const ExperimentConfig& cfg, int threads) {
  const auto q = solve_ground_state(2, cfg.real("p"), solver_config(cfg));
  const auto box = box_from(cfg.reals("box"));
  const auto& pr = cfg.text("projection");
  std::vector<std::pair<Projection, std::string>> projs;
  if (pr == "none" || pr == "all") projs.emplace_back(Projection::None, "none");
  if (pr == "translations" || pr == "all") projs.emplace_back(Projection::Translations, "translations");
  if (pr == "full" || pr == "all") projs.emplace_back(Projection::Full, "full");
  struct Task {
    double A;
    long k;
    std::size_t proj;
  };
  std::vector<Task> tasks;
  for (double A : cfg.reals("A")) {
    for (long k : cfg.integers("k_modes")) {
      for (std::size_t p = 0; p < projs.size(); ++p) tasks.push_back({A, k, p});
    }
  }
  CoercivityOptions base;
  base.hermite_scale = cfg.real("hermite_scale");
  const auto res = parallel_map<CoercivityResult>(tasks.size(), threads, [&](std::size_t k) {
    auto opt = base;
    opt.projection = projs[tasks[k].proj].first;
    return coercivity_min_rayleigh(q, tasks[k].A, box, static_cast<int>(tasks[k].k), opt);
  });
  std::string csv = "A,k_modes,projection,min_quotient,basis_size,constrained_dim\n";
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& name = projs[tasks[k].proj].second;
    csv += csv_line({num(tasks[k].A), std::to_string(tasks[k].k), name, num(res[k].min_quotient),
                     std::to_string(res[k].basis_size), std::to_string(res[k].constrained_dim)});
    rows.push_back({{"A", tasks[k].A}, {"k_modes", tasks[k].k}, {"projection", name}, {"min_quotient", res[k].min_quotient}});
  }
  Output out;
  out.add("coercivity.csv", csv);
  out.summary = {{"rows", rows}};
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace detail

/// Executes a validated config. Nothing touches the disk until the whole
/// computation has succeeded. Artifacts: the per-kind files, config.txt,
/// summary.json and manifest.sha256 (sha256sum format, sorted by name).
inline RunResult run(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  validate_config(cfg);
  const int threads = resolve_threads(opt.threads);
  detail::Output out;
  switch (cfg.kind) {
    case ExperimentKind::GroundState: out = detail::run_groundstate(cfg); break;
    case ExperimentKind::SpectralScan: out = detail::run_scan(cfg, threads); break;
    case ExperimentKind::Crossing: out = detail::run_crossing(cfg, threads); break;
    case ExperimentKind::Identities: out = detail::run_identities(cfg); break;
    case ExperimentKind::Dispersion: out = detail::run_dispersion(cfg); break;
    case ExperimentKind::EvolveSoliton: out = detail::run_evolve_soliton(cfg); break;
    case ExperimentKind::EvolveLinearized: out = detail::run_evolve_linearized(cfg); break;
    case ExperimentKind::EvolveMultiSoliton: out = detail::run_evolve_multisoliton(cfg); break;
    case ExperimentKind::ProbeSuite: out = detail::run_probe_suite(cfg, threads); break;
    case ExperimentKind::Coercivity: out = detail::run_coercivity(cfg, threads); break;
  }
  out.summary["kind"] = to_string(cfg.kind);
  out.add("config.txt", canonical_text(cfg));
  out.add("summary.json", out.summary.dump(2) + "\n");
  std::sort(out.files.begin(), out.files.end(), [](const Artifact& a, const Artifact& b) { return a.name < b.name; });

  std::string dir = !opt.output_dir.empty() ? opt.output_dir : cfg.output_dir;
  if (dir.empty()) dir = "zklab-out/" + to_string(cfg.kind);
  RunResult res;
  res.dir = dir;
  res.summary = out.summary;
  std::error_code ec;
  std::filesystem::create_directories(res.dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
  std::string manifest;
  for (const auto& f : out.files) {
    detail::write_file(res.dir / f.name, f.bytes);
    const auto h = sha256_hex(f.bytes);
    manifest += h + "  " + f.name + "\n";
    res.artifacts.push_back(f.name);
    res.hashes.push_back(h);
  }
  detail::write_file(res.dir / "manifest.sha256", manifest);
  return res;
}

}  // namespace zklab
