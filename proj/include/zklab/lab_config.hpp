#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zklab/errors.hpp"
#include "zklab/field2d.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/profile_io.hpp"

namespace zklab {

enum class ExperimentKind {
  GroundState,
  SpectralScan,
  Crossing,
  Identities,
  Dispersion,
  EvolveSoliton,
  EvolveLinearized,
  EvolveMultiSoliton,
  ProbeSuite,
  Coercivity,
};

inline constexpr std::array<std::pair<ExperimentKind, std::string_view>, 10> kKindNames{{
    {ExperimentKind::GroundState, "groundstate"},
    {ExperimentKind::SpectralScan, "spectral-scan"},
    {ExperimentKind::Crossing, "crossing"},
    {ExperimentKind::Identities, "identities"},
    {ExperimentKind::Dispersion, "dispersion"},
    {ExperimentKind::EvolveSoliton, "evolve-soliton"},
    {ExperimentKind::EvolveLinearized, "evolve-linearized"},
    {ExperimentKind::EvolveMultiSoliton, "evolve-multisoliton"},
    {ExperimentKind::ProbeSuite, "probe-suite"},
    {ExperimentKind::Coercivity, "coercivity"},
}};

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return std::string(name);
  }
  return "unknown";
}

inline ExperimentKind parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  fail(ErrorKind::ConfigError, "unknown experiment kind '" + std::string(s) + "'");
}

enum class ValueType { Int, Real, IntList, RealList, Text, Flag };

using Value = std::variant<long, double, std::vector<long>, std::vector<double>, std::string, bool>;

struct KeySpec {
  std::string name;
  ValueType type;
  std::optional<std::string> fallback;  // nullopt: required
  std::string help;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline long parse_int(std::string_view s, const std::string& key) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorKind::ConfigError, "key '" + key + "' expects an integer, got '" + std::string(s) + "'");
  }
  return v;
}

/// A number, or pi scaled as in "pi", "-pi/6", "3*pi/4".
inline double parse_real(std::string_view s, const std::string& key) {
  auto bad = [&]() -> double {
    fail(ErrorKind::ConfigError, "key '" + key + "' expects a real number, got '" + std::string(s) + "'");
  };
  auto number = [&](std::string_view t) {
    try {
      return parse_double(t);
    } catch (const Error&) {
      return bad();
    }
  };
  if (s.empty()) return bad();
  double v = 0.0;
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) {
    v = number(s);
  } else {
    double mult = 1.0, div = 1.0;
    if (pi_pos == 1 && (s[0] == '-' || s[0] == '+')) {
      mult = s[0] == '-' ? -1.0 : 1.0;
    } else if (pi_pos > 0) {
      if (s[pi_pos - 1] != '*') return bad();
      mult = number(s.substr(0, pi_pos - 1));
    }
    const auto rest = s.substr(pi_pos + 2);
    if (!rest.empty()) {
      if (rest.front() != '/') return bad();
      div = number(rest.substr(1));
      if (div == 0.0) return bad();
    }
    v = mult * std::numbers::pi / div;
  }
  if (!std::isfinite(v)) return bad();
  return v;
}

inline bool parse_flag(std::string_view s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorKind::ConfigError, "key '" + key + "' expects true/false, got '" + std::string(s) + "'");
}

inline Value parse_value(const KeySpec& spec, std::string_view text) {
  text = trim(text);
  switch (spec.type) {
    case ValueType::Int: return parse_int(text, spec.name);
    case ValueType::Real: return parse_real(text, spec.name);
    case ValueType::IntList: {
      std::vector<long> out;
      for (auto part : split_list(text)) out.push_back(parse_int(part, spec.name));
      return out;
    }
    case ValueType::RealList: {
      std::vector<double> out;
      for (auto part : split_list(text)) out.push_back(parse_real(part, spec.name));
      return out;
    }
    case ValueType::Text:
      if (text.empty()) fail(ErrorKind::ConfigError, "key '" + spec.name + "' is empty");
      return std::string(text);
    case ValueType::Flag: return parse_flag(text, spec.name);
  }
  fail(ErrorKind::ConfigError, "bad schema entry for '" + spec.name + "'");
}

inline std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(long x) const { return std::to_string(x); }
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(const std::vector<long>& xs) const {
      std::string s;
      for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + std::to_string(xs[k]);
      return s;
    }
    std::string operator()(const std::vector<double>& xs) const {
      std::string s;
      for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + format_double(xs[k]);
      return s;
    }
    std::string operator()(const std::string& x) const { return x; }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
  };
  return std::visit(Visitor{}, v);
}

inline std::vector<KeySpec> radial_keys() {
  return {
      {"rmax", ValueType::Real, "50", "radial truncation radius"},
      {"n", ValueType::Int, "4096", "radial grid nodes"},
      {"stencil_order", ValueType::Int, "4", "radial finite-difference order (4 or 6)"},
  };
}

inline std::vector<KeySpec> run_keys(const char* box, const char* dt, const char* t_end, const char* every) {
  return {
      {"box", ValueType::RealList, box, "L1,L2,n1,n2"},
      {"dt", ValueType::Real, dt, "time step (0 = stability bound)"},
      {"t_end", ValueType::Real, t_end, "final time"},
      {"output_every", ValueType::Int, every, "steps between observer calls"},
      {"scheme", ValueType::Text, "etdrk4", "etdrk4 or imex-bdf2"},
      {"seed", ValueType::Int, "1", "seed of the perturbation coefficients"},
  };
}

}  // namespace detail

/// Keys accepted by each kind, with defaults.
inline std::vector<KeySpec> schema(ExperimentKind kind) {
  using detail::radial_keys;
  using detail::run_keys;
  std::vector<KeySpec> keys;
  auto add = [&](std::vector<KeySpec> more) { keys.insert(keys.end(), more.begin(), more.end()); };
  switch (kind) {
    case ExperimentKind::GroundState:
      add({{"d", ValueType::Int, std::nullopt, "dimension"}, {"p", ValueType::Real, std::nullopt, "power"}});
      add(radial_keys());
      break;
    case ExperimentKind::SpectralScan:
      add({{"d", ValueType::IntList, std::nullopt, "dimensions"},
           {"p_min", ValueType::RealList, std::nullopt, "first p, one per d or shared"},
           {"p_max", ValueType::RealList, std::nullopt, "last p, one per d or shared"},
           {"p_step", ValueType::Real, "0.05", "p increment"}});
      add(radial_keys());
      break;
    case ExperimentKind::Crossing:
      add({{"d", ValueType::IntList, std::nullopt, "dimensions"},
           {"p_lo", ValueType::RealList, std::nullopt, "lower bracket, one per d or shared"},
           {"p_hi", ValueType::RealList, std::nullopt, "upper bracket, one per d or shared"},
           {"tol", ValueType::Real, "1e-4", "bracket width"}});
      add(radial_keys());
      break;
    case ExperimentKind::Identities:
      add({{"d", ValueType::Int, "2", "dimension"},
           {"p", ValueType::Real, "2", "power"},
           {"tol", ValueType::Real, "1e-5", "relative tolerance"},
           {"scope", ValueType::Text, "cubic", "general or cubic"}});
      add(radial_keys());
      break;
    case ExperimentKind::Dispersion:
      add({{"samples", ValueType::Int, "65", "log-spaced ratios in the angle table"}});
      break;
    case ExperimentKind::EvolveSoliton:
      add(run_keys("40,40,128,128", "0.005", "10", "20"));
      add({{"c", ValueType::RealList, "1", "soliton speed"},
           {"center", ValueType::RealList, "0.5,0.5", "initial centre as fractions of the box"},
           {"eps", ValueType::Real, "0", "H1 size of the perturbation"},
           {"dealias", ValueType::Flag, "true", "2/3 rule"}});
      add(radial_keys());
      break;
    case ExperimentKind::EvolveLinearized:
      add(run_keys("80,40,256,128", "0.01", "5", "10"));
      add({{"c", ValueType::RealList, "1", "background speed"},
           {"mode", ValueType::Text, "both", "translation, generic or both"},
           {"L", ValueType::Real, "4", "scale of the weight"},
           {"y0", ValueType::RealList, "5", "offset of the weight left of the profile"},
           {"dealias", ValueType::Flag, "false", "2/3 rule"}});
      add(radial_keys());
      break;
    case ExperimentKind::EvolveMultiSoliton:
      add(run_keys("80,40,256,128", "0.005", "10", "100"));
      add({{"c", ValueType::RealList, "1,2", "speeds, increasing"},
           {"L", ValueType::Real, "20", "initial separation"},
           {"A", ValueType::Real, "4", "scale of the partition weights"},
           {"eps", ValueType::Real, "0.01", "H1 size of the perturbation"},
           {"dealias", ValueType::Flag, "true", "2/3 rule"}});
      add(radial_keys());
      break;
    case ExperimentKind::ProbeSuite:
      add(run_keys("80,40,256,128", "0.005", "10", "50"));
      add({{"c", ValueType::RealList, "1", "soliton speed"},
           {"eps", ValueType::Real, "0.01", "H1 size of the perturbation"},
           {"y0", ValueType::RealList, "5,10,15,20", "weight offsets"},
           {"theta", ValueType::RealList, "0,pi/6,pi/4", "oblique angles"},
           {"t0", ValueType::RealList, "5,7.5,10", "reference times"},
           {"M", ValueType::Real, "8", "weight scale"},
           {"dealias", ValueType::Flag, "true", "2/3 rule"}});
      add(radial_keys());
      break;
    case ExperimentKind::Coercivity:
      add({{"p", ValueType::Real, "2", "power"},
           {"box", ValueType::RealList, "40,40,128,128", "L1,L2,n1,n2"},
           {"A", ValueType::RealList, "10", "virial weight scales"},
           {"k_modes", ValueType::IntList, "91,120,153,210", "Hermite basis sizes"},
           {"projection", ValueType::Text, "all", "none, translations, full or all"},
           {"hermite_scale", ValueType::Real, "1", "Hermite function width"}});
      add(radial_keys());
      break;
  }
  return keys;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::GroundState;
  std::map<std::string, Value> params;
  std::string output_dir;

  const Value& at(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) fail(ErrorKind::ConfigError, "missing key '" + key + "'");
    return it->second;
  }
  template <class T>
  const T& get(const std::string& key) const {
    const auto* v = std::get_if<T>(&at(key));
    if (!v) fail(ErrorKind::ConfigError, "key '" + key + "' has the wrong type");
    return *v;
  }
  long integer(const std::string& key) const { return get<long>(key); }
  double real(const std::string& key) const { return get<double>(key); }
  const std::vector<long>& integers(const std::string& key) const { return get<std::vector<long>>(key); }
  const std::vector<double>& reals(const std::string& key) const { return get<std::vector<double>>(key); }
  const std::string& text(const std::string& key) const { return get<std::string>(key); }
  bool flag(const std::string& key) const { return get<bool>(key); }
};

namespace detail {

inline const KeySpec* find_key(const std::vector<KeySpec>& keys, std::string_view name) {
  for (const auto& k : keys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

inline Box2D box_from(const std::vector<double>& v) {
  if (v.size() != 4) fail(ErrorKind::ConfigError, "box needs L1,L2,n1,n2");
  for (int k = 2; k < 4; ++k) {
    if (!(v[k] >= 1.0) || v[k] != std::floor(v[k])) fail(ErrorKind::ConfigError, "box sizes must be integers");
  }
  Box2D box{v[0], v[1], static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])};
  box.validate();
  return box;
}

template <class T>
T per_entry(const std::vector<T>& v, std::size_t k, const char* key) {
  if (v.size() == 1) return v.front();
  if (k >= v.size()) fail(ErrorKind::ConfigError, std::string("list '") + key + "' is too short");
  return v[k];
}

inline void check_broadcast(std::size_t n, std::size_t m, const char* key) {
  if (m != 1 && m != n) fail(ErrorKind::ConfigError, std::string("list '") + key + "' needs one entry or one per d");
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::ConfigError, msg);
}

inline void validate_radial(const ExperimentConfig& c) {
  SolverConfig s;
  s.rmax = c.real("rmax");
  require(c.integer("n") >= 0, "n must be non-negative");
  s.n = static_cast<std::size_t>(c.integer("n"));
  s.stencil_order = static_cast<int>(c.integer("stencil_order"));
  s.validate();
}

inline void validate_run(const ExperimentConfig& c) {
  box_from(c.reals("box"));
  require(c.real("dt") >= 0.0, "dt must be non-negative");
  require(c.real("t_end") >= 0.0, "t_end must be non-negative");
  require(c.integer("output_every") >= 1, "output_every must be positive");
  const auto& s = c.text("scheme");
  require(s == "etdrk4" || s == "imex-bdf2", "scheme must be etdrk4 or imex-bdf2");
  require(c.integer("seed") >= 0, "seed must be non-negative");
  for (double v : c.reals("c")) require(v > 0.0, "speeds must be positive");
}

}  // namespace detail

/// Semantic checks beyond types. Runs before any artifact is written.
inline void validate_config(const ExperimentConfig& c) {
  using namespace detail;
  for (const auto& k : schema(c.kind)) {
    if (!c.params.count(k.name)) fail(ErrorKind::ConfigError, "missing required key '" + k.name + "'");
  }
  switch (c.kind) {
    case ExperimentKind::GroundState:
      check_dimension_power(static_cast<int>(c.integer("d")), c.real("p"));
      validate_radial(c);
      break;
    case ExperimentKind::SpectralScan: {
      const auto& ds = c.integers("d");
      require(!ds.empty(), "d list is empty");
      check_broadcast(ds.size(), c.reals("p_min").size(), "p_min");
      check_broadcast(ds.size(), c.reals("p_max").size(), "p_max");
      require(c.real("p_step") > 0.0, "p_step must be positive");
      for (std::size_t k = 0; k < ds.size(); ++k) {
        const double lo = per_entry(c.reals("p_min"), k, "p_min"), hi = per_entry(c.reals("p_max"), k, "p_max");
        require(lo <= hi, "p_min must not exceed p_max");
        check_dimension_power(static_cast<int>(ds[k]), lo);
        check_dimension_power(static_cast<int>(ds[k]), hi);
      }
      validate_radial(c);
      break;
    }
    case ExperimentKind::Crossing: {
      const auto& ds = c.integers("d");
      require(!ds.empty(), "d list is empty");
      check_broadcast(ds.size(), c.reals("p_lo").size(), "p_lo");
      check_broadcast(ds.size(), c.reals("p_hi").size(), "p_hi");
      require(c.real("tol") > 0.0, "tol must be positive");
      for (std::size_t k = 0; k < ds.size(); ++k) {
        const double lo = per_entry(c.reals("p_lo"), k, "p_lo"), hi = per_entry(c.reals("p_hi"), k, "p_hi");
        require(lo < hi, "p_lo must be below p_hi");
        check_dimension_power(static_cast<int>(ds[k]), lo);
        check_dimension_power(static_cast<int>(ds[k]), hi);
      }
      validate_radial(c);
      break;
    }
    case ExperimentKind::Identities: {
      check_dimension_power(static_cast<int>(c.integer("d")), c.real("p"));
      require(c.real("tol") > 0.0, "tol must be positive");
      const auto& s = c.text("scope");
      require(s == "general" || s == "cubic", "scope must be general or cubic");
      validate_radial(c);
      break;
    }
    case ExperimentKind::Dispersion:
      require(c.integer("samples") >= 2, "samples must be at least 2");
      break;
    case ExperimentKind::EvolveSoliton:
      validate_run(c);
      require(c.reals("c").size() == 1, "evolve-soliton takes one speed");
      require(c.reals("center").size() == 2, "center needs two fractions");
      for (double f : c.reals("center")) require(f >= 0.0 && f <= 1.0, "center fractions must lie in [0, 1]");
      require(c.real("eps") >= 0.0, "eps must be non-negative");
      validate_radial(c);
      break;
    case ExperimentKind::EvolveLinearized: {
      validate_run(c);
      require(c.reals("c").size() == 1, "evolve-linearized takes one background speed");
      const auto& m = c.text("mode");
      require(m == "translation" || m == "generic" || m == "both", "mode must be translation, generic or both");
      require(c.real("L") >= 4.0, "L must be at least 4");
      require(c.reals("y0").size() == 1 && c.reals("y0")[0] > 0.0, "y0 takes one positive offset");
      validate_radial(c);
      break;
    }
    case ExperimentKind::EvolveMultiSoliton: {
      validate_run(c);
      const auto& cs = c.reals("c");
      require(cs.size() >= 2, "evolve-multisoliton needs at least two speeds");
      for (std::size_t k = 1; k < cs.size(); ++k) require(cs[k] > cs[k - 1], "speeds must be increasing");
      require(c.real("L") > 0.0, "L must be positive");
      require(c.real("A") > 0.0, "A must be positive");
      require(c.real("eps") >= 0.0, "eps must be non-negative");
      const auto box = box_from(c.reals("box"));
      require(0.25 * box.L1 + c.real("L") * static_cast<double>(cs.size() - 1) < box.L1,
              "solitons do not fit in the box");
      validate_radial(c);
      break;
    }
    case ExperimentKind::ProbeSuite: {
      validate_run(c);
      require(c.reals("c").size() == 1, "probe-suite takes one speed");
      require(c.real("eps") >= 0.0, "eps must be non-negative");
      require(c.real("M") >= 4.0, "M must be at least 4");
      require(!c.reals("y0").empty(), "y0 list is empty");
      for (double y : c.reals("y0")) require(y > 0.0, "y0 values must be positive");
      for (double t0 : c.reals("t0")) require(t0 > 0.0 && t0 <= c.real("t_end"), "t0 must lie in (0, t_end]");
      require(c.real("dt") > 0.0, "probe-suite needs an explicit dt");
      for (double th : c.reals("theta")) {
        if (!(std::abs(th) < std::numbers::pi / 3.0)) {
          fail(ErrorKind::AngleOutOfRange, "oblique probes need |theta| < pi/3");
        }
      }
      validate_radial(c);
      break;
    }
    case ExperimentKind::Coercivity: {
      check_dimension_power(2, c.real("p"));
      box_from(c.reals("box"));
      require(!c.reals("A").empty(), "A list is empty");
      for (double a : c.reals("A")) require(a >= 1.0, "A must be at least 1");
      require(!c.integers("k_modes").empty(), "k_modes list is empty");
      for (long k : c.integers("k_modes")) require(k >= 1, "k_modes must be positive");
      const auto& pr = c.text("projection");
      require(pr == "none" || pr == "translations" || pr == "full" || pr == "all",
              "projection must be none, translations, full or all");
      require(c.real("hermite_scale") > 0.0, "hermite_scale must be positive");
      validate_radial(c);
      break;
    }
  }
}

/// Builds a config from key/value pairs: unknown keys are rejected, missing
/// keys take their defaults, then the whole config is validated.
inline ExperimentConfig make_config(ExperimentKind kind, const std::vector<std::pair<std::string, std::string>>& kv,
                                    std::string output_dir = {}) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.output_dir = std::move(output_dir);
  const auto keys = schema(kind);
  for (const auto& [key, text] : kv) {
    const auto* spec = detail::find_key(keys, key);
    if (!spec) fail(ErrorKind::ConfigError, "unknown key '" + key + "' for kind '" + to_string(kind) + "'");
    if (cfg.params.count(key)) fail(ErrorKind::ConfigError, "duplicate key '" + key + "'");
    cfg.params.emplace(key, detail::parse_value(*spec, text));
  }
  for (const auto& spec : keys) {
    if (cfg.params.count(spec.name)) continue;
    if (!spec.fallback) fail(ErrorKind::ConfigError, "missing required key '" + spec.name + "'");
    cfg.params.emplace(spec.name, detail::parse_value(spec, *spec.fallback));
  }
  validate_config(cfg);
  return cfg;
}

/// Parses "key = value" lines. '#' starts a comment; `kind` is mandatory and
/// `output_dir` is optional.
inline ExperimentConfig parse_config(std::string_view text) {
  std::optional<ExperimentKind> kind;
  std::string output_dir;
  std::vector<std::pair<std::string, std::string>> kv;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key == "kind") {
      if (kind) fail(ErrorKind::ConfigError, "duplicate key 'kind'");
      kind = parse_kind(value);
    } else if (key == "output_dir") {
      output_dir = value;
    } else {
      kv.emplace_back(key, value);
    }
  }
  if (!kind) fail(ErrorKind::ConfigError, "config has no 'kind'");
  return make_config(*kind, kv, output_dir);
}

/// Canonical text: kind first, then keys in sorted order. output_dir is left out.
inline std::string canonical_text(const ExperimentConfig& cfg) {
  std::string out = "kind = " + to_string(cfg.kind) + "\n";
  for (const auto& [key, value] : cfg.params) out += key + " = " + detail::format_value(value) + "\n";
  return out;
}

inline SolverConfig solver_config(const ExperimentConfig& cfg) {
  SolverConfig s;
  s.rmax = cfg.real("rmax");
  s.n = static_cast<std::size_t>(cfg.integer("n"));
  s.stencil_order = static_cast<int>(cfg.integer("stencil_order"));
  return s;
}

struct PresetInfo {
  std::string_view name;
  std::string_view summary;
};

inline constexpr std::array<PresetInfo, 12> kPresets{{
    {"appendix-a-d2", "nu for d = 2, p = 2 at rmax = 50"},
    {"crossings", "sign changes of nu in d = 1, 2, 3"},
    {"neg-eig-census", "negative eigenvalues over subcritical p in d = 1, 2, 3"},
    {"identities-d2", "integral identities of the d = 2 cubic ground state"},
    {"oracle-d1", "d = 1, p = 2 ground state against the sech^2 soliton"},
    {"cone-angle", "group-velocity cone and the CKZ symbol"},
    {"soliton-conservation", "mass, energy and speed of a single soliton run"},
    {"linear-liouville", "translation modes and a generic perturbation under the linearized flow"},
    {"monotonicity", "localized mass and energy defects on a perturbed soliton"},
    {"coercivity", "projected and unprojected minimum Rayleigh quotients of H_A"},
    {"modulation-fixed-point", "modulation fit of an exact sampled soliton"},
    {"nsoliton-2", "two decoupled solitons with c = 1, 2"},
}};

inline ExperimentConfig preset(std::string_view name) {
  using KV = std::vector<std::pair<std::string, std::string>>;
  if (name == "appendix-a-d2") {
    return make_config(ExperimentKind::SpectralScan, KV{{"d", "2"}, {"p_min", "2"}, {"p_max", "2"}, {"rmax", "50"}});
  }
  if (name == "crossings") {
    return make_config(ExperimentKind::Crossing,
                       KV{{"d", "1,2,3"}, {"p_lo", "2.5,1.9,1.6"}, {"p_hi", "3.2,2.5,2"}, {"tol", "1e-4"}});
  }
  if (name == "neg-eig-census") {
    return make_config(ExperimentKind::SpectralScan,
                       KV{{"d", "1,2,3"}, {"p_min", "1.8"}, {"p_max", "3.6,2.95,2.3"}, {"p_step", "0.05"}});
  }
  if (name == "identities-d2") {
    return make_config(ExperimentKind::Identities, KV{{"d", "2"}, {"p", "2"}, {"tol", "1e-5"}, {"scope", "cubic"}});
  }
  if (name == "oracle-d1") return make_config(ExperimentKind::GroundState, KV{{"d", "1"}, {"p", "2"}});
  if (name == "cone-angle") return make_config(ExperimentKind::Dispersion, KV{});
  if (name == "soliton-conservation") {
    return make_config(ExperimentKind::EvolveSoliton,
                       KV{{"box", "40,40,128,128"}, {"c", "1"}, {"dt", "0.005"}, {"t_end", "10"}});
  }
  if (name == "linear-liouville") {
    return make_config(ExperimentKind::EvolveLinearized,
                       KV{{"box", "80,40,256,128"}, {"dt", "0.01"}, {"t_end", "5"}, {"mode", "both"}});
  }
  if (name == "monotonicity") {
    return make_config(ExperimentKind::ProbeSuite, KV{{"box", "80,40,256,128"}, {"eps", "0.01"}, {"M", "8"}});
  }
  if (name == "coercivity") {
    return make_config(ExperimentKind::Coercivity, KV{{"A", "10"}, {"k_modes", "91,120,153,210"}});
  }
  if (name == "modulation-fixed-point") {
    return make_config(ExperimentKind::EvolveSoliton,
                       KV{{"c", "1.3"}, {"center", "0.4321,0.5678"}, {"t_end", "0"}, {"eps", "0"}});
  }
  if (name == "nsoliton-2") {
    return make_config(ExperimentKind::EvolveMultiSoliton,
                       KV{{"box", "80,40,256,128"}, {"c", "1,2"}, {"L", "20"}, {"eps", "0.01"}, {"t_end", "10"}});
  }
  fail(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

}  // namespace zklab
