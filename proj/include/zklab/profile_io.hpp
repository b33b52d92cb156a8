#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "zklab/errors.hpp"
#include "zklab/ground_state.hpp"

namespace zklab {

inline constexpr const char* kProfileMagic = "zklab-profile 1";

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorKind::IoError, "cannot format number");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    fail(ErrorKind::IoError, "bad number '" + std::string(s) + "'");
  }
  return v;
}

inline void write_profile(std::ostream& os, const GroundState& q) {
  os << kProfileMagic << '\n';
  os << "d=" << q.d << '\n';
  os << "p=" << format_double(q.p) << '\n';
  os << "c=" << format_double(q.c) << '\n';
  os << "rmax=" << format_double(q.profile.grid.rmax()) << '\n';
  os << "n=" << q.profile.size() << '\n';
  os << "ode_residual=" << format_double(q.ode_residual_norm) << '\n';
  os << "tail_rate=" << format_double(q.tail_rate) << '\n';
  os << "stencil_order=" << q.stencil_order << '\n';
  for (std::size_t i = 0; i < q.profile.size(); ++i) {
    os << format_double(q.profile.grid[i]) << ' ' << format_double(q.profile.values[i]) << ' '
       << format_double(q.profile.derivs[i]) << '\n';
  }
}

inline GroundState read_profile(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kProfileMagic) fail(ErrorKind::IoError, "not a profile file");
  std::map<std::string, std::string> header;
  const char* required[] = {"d", "p", "c", "rmax", "n"};
  std::string data_line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      data_line = line;
      break;
    }
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : required) {
    if (!header.count(key)) fail(ErrorKind::IoError, std::string("profile header lacks ") + key);
  }
  GroundState q;
  q.d = std::stoi(header["d"]);
  q.p = parse_double(header["p"]);
  q.c = parse_double(header["c"]);
  const double rmax = parse_double(header["rmax"]);
  const auto n = static_cast<std::size_t>(std::stoull(header["n"]));
  if (header.count("ode_residual")) q.ode_residual_norm = parse_double(header["ode_residual"]);
  if (header.count("tail_rate")) q.tail_rate = parse_double(header["tail_rate"]);
  if (header.count("stencil_order")) q.stencil_order = std::stoi(header["stencil_order"]);
  q.profile.grid = RadialGrid(rmax, n);
  q.profile.values.resize(n);
  q.profile.derivs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      line = data_line;
    } else if (!std::getline(is, line)) {
      fail(ErrorKind::IoError, "profile truncated");
    }
    std::istringstream ls(line);
    std::string r, v, dv;
    if (!(ls >> r >> v >> dv)) fail(ErrorKind::IoError, "bad profile line " + std::to_string(i));
    if (parse_double(r) != q.profile.grid[i]) fail(ErrorKind::IoError, "profile grid mismatch");
    q.profile.values[i] = parse_double(v);
    q.profile.derivs[i] = parse_double(dv);
  }
  return q;
}

inline void save_profile(const std::string& path, const GroundState& q) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot open " + path);
  write_profile(os, q);
  if (!os) fail(ErrorKind::IoError, "write failed for " + path);
}

inline GroundState load_profile(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot open " + path);
  return read_profile(is);
}

}  // namespace zklab
