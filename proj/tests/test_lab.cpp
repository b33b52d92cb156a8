#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "zklab/lab.hpp"

using namespace zklab;
namespace fs = std::filesystem;

namespace {

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::path("lab_test_out") / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parsing", "[config]") {
  const auto cfg = parse_config(
      "# ground state\n"
      "kind = groundstate\n"
      "d = 2   # dimension\n"
      "p=2.5\n"
      "\n"
      "output_dir = somewhere\n");
  CHECK(cfg.kind == ExperimentKind::GroundState);
  CHECK(cfg.integer("d") == 2);
  CHECK(cfg.real("p") == 2.5);
  CHECK(cfg.real("rmax") == 50.0);
  CHECK(cfg.integer("n") == 4096);
  CHECK(cfg.output_dir == "somewhere");

  CHECK(thrown_kind([] { parse_config("kind = groundstate\nd = 2\np = 2\nbogus = 1\n"); }) ==
        ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = groundstate\nd = 2\nd = 3\np = 2\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("d = 2\np = 2\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = groundstate\nd = 2\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = groundstate\nd = 2\np = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = groundstate\nd = two\np = 2\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = nonsense\n"); }) == ErrorKind::ConfigError);
  CHECK(thrown_kind([] { parse_config("kind = groundstate\njust words\n"); }) == ErrorKind::ConfigError);
}

TEST_CASE("canonical text round trip", "[config]") {
  const auto cfg = parse_config("kind = probe-suite\ntheta = 0, pi/6\ny0 = 5,10\nM = 8\n");
  const auto text = canonical_text(cfg);
  CHECK(text.rfind("kind = probe-suite\n", 0) == 0);
  const auto again = parse_config(text);
  CHECK(canonical_text(again) == text);
  CHECK(again.params == cfg.params);
  const auto& th = cfg.reals("theta");
  REQUIRE(th.size() == 2);
  CHECK(th[1] == std::numbers::pi / 6);
}

TEST_CASE("pi expressions and angle limits", "[config]") {
  const auto cfg = parse_config("kind = probe-suite\ntheta = pi/4, -pi/6, 0\n");
  CHECK(cfg.reals("theta")[0] == std::numbers::pi / 4);
  CHECK(cfg.reals("theta")[1] == -std::numbers::pi / 6);
  const auto two = parse_config("kind = probe-suite\ntheta = 2*pi/13\n");
  CHECK(two.reals("theta")[0] == 2 * std::numbers::pi / 13);
  CHECK(thrown_kind([] { parse_config("kind = probe-suite\ntheta = pi/3\n"); }) == ErrorKind::AngleOutOfRange);
  CHECK(thrown_kind([] { parse_config("kind = probe-suite\ntheta = pi/x\n"); }) == ErrorKind::ConfigError);
}

TEST_CASE("semantic validation", "[config]") {
  using KV = std::vector<std::pair<std::string, std::string>>;
  CHECK(thrown_kind([] { make_config(ExperimentKind::EvolveSoliton, KV{{"box", "40,40,100,128"}}); }) ==
        ErrorKind::ConfigError);
  CHECK(thrown_kind([] { make_config(ExperimentKind::EvolveMultiSoliton, KV{{"c", "2,1"}}); }) ==
        ErrorKind::ConfigError);
  CHECK(thrown_kind([] { make_config(ExperimentKind::GroundState, KV{{"d", "2"}, {"p", "2"}, {"rmax", "10"}}); }) ==
        ErrorKind::ConfigError);
  CHECK(thrown_kind([] { make_config(ExperimentKind::ProbeSuite, KV{{"t0", "11"}}); }) == ErrorKind::ConfigError);
}

TEST_CASE("every preset builds", "[preset]") {
  for (const auto& info : kPresets) {
    INFO(info.name);
    const auto cfg = preset(info.name);
    CHECK_NOTHROW(validate_config(cfg));
    CHECK(canonical_text(parse_config(canonical_text(cfg))) == canonical_text(cfg));
  }
  CHECK(thrown_kind([] { preset("no-such-preset"); }) == ErrorKind::UnknownPreset);
  CHECK(preset("crossings").reals("p_lo") == std::vector<double>{2.5, 1.9, 1.6});
}

TEST_CASE("sha256 test vectors", "[lab]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("thread count resolution", "[lab]") {
  CHECK(resolve_threads(3) == 3);
  const char* env = std::getenv("ZKLAB_THREADS");
  if (env) CHECK(resolve_threads(0) == std::atoi(env));
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("parallel_map keeps index order and reports the lowest failure", "[lab]") {
  const auto sq = parallel_map<int>(50, 4, [](std::size_t k) { return static_cast<int>(k * k); });
  for (std::size_t k = 0; k < sq.size(); ++k) REQUIRE(sq[k] == static_cast<int>(k * k));
  try {
    parallel_map<int>(20, 4, [](std::size_t k) -> int {
      if (k == 7 || k == 13) throw std::runtime_error("index " + std::to_string(k));
      return 0;
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "index 7");
  }
}

TEST_CASE("runs are deterministic across thread counts", "[lab]") {
  using KV = std::vector<std::pair<std::string, std::string>>;
  const auto cfg = make_config(ExperimentKind::SpectralScan,
                               KV{{"d", "1,2"}, {"p_min", "1.9"}, {"p_max", "2.1"}, {"p_step", "0.1"}});
  const auto a = run(cfg, {scratch("scan1").string(), 1});
  const auto b = run(cfg, {scratch("scan2").string(), 2});
  CHECK(a.hashes == b.hashes);
  CHECK(a.artifacts == std::vector<std::string>{"config.txt", "scan.csv", "summary.json"});
  CHECK(slurp(a.dir / "manifest.sha256") == slurp(b.dir / "manifest.sha256"));
  const auto scan = slurp(a.dir / "scan.csv");
  CHECK(scan.rfind("d,p,nu,neg_eigs,lambda0,rmax,n\n", 0) == 0);
  for (std::size_t k = 0; k < a.artifacts.size(); ++k) {
    CHECK(sha256_hex(slurp(a.dir / a.artifacts[k])) == a.hashes[k]);
  }
  CHECK(a.summary.at("kind") == "spectral-scan");
}

TEST_CASE("groundstate run artifacts", "[lab]") {
  const auto cfg = parse_config("kind = groundstate\nd = 1\np = 2\n");
  const auto res = run(cfg, {scratch("gs").string(), 0});
  CHECK(res.artifacts == std::vector<std::string>{"config.txt", "profile.txt", "summary.json"});
  const double q0 = res.summary.at("q0").get<double>();
  CHECK(std::abs(q0 - 1.5) <= 1e-6);
  std::istringstream ps(slurp(res.dir / "profile.txt"));
  const auto back = read_profile(ps);
  CHECK(back.profile.values[0] == q0);
}

TEST_CASE("failed runs leave no artifacts", "[lab]") {
  const auto dir = scratch("bad");
  ExperimentConfig cfg = parse_config("kind = groundstate\nd = 2\np = 2\n");
  cfg.params["p"] = 1.0;
  CHECK(thrown_kind([&] { run(cfg, {dir.string(), 1}); }) == ErrorKind::ConfigError);
  CHECK_FALSE(fs::exists(dir));
}
