#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zklab/lab.hpp"

namespace {

struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd, const std::vector<zklab::KeySpec>& keys) {
    for (const auto& k : keys) {
      if (options.count(k.name)) continue;
      std::string help = k.help;
      if (k.fallback) help += " (default " + *k.fallback + ")";
      options[k.name] = cmd->add_option("--" + k.name, values[k.name], help);
    }
  }

  std::vector<std::pair<std::string, std::string>> given() const {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) kv.emplace_back(name, values.at(name));
    }
    return kv;
  }
};

int report(const zklab::Error& e) {
  std::cerr << "zklab-error: " << zklab::to_string(e.kind()) << ": " << e.what() << '\n';
  return zklab::exit_code(e.kind());
}

void print_result(const zklab::RunResult& r) {
  for (std::size_t k = 0; k < r.artifacts.size(); ++k) {
    std::cout << r.hashes[k] << "  " << (r.dir / r.artifacts[k]).string() << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) zklab::fail(zklab::ErrorKind::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zklab: ground states, spectral gate and ZK soliton dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output_dir;
  int threads = 0;
  app.add_option("--output-dir", output_dir, "artifact directory");
  app.add_option("--threads", threads, "worker threads (default: ZKLAB_THREADS or hardware)")
      ->check(CLI::PositiveNumber);

  using zklab::ExperimentKind;
  struct Direct {
    CLI::App* cmd;
    ExperimentKind kind;
    KeyFlags flags;
  };
  std::vector<std::pair<std::string, ExperimentKind>> direct_specs = {
      {"groundstate", ExperimentKind::GroundState}, {"scan", ExperimentKind::SpectralScan},
      {"crossing", ExperimentKind::Crossing},       {"identities", ExperimentKind::Identities},
      {"dispersion", ExperimentKind::Dispersion},   {"probe", ExperimentKind::ProbeSuite},
      {"coercivity", ExperimentKind::Coercivity},
  };
  std::vector<std::unique_ptr<Direct>> direct;
  for (const auto& [name, kind] : direct_specs) {
    auto d = std::make_unique<Direct>();
    d->cmd = app.add_subcommand(name, "run " + std::string(kind == ExperimentKind::Identities ? "an " : "a ") + std::string(zklab::to_string(kind)) + " experiment");
    d->kind = kind;
    d->flags.attach(d->cmd, zklab::schema(kind));
    direct.push_back(std::move(d));
  }

  auto* evolve_cmd = app.add_subcommand("evolve", "run an evolve-soliton, evolve-linearized or evolve-multisoliton experiment");
  std::string evolve_kind = "soliton";
  evolve_cmd->add_option("--kind", evolve_kind, "soliton, linearized or multisoliton")
      ->check(CLI::IsMember({"soliton", "linearized", "multisoliton"}));
  KeyFlags evolve_flags;
  for (auto k : {ExperimentKind::EvolveSoliton, ExperimentKind::EvolveLinearized, ExperimentKind::EvolveMultiSoliton}) {
    evolve_flags.attach(evolve_cmd, zklab::schema(k));
  }

  auto* preset_cmd = app.add_subcommand("preset", "run (or print) a frozen acceptance preset");
  std::string preset_name;
  bool preset_print = false, preset_list = false;
  preset_cmd->add_option("name", preset_name, "preset name");
  preset_cmd->add_flag("--print", preset_print, "print the config instead of running it");
  preset_cmd->add_flag("--list", preset_list, "list the presets");

  auto* run_cmd = app.add_subcommand("run", "run a config file");
  std::string config_path;
  run_cmd->add_option("config", config_path, "key = value config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(zklab::Error(zklab::ErrorKind::ConfigError, e.what()));
  }

  try {
    zklab::RunOptions opt{output_dir, threads};
    for (const auto& d : direct) {
      if (d->cmd->parsed()) {
        print_result(zklab::run(zklab::make_config(d->kind, d->flags.given()), opt));
        return 0;
      }
    }
    if (evolve_cmd->parsed()) {
      const auto kind = evolve_kind == "soliton"        ? ExperimentKind::EvolveSoliton
                        : evolve_kind == "linearized" ? ExperimentKind::EvolveLinearized
                                                        : ExperimentKind::EvolveMultiSoliton;
      print_result(zklab::run(zklab::make_config(kind, evolve_flags.given()), opt));
      return 0;
    }
    if (preset_cmd->parsed()) {
      if (preset_list) {
        for (const auto& p : zklab::kPresets) std::cout << p.name << "  " << p.summary << '\n';
        return 0;
      }
      if (preset_name.empty()) zklab::fail(zklab::ErrorKind::ConfigError, "preset needs a name (or --list)");
      auto cfg = zklab::preset(preset_name);
      if (preset_print) {
        std::cout << zklab::canonical_text(cfg);
        return 0;
      }
      if (opt.output_dir.empty()) opt.output_dir = "zklab-out/" + preset_name;
      print_result(zklab::run(cfg, opt));
      return 0;
    }
    if (run_cmd->parsed()) {
      print_result(zklab::run(zklab::parse_config(read_file(config_path)), opt));
      return 0;
    }
  } catch (const zklab::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "zklab-error: InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
