#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "config.hpp"
#include "dyntun/error.hpp"
#include "run.hpp"

using namespace dyntun::app;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_run_flags) {
  sub->add_option("--config", c.config, "experiment config (JSON)")->required();
  sub->add_option("--set", c.sets, "override a config leaf: dotted.key=value")->take_all();
  if (with_run_flags) {
    sub->add_option("--out", c.out, "output directory (overrides \"output\")");
    sub->add_option("--threads", c.threads, "worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
  }
}

int execute(std::optional<Mode> mode, const Common& c) {
  LoadRequest req;
  req.file = c.config;
  req.mode = mode;
  req.overrides = c.sets;
  if (!c.out.empty()) req.output_dir = c.out;
  req.require_output = mode.has_value();
  try {
    const ExperimentConfig cfg = load_config(req);
    if (!mode) {
      std::cout << "valid: " << c.config << " (mode " << to_string(cfg.mode) << ")\n";
      return kExitOk;
    }
    const int threads = c.threads > 0
                            ? c.threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return run(cfg, threads, std::cerr);
  } catch (const ConfigError& e) {
    if (!mode) {
      std::cout << "invalid: " << c.config << '\n';
      for (const auto& i : e.issues()) std::cout << "  " << i.where << ": " << i.message << '\n';
    } else {
      std::cerr << e.what() << '\n';
    }
    return kExitConfig;
  } catch (const dyntun::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case dyntun::ErrorKind::io: return kExitIo;
      case dyntun::ErrorKind::invalid_argument: return kExitConfig;
      case dyntun::ErrorKind::numeric: return kExitNumeric;
    }
    return kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical tunnelling simulator for a driven quartic oscillator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DYNTUN_VERSION);

  Common common;
  std::optional<Mode> chosen;
  for (const char* name :
       {"scale", "poincare", "floquet", "husimi", "tunnel", "heff-map", "evolve"}) {
    auto* sub = app.add_subcommand(name, std::string("run mode ") + name);
    add_common(sub, common, true);
    sub->callback([&chosen, name] { chosen = parse_mode(name); });
  }
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  add_common(validate, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  return execute(chosen, common);
}
