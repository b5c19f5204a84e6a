#pragma once

#include <iosfwd>

#include "config.hpp"

namespace dyntun::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

// Runs one experiment, writing its outputs and finally manifest.json into
// cfg.output_dir. Module failures leave partial outputs and a manifest with
// status "incomplete". Progress and warnings go to `log`.
int run(const ExperimentConfig& cfg, int threads, std::ostream& log);

// Resolved numeric parameters recorded in the manifest.
json resolved_parameters(const ExperimentConfig& cfg);

}  // namespace dyntun::app
