#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyntun/analysis.hpp"
#include "dyntun/classical.hpp"
#include "dyntun/params.hpp"
#include "dyntun/quantum.hpp"

namespace dyntun::app {

using json = nlohmann::ordered_json;

enum class Mode { scale, poincare, floquet, husimi, tunnel, heff_map, evolve };

std::string to_string(Mode mode);
std::optional<Mode> parse_mode(const std::string& name);

// One problem found while reading a config; `where` is "file:line" or "--set".
struct Issue {
  std::string where;
  std::string message;
};

std::string format_issues(const std::vector<Issue>& issues);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Issue> issues)
      : std::runtime_error(format_issues(issues)), issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

struct IslandOptions {
  std::optional<classical::PhasePoint> guess;
  classical::SeedLattice scan{0.2, 2.5, -1.0, 1.0, 24, 21};
};

struct PoincareOptions {
  int n_periods = 300;
  classical::SeedLattice lattice;
  bool find_islands = true;
};

struct FloquetOptions {
  std::vector<long> export_states;
  bool export_pair = false;
};

struct HusimiOptions {
  std::string state = "odd";  // odd | even | plus | minus | <index>
  analysis::PhaseSpaceWindow window;
  std::optional<double> width;
};

struct TunnelOptions {
  long s_max = 120;
  std::string initial = "plus";  // plus | approx
  double kappa_ini = 150.0;
  bool density = false;
};

struct InitialState {
  std::string type = "coherent";  // coherent | approx
  double x0 = 0.0;
  double p0 = 0.0;
  std::optional<double> width;
  double kappa_ini = 1.0;
};

struct EvolveOptions {
  InitialState initial;
  long s_max = 10;
  bool density = true;
};

struct ScaleOptions {
  double x_max_scaled = 8.0;
  double adiabatic_threshold = 10.0;
};

struct ExperimentConfig {
  Mode mode = Mode::scale;
  std::filesystem::path source;
  json document;  // after --set overrides

  std::optional<params::PhysicalParams> physical;
  std::optional<params::ScaledParams> scaled_from_physical;
  double kappa = 0.0;
  double epsilon = 0.0;
  double hbar_eff = 0.0;

  std::optional<quantum::SpatialGrid> grid;
  SplittingScheme scheme = SplittingScheme::blanes_moan4;
  long steps_per_period = 4096;
  long classical_steps_per_period = 4096;

  std::filesystem::path output_dir;

  ScaleOptions scale;
  IslandOptions island;
  PoincareOptions poincare;
  FloquetOptions floquet;
  HusimiOptions husimi;
  TunnelOptions tunnel;
  EvolveOptions evolve;
  std::optional<params::HeffSweep> heff;
};

struct LoadRequest {
  std::filesystem::path file;
  std::optional<Mode> mode;  // subcommand; absent for validate
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> output_dir;
  bool require_output = true;
};

// Throws dyntun::Error (io) when the file cannot be read and ConfigError
// listing every problem otherwise.
ExperimentConfig load_config(const LoadRequest& request);

// Parses JSON text and records the line of every key / array element,
// keyed by JSON pointer.
struct LocatedDocument {
  json document;
  std::map<std::string, std::size_t> lines;
};
LocatedDocument parse_located(const std::string& text, const std::string& source_name);

void apply_override(json& doc, const std::string& assignment);

}  // namespace dyntun::app
