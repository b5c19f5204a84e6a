#include "config.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "dyntun/error.hpp"

namespace dyntun::app {

namespace {

const std::map<Mode, std::string>& mode_names() {
  static const std::map<Mode, std::string> names = {
      {Mode::scale, "scale"},     {Mode::poincare, "poincare"}, {Mode::floquet, "floquet"},
      {Mode::husimi, "husimi"},   {Mode::tunnel, "tunnel"},     {Mode::heff_map, "heff-map"},
      {Mode::evolve, "evolve"},
  };
  return names;
}

bool quantum_mode(Mode m) {
  return m == Mode::floquet || m == Mode::husimi || m == Mode::tunnel || m == Mode::evolve;
}

bool dynamical_mode(Mode m) { return m != Mode::scale && m != Mode::heff_map; }

// Input iterator over a string that counts the newlines it has stepped past,
// so the SAX callbacks can read off the current line.
class CountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* p, std::size_t* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  std::size_t* line_ = nullptr;
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

struct LineSax {
  const std::size_t* line;
  std::map<std::string, std::size_t>* lines;

  struct Frame {
    bool array;
    std::size_t index;
    std::string pointer;
    std::string key;
  };
  std::vector<Frame> stack;

  std::string value_pointer() {
    if (stack.empty()) return "";
    Frame& f = stack.back();
    if (f.array) {
      std::string p = f.pointer + "/" + std::to_string(f.index++);
      (*lines)[p] = *line;
      return p;
    }
    return f.pointer + "/" + escape_token(f.key);
  }
  bool scalar() {
    value_pointer();
    return true;
  }

  bool null() { return scalar(); }
  bool boolean(bool) { return scalar(); }
  bool number_integer(json::number_integer_t) { return scalar(); }
  bool number_unsigned(json::number_unsigned_t) { return scalar(); }
  bool number_float(json::number_float_t, const std::string&) { return scalar(); }
  bool string(std::string&) { return scalar(); }
  bool binary(json::binary_t&) { return scalar(); }
  bool start_object(std::size_t) {
    stack.push_back({false, 0, value_pointer(), {}});
    return true;
  }
  bool key(std::string& k) {
    stack.back().key = k;
    (*lines)[stack.back().pointer + "/" + escape_token(k)] = *line;
    return true;
  }
  bool end_object() {
    stack.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    stack.push_back({true, 0, value_pointer(), {}});
    return true;
  }
  bool end_array() {
    stack.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) {
    return false;
  }
};

std::string dotted(const std::string& pointer) {
  std::string out;
  for (char c : pointer.substr(pointer.empty() ? 0 : 1)) out += c == '/' ? '.' : c;
  return out.empty() ? "<root>" : out;
}

// Typed, line-addressed access to the config document. Problems are
// collected rather than thrown so `validate` can list all of them.
class Reader {
 public:
  Reader(const json& doc, std::map<std::string, std::size_t> lines, std::string source,
         std::set<std::string> overridden)
      : doc_(doc),
        lines_(std::move(lines)),
        source_(std::move(source)),
        overridden_(std::move(overridden)) {}

  std::string where(std::string pointer) const {
    for (;;) {
      if (overridden_.count(pointer)) return "--set " + dotted(pointer);
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return source_ + ":" + std::to_string(it->second);
      if (pointer.empty()) return source_;
      pointer = pointer.substr(0, pointer.rfind('/'));
    }
  }

  void issue(const std::string& pointer, const std::string& message) {
    issues_.push_back({where(pointer), dotted(pointer) + ": " + message});
  }
  void issue_plain(const std::string& pointer, const std::string& message) {
    issues_.push_back({where(pointer), message});
  }

  const json* find(const std::string& pointer) const {
    const json::json_pointer jp(pointer);
    if (!doc_.contains(jp)) return nullptr;
    return &doc_.at(jp);
  }
  bool has(const std::string& pointer) const { return find(pointer) != nullptr; }

  bool object(const std::string& pointer) {
    const json* v = find(pointer);
    if (!v) return false;
    if (!v->is_object()) {
      issue(pointer, "must be an object");
      return false;
    }
    return true;
  }

  std::optional<double> number(const std::string& pointer) {
    const json* v = find(pointer);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      issue(pointer, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      issue(pointer, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  double number_or(const std::string& pointer, double fallback) {
    return number(pointer).value_or(fallback);
  }

  std::optional<double> required_number(const std::string& pointer) {
    if (!has(pointer)) {
      issue(pointer, "missing");
      return std::nullopt;
    }
    return number(pointer);
  }

  std::optional<long> integer(const std::string& pointer) {
    const json* v = find(pointer);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      issue(pointer, "must be an integer");
      return std::nullopt;
    }
    return v->get<long>();
  }

  long integer_or(const std::string& pointer, long fallback) {
    return integer(pointer).value_or(fallback);
  }

  std::optional<std::string> string(const std::string& pointer) {
    const json* v = find(pointer);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      issue(pointer, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& pointer) {
    const json* v = find(pointer);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      issue(pointer, "must be true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  void allowed_keys(const std::string& pointer, const std::set<std::string>& keys) {
    const json* v = find(pointer);
    if (!v || !v->is_object()) return;
    for (const auto& [k, _] : v->items()) {
      if (!keys.count(k)) issue(pointer + "/" + escape_token(k), "unknown key");
    }
  }

  // Reads one quantity that may be spelled several ways, e.g. omega_m or
  // omega_m_over_2pi; each alternative carries its multiplier to SI.
  std::optional<double> alternatives(const std::string& block,
                                     const std::vector<std::pair<std::string, double>>& forms) {
    std::optional<double> value;
    std::vector<std::string> seen;
    for (const auto& [key, factor] : forms) {
      if (!has(block + "/" + key)) continue;
      seen.push_back(key);
      if (auto v = number(block + "/" + key)) value = *v * factor;
    }
    if (seen.size() > 1) {
      std::string list;
      for (const auto& s : seen) list += (list.empty() ? "" : ", ") + s;
      issue(block + "/" + seen[1], "given more than once (" + list + ")");
      return std::nullopt;
    }
    return value;
  }

  std::vector<Issue> take_issues() { return std::move(issues_); }
  bool ok() const { return issues_.empty(); }

 private:
  const json& doc_;
  std::map<std::string, std::size_t> lines_;
  std::string source_;
  std::set<std::string> overridden_;
  std::vector<Issue> issues_;
};

void read_lattice(Reader& r, const std::string& ptr, double& x_min, double& x_max, double& p_min,
                  double& p_max, int& nx, int& np) {
  if (!r.object(ptr)) return;
  r.allowed_keys(ptr, {"x_min", "x_max", "p_min", "p_max", "nx", "np"});
  x_min = r.number_or(ptr + "/x_min", x_min);
  x_max = r.number_or(ptr + "/x_max", x_max);
  p_min = r.number_or(ptr + "/p_min", p_min);
  p_max = r.number_or(ptr + "/p_max", p_max);
  nx = static_cast<int>(r.integer_or(ptr + "/nx", nx));
  np = static_cast<int>(r.integer_or(ptr + "/np", np));
  if (!(x_max > x_min)) r.issue(ptr, "needs x_max > x_min");
  if (!(p_max > p_min)) r.issue(ptr, "needs p_max > p_min");
  if (nx < 1 || np < 1) r.issue(ptr, "needs nx >= 1 and np >= 1");
}

// Reads the physical block. Keys listed in `free` may be absent (they are
// supplied later, e.g. by a sweep axis or constraint).
// Key to blame for a PhysicalParams violation: the spelling of the named
// quantity present in the block, else the block itself.
std::string violation_pointer(const Reader& r, const std::string& block, const std::string& v) {
  std::string field = v.substr(0, v.find(' '));
  if (field == "epsilon") field = "PA";
  for (const auto& key : {field, field + "_over_2pi", field + "_over_omega_m",
                          std::string(field == "Omega" ? "kappa" : "")}) {
    if (!key.empty() && r.has(block + "/" + key)) return block + "/" + key;
  }
  return block;
}

params::PhysicalParams read_physical(Reader& r, const std::set<std::string>& free) {
  using params::kTwoPi;
  const std::string b = "/physical";
  r.allowed_keys(b, {"m", "omega_m", "omega_m_over_2pi", "g4", "g4_over_2pi", "lambda_l", "P0",
                     "PA", "gamma_c", "gamma_c_over_2pi", "gamma_c_over_omega_m", "Omega",
                     "Omega_over_2pi", "kappa", "delta_c", "delta_c_over_2pi"});
  params::PhysicalParams p;
  auto need = [&](const std::string& name, std::optional<double> v, double& dst) {
    if (v) dst = *v;
    else if (!free.count(name)) r.issue(b + "/" + name, "missing");
  };
  need("m", r.number(b + "/m"), p.m);
  need("omega_m", r.alternatives(b, {{"omega_m", 1.0}, {"omega_m_over_2pi", kTwoPi}}),
       p.omega_m);
  need("g4", r.alternatives(b, {{"g4", 1.0}, {"g4_over_2pi", kTwoPi}}), p.g4);
  need("lambda_l", r.number(b + "/lambda_l"), p.lambda_l);
  need("P0", r.number(b + "/P0"), p.P0);
  p.PA = r.number_or(b + "/PA", 0.0);
  p.delta_c = r.alternatives(b, {{"delta_c", 1.0}, {"delta_c_over_2pi", kTwoPi}}).value_or(0.0);

  // gamma_c and Omega may be tied to omega_m.
  auto gamma = r.alternatives(b, {{"gamma_c", 1.0}, {"gamma_c_over_2pi", kTwoPi}});
  auto gamma_ratio = r.number(b + "/gamma_c_over_omega_m");
  if (free.count("omega_m") && (gamma_ratio || r.has(b + "/kappa"))) {
    r.issue(b, "omega_m is swept; tie gamma_c or Omega to it through heff_map.constraints");
  }
  if (gamma && gamma_ratio) {
    r.issue(b + "/gamma_c_over_omega_m", "given together with gamma_c");
  } else if (gamma_ratio) {
    p.gamma_c = *gamma_ratio * p.omega_m;
  } else {
    need("gamma_c", gamma, p.gamma_c);
  }
  auto omega = r.alternatives(b, {{"Omega", 1.0}, {"Omega_over_2pi", kTwoPi}});
  auto kappa = r.number(b + "/kappa");
  if (omega && kappa) {
    r.issue(b + "/kappa", "given together with Omega");
  } else if (kappa) {
    if (*kappa > 0.0) p.Omega = p.omega_m / std::sqrt(*kappa);
    else r.issue(b + "/kappa", "must be > 0");
  } else {
    need("Omega", omega, p.Omega);
  }
  return p;
}

void read_heff(Reader& r, ExperimentConfig& cfg) {
  const std::string b = "/heff_map";
  if (!r.has(b)) {
    r.issue(b, "missing (mode heff-map needs axis1/axis2)");
    return;
  }
  if (!r.object(b)) return;
  r.allowed_keys(b, {"axis1", "axis2", "constraints"});
  params::HeffSweep sweep;
  std::set<std::string> free;
  auto axis = [&](const std::string& name, params::SweepAxis& ax) {
    const std::string p = b + "/" + name;
    if (!r.has(p)) {
      r.issue(p, "missing");
      return;
    }
    if (!r.object(p)) return;
    r.allowed_keys(p, {"parameter", "min", "max", "count", "log"});
    if (auto s = r.string(p + "/parameter")) {
      if (auto param = params::parse_sweep_parameter(*s)) {
        ax.parameter = *param;
        free.insert(params::to_string(*param));
      } else {
        r.issue(p + "/parameter", "unknown sweep parameter '" + *s +
                                      "' (expected P0, omega_m, Omega, gamma_c or m)");
      }
    } else {
      r.issue(p + "/parameter", "missing");
    }
    ax.min = r.required_number(p + "/min").value_or(0.0);
    ax.max = r.number(p + "/max").value_or(ax.min);
    ax.count = static_cast<int>(r.integer_or(p + "/count", 1));
    ax.logarithmic = r.boolean(p + "/log").value_or(false);
    if (ax.count < 1) r.issue(p + "/count", "must be >= 1");
    if (!(ax.min > 0.0) || !(ax.max > 0.0)) r.issue(p, "bounds must be > 0");
  };
  axis("axis1", sweep.axis1);
  axis("axis2", sweep.axis2);
  const std::string c = b + "/constraints";
  if (r.object(c)) {
    r.allowed_keys(c, {"gamma_c_over_omega_m", "kappa"});
    sweep.constraints.gamma_c_over_omega_m = r.number(c + "/gamma_c_over_omega_m");
    sweep.constraints.kappa = r.number(c + "/kappa");
  }
  if (sweep.constraints.gamma_c_over_omega_m) free.insert("gamma_c");
  if (sweep.constraints.kappa) free.insert("Omega");
  if (!r.has("/physical")) {
    r.issue("/physical", "missing (mode heff-map sweeps around a physical parameter set)");
    return;
  }
  if (!r.object("/physical")) return;
  sweep.base = read_physical(r, free);
  if (r.ok()) {
    try {
      // Surfaces "parameter doubly determined" and axis problems before running.
      params::resolve_sweep_point(sweep, sweep.axis1.min, sweep.axis2.min);
    } catch (const Error& e) {
      r.issue_plain(b, e.what());
    }
  }
  cfg.heff = sweep;
}

}  // namespace

std::string to_string(Mode mode) { return mode_names().at(mode); }

std::optional<Mode> parse_mode(const std::string& name) {
  for (const auto& [m, s] : mode_names()) {
    if (s == name) return m;
  }
  return std::nullopt;
}

std::string format_issues(const std::vector<Issue>& issues) {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << '\n';
    out << issues[i].where << ": " << issues[i].message;
  }
  return out.str();
}

LocatedDocument parse_located(const std::string& text, const std::string& source_name) {
  LocatedDocument out;
  try {
    out.document = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError({{source_name + ":" + std::to_string(line) + ":" + std::to_string(col),
                        "invalid JSON: " + msg}});
  }
  std::size_t line = 1;
  LineSax sax{&line, &out.lines, {}};
  CountingIterator first(text.data(), &line);
  CountingIterator last(text.data() + text.size(), &line);
  json::sax_parse(first, last, &sax);
  out.lines[""] = 1;
  return out;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({{"--set " + assignment, "expected <dotted.key>=<value>"}});
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::stringstream parts(key);
  for (std::string part; std::getline(parts, part, '.');) {
    if (part.empty()) throw ConfigError({{"--set " + assignment, "empty key segment"}});
    pointer += "/" + escape_token(part);
  }
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare words are strings
  }
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError({{"--set " + assignment, e.what()}});
  }
}

ExperimentConfig load_config(const LoadRequest& request) {
  std::ifstream in(request.file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config file " + request.file.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "error reading config file " + request.file.string());

  const std::string source = request.file.filename().string();
  LocatedDocument located = parse_located(text, source);
  ExperimentConfig cfg;
  cfg.source = request.file;
  cfg.document = std::move(located.document);
  if (!cfg.document.is_object()) throw ConfigError({{source + ":1", "top level must be an object"}});

  std::set<std::string> overridden;
  for (const auto& a : request.overrides) {
    apply_override(cfg.document, a);
    const std::string key = a.substr(0, a.find('='));
    std::string pointer;
    std::stringstream parts(key);
    for (std::string part; std::getline(parts, part, '.');) pointer += "/" + escape_token(part);
    overridden.insert(pointer);
  }

  Reader r(cfg.document, std::move(located.lines), source, std::move(overridden));
  r.allowed_keys("", {"mode", "output", "physical", "scaled", "grid", "integrator", "scale",
                      "island", "poincare", "floquet", "husimi", "tunnel", "evolve", "heff_map",
                      "description"});

  // Mode: the subcommand decides; a "mode" key must agree with it.
  const auto declared = r.string("/mode");
  std::optional<Mode> mode = request.mode;
  if (declared) {
    auto parsed = parse_mode(*declared);
    if (!parsed) {
      r.issue("/mode", "unknown mode '" + *declared + "'");
    } else if (mode && *mode != *parsed) {
      r.issue("/mode", "config is for mode '" + *declared + "' but the subcommand is '" +
                           to_string(*mode) + "'");
    } else {
      mode = parsed;
    }
  }
  if (!mode) {
    if (!declared) r.issue("/mode", "missing (validate needs the config to name its mode)");
    throw ConfigError(r.take_issues());
  }
  cfg.mode = *mode;

  // Output directory.
  if (auto out = r.string("/output")) cfg.output_dir = *out;
  if (request.output_dir) cfg.output_dir = *request.output_dir;
  if (request.require_output && cfg.output_dir.empty()) {
    r.issue("/output", "no output directory (set \"output\" or pass --out)");
  }

  // Parameters.
  const bool has_phys = r.has("/physical");
  const bool has_scaled = r.has("/scaled");
  if (cfg.mode == Mode::heff_map) {
    if (has_scaled) r.issue("/scaled", "mode heff-map takes a physical block only");
    read_heff(r, cfg);
  } else if (has_phys == has_scaled) {
    r.issue(has_phys ? "/scaled" : "", "exactly one of \"physical\" or \"scaled\" is required");
  } else if (cfg.mode == Mode::scale && !has_phys) {
    r.issue("/scaled", "mode scale needs a physical block");
  } else if (has_phys) {
    if (r.object("/physical")) {
      auto p = read_physical(r, {});
      if (r.ok()) {
        for (const auto& v : p.violations()) {
          r.issue_plain(violation_pointer(r, "/physical", v), "physical: " + v);
        }
      }
      if (r.ok()) {
        cfg.physical = p;
        cfg.scaled_from_physical = params::scale(p);
        cfg.kappa = cfg.scaled_from_physical->kappa;
        cfg.epsilon = cfg.scaled_from_physical->epsilon;
        cfg.hbar_eff = cfg.scaled_from_physical->hbar_eff;
      }
    }
  } else if (r.object("/scaled")) {
    r.allowed_keys("/scaled", {"kappa", "epsilon", "hbar_eff"});
    const auto k = r.required_number("/scaled/kappa");
    const auto e = r.number("/scaled/epsilon");
    const auto h = r.number("/scaled/hbar_eff");
    if (k && !(*k > 0.0)) r.issue("/scaled/kappa", "must be > 0");
    if (e && !(*e >= 0.0)) r.issue("/scaled/epsilon", "must be >= 0");
    if (h && !(*h > 0.0)) r.issue("/scaled/hbar_eff", "must be > 0");
    if (quantum_mode(cfg.mode) && !h) r.issue("/scaled/hbar_eff", "missing");
    cfg.kappa = k.value_or(0.0);
    cfg.epsilon = e.value_or(0.0);
    cfg.hbar_eff = h.value_or(0.0);
  }

  // Grid and integrator.
  if (quantum_mode(cfg.mode)) {
    if (!r.has("/grid")) {
      r.issue("/grid", "missing (mode " + to_string(cfg.mode) + " needs a grid block)");
    } else if (r.object("/grid")) {
      r.allowed_keys("/grid", {"n", "x_max"});
      quantum::SpatialGrid g;
      g.n = static_cast<int>(r.integer("/grid/n").value_or(g.n));
      g.x_max = r.number("/grid/x_max").value_or(g.x_max);
      for (const auto& v : g.violations()) r.issue("/grid", v);
      cfg.grid = g;
    }
  }
  if (r.object("/integrator")) {
    r.allowed_keys("/integrator", {"scheme", "steps_per_period", "classical_steps_per_period"});
    if (auto s = r.string("/integrator/scheme")) {
      if (auto sc = parse_splitting_scheme(*s)) cfg.scheme = *sc;
      else r.issue("/integrator/scheme", "unknown scheme '" + *s + "' (strang, blanes-moan4)");
    }
    cfg.steps_per_period = r.integer_or("/integrator/steps_per_period", cfg.steps_per_period);
    cfg.classical_steps_per_period =
        r.integer_or("/integrator/classical_steps_per_period", cfg.classical_steps_per_period);
    if (cfg.steps_per_period < 1) r.issue("/integrator/steps_per_period", "must be >= 1");
    if (cfg.classical_steps_per_period < 1) {
      r.issue("/integrator/classical_steps_per_period", "must be >= 1");
    }
  }

  // Mode blocks.
  if (r.object("/scale")) {
    r.allowed_keys("/scale", {"x_max_scaled", "adiabatic_threshold"});
    cfg.scale.x_max_scaled = r.number_or("/scale/x_max_scaled", cfg.scale.x_max_scaled);
    cfg.scale.adiabatic_threshold =
        r.number_or("/scale/adiabatic_threshold", cfg.scale.adiabatic_threshold);
    if (!(cfg.scale.x_max_scaled > 0.0)) r.issue("/scale/x_max_scaled", "must be > 0");
  }
  if (r.object("/island")) {
    r.allowed_keys("/island", {"guess", "scan"});
    if (const json* g = r.find("/island/guess")) {
      if (g->is_array() && g->size() == 2 && (*g)[0].is_number() && (*g)[1].is_number()) {
        cfg.island.guess = classical::PhasePoint{(*g)[0].get<double>(), (*g)[1].get<double>()};
      } else {
        r.issue("/island/guess", "must be [x, p]");
      }
    }
    auto& s = cfg.island.scan;
    read_lattice(r, "/island/scan", s.x_min, s.x_max, s.p_min, s.p_max, s.nx, s.np);
  }
  if (r.object("/poincare")) {
    r.allowed_keys("/poincare", {"n_periods", "lattice", "find_islands"});
    cfg.poincare.n_periods = static_cast<int>(r.integer_or("/poincare/n_periods", 300));
    if (cfg.poincare.n_periods < 0) r.issue("/poincare/n_periods", "must be >= 0");
    cfg.poincare.find_islands = r.boolean("/poincare/find_islands").value_or(true);
    auto& l = cfg.poincare.lattice;
    read_lattice(r, "/poincare/lattice", l.x_min, l.x_max, l.p_min, l.p_max, l.nx, l.np);
  }
  if (r.object("/floquet")) {
    r.allowed_keys("/floquet", {"export_states", "export_pair"});
    if (const json* e = r.find("/floquet/export_states")) {
      if (e->is_array()) {
        for (std::size_t i = 0; i < e->size(); ++i) {
          if ((*e)[i].is_number_integer() && (*e)[i].get<long>() >= 0) {
            cfg.floquet.export_states.push_back((*e)[i].get<long>());
          } else {
            r.issue("/floquet/export_states/" + std::to_string(i), "must be an index >= 0");
          }
        }
      } else {
        r.issue("/floquet/export_states", "must be an array of indices");
      }
    }
    cfg.floquet.export_pair = r.boolean("/floquet/export_pair").value_or(false);
  }
  if (r.object("/husimi")) {
    r.allowed_keys("/husimi", {"state", "window", "width"});
    if (const json* s = r.find("/husimi/state")) {
      if (s->is_string()) {
        const auto v = s->get<std::string>();
        if (v != "odd" && v != "even" && v != "plus" && v != "minus") {
          r.issue("/husimi/state", "must be odd, even, plus, minus or a state index");
        }
        cfg.husimi.state = v;
      } else if (s->is_number_integer() && s->get<long>() >= 0) {
        cfg.husimi.state = std::to_string(s->get<long>());
      } else {
        r.issue("/husimi/state", "must be odd, even, plus, minus or a state index");
      }
    }
    auto& w = cfg.husimi.window;
    read_lattice(r, "/husimi/window", w.x_min, w.x_max, w.p_min, w.p_max, w.nx, w.np);
    cfg.husimi.width = r.number("/husimi/width");
    if (cfg.husimi.width && !(*cfg.husimi.width > 0.0)) r.issue("/husimi/width", "must be > 0");
  }
  if (r.object("/tunnel")) {
    r.allowed_keys("/tunnel", {"s_max", "initial", "kappa_ini", "density"});
    cfg.tunnel.s_max = r.integer_or("/tunnel/s_max", cfg.tunnel.s_max);
    if (cfg.tunnel.s_max < 0) r.issue("/tunnel/s_max", "must be >= 0");
    if (auto s = r.string("/tunnel/initial")) {
      if (*s != "plus" && *s != "approx") r.issue("/tunnel/initial", "must be plus or approx");
      cfg.tunnel.initial = *s;
    }
    cfg.tunnel.kappa_ini = r.number_or("/tunnel/kappa_ini", cfg.tunnel.kappa_ini);
    if (!(cfg.tunnel.kappa_ini > 0.0)) r.issue("/tunnel/kappa_ini", "must be > 0");
    cfg.tunnel.density = r.boolean("/tunnel/density").value_or(false);
  }
  if (r.object("/evolve")) {
    r.allowed_keys("/evolve", {"initial", "s_max", "density"});
    cfg.evolve.s_max = r.integer_or("/evolve/s_max", cfg.evolve.s_max);
    if (cfg.evolve.s_max < 0) r.issue("/evolve/s_max", "must be >= 0");
    cfg.evolve.density = r.boolean("/evolve/density").value_or(true);
    if (r.object("/evolve/initial")) {
      const std::string b = "/evolve/initial";
      r.allowed_keys(b, {"type", "x0", "p0", "width", "kappa_ini"});
      auto& init = cfg.evolve.initial;
      if (auto t = r.string(b + "/type")) {
        if (*t != "coherent" && *t != "approx") r.issue(b + "/type", "must be coherent or approx");
        init.type = *t;
      }
      init.x0 = r.number_or(b + "/x0", 0.0);
      init.p0 = r.number_or(b + "/p0", 0.0);
      init.width = r.number(b + "/width");
      init.kappa_ini = r.number_or(b + "/kappa_ini", 1.0);
      if (init.width && !(*init.width > 0.0)) r.issue(b + "/width", "must be > 0");
      if (!(init.kappa_ini > 0.0)) r.issue(b + "/kappa_ini", "must be > 0");
    }
  }

  // Cross-block checks that need resolved values.
  if (dynamical_mode(cfg.mode) && r.ok()) {
    if (!(cfg.kappa > 0.0)) r.issue("/scaled/kappa", "must be > 0");
  }
  if (quantum_mode(cfg.mode) && cfg.grid && r.ok()) {
    const double dx = cfg.grid->dx();
    if (cfg.hbar_eff > 0.0 && cfg.hbar_eff < 1e-6) {
      r.issue_plain(has_phys ? "/physical" : "/scaled/hbar_eff",
                    "hbar_eff = " + std::to_string(cfg.hbar_eff) +
                        " is too small for a grid simulation");
    } else if (!std::isfinite(dx)) {
      r.issue("/grid", "invalid spacing");
    }
  }

  auto issues = r.take_issues();
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

}  // namespace dyntun::app
