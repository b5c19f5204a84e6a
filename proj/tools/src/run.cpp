#include "run.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dyntun/analysis.hpp"
#include "dyntun/classical.hpp"
#include "dyntun/floquet.hpp"
#include "dyntun/params.hpp"
#include "dyntun/quantum.hpp"
#include "output.hpp"

#ifndef DYNTUN_VERSION
#define DYNTUN_VERSION "unknown"
#endif

namespace dyntun::app {

namespace {

using analysis::TunnellingPair;
using quantum::FloquetSpectrum;
using quantum::WaveFunction;

struct Context {
  const ExperimentConfig& cfg;
  OutputSet& out;
  int threads;
  std::ostream& log;
  json resolved;
  std::vector<std::string> flags;
  std::vector<std::string> warnings;

  void warn(const std::string& w) {
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
      warnings.push_back(w);
      log << "warning: " << w << '\n';
    }
  }
  void absorb(const quantum::Diagnostics& d) {
    for (const auto& w : d.warnings) warn(w);
  }
};

json physical_json(const params::PhysicalParams& p) {
  return {{"m", p.m},         {"omega_m", p.omega_m}, {"g4", p.g4},
          {"lambda_l", p.lambda_l}, {"P0", p.P0},     {"PA", p.PA},
          {"gamma_c", p.gamma_c},   {"Omega", p.Omega}, {"delta_c", p.delta_c}};
}

json axis_json(const params::SweepAxis& a) {
  return {{"parameter", params::to_string(a.parameter)},
          {"min", a.min},
          {"max", a.max},
          {"count", a.count},
          {"log", a.logarithmic}};
}

classical::Drive drive(const ExperimentConfig& cfg) { return {cfg.kappa, cfg.epsilon}; }

classical::IntegratorConfig classical_integrator(const ExperimentConfig& cfg) {
  classical::IntegratorConfig ic;
  ic.dt = classical::kDrivePeriod / static_cast<double>(cfg.classical_steps_per_period);
  ic.scheme = cfg.scheme;
  return ic;
}

quantum::Model model(const ExperimentConfig& cfg) {
  quantum::Model m;
  m.potential = quantum::Potential::driven(cfg.kappa, cfg.epsilon);
  m.hbar_eff = cfg.hbar_eff;
  m.grid = *cfg.grid;
  m.dt = quantum::kDrivePeriod / static_cast<double>(cfg.steps_per_period);
  m.scheme = cfg.scheme;
  return m;
}

json fixed_point_json(const std::string& label, const classical::FixedPoint& fp) {
  return {{"label", label},
          {"x0", fp.x0},
          {"p0", fp.p0},
          {"residual", fp.residual},
          {"trace", fp.monodromy_trace},
          {"det", fp.monodromy_det},
          {"stability", classical::to_string(fp.stability)}};
}

// The right-hand island centre (x0 > 0).
classical::FixedPoint locate_island(Context& ctx) {
  const auto d = drive(ctx.cfg);
  const auto ic = classical_integrator(ctx.cfg);
  const classical::PhasePoint guess =
      ctx.cfg.island.guess ? *ctx.cfg.island.guess
                           : classical::scan_for_period_one(ctx.cfg.island.scan, d, ic);
  auto fp = classical::find_period_one_island(guess, d, ic);
  if (fp.x0 < 0.0) {
    fp.x0 = -fp.x0;
    fp.p0 = -fp.p0;
  }
  ctx.resolved["island"] = fixed_point_json("plus", fp);
  return fp;
}

FloquetSpectrum compute_spectrum(Context& ctx) {
  const auto m = model(ctx.cfg);
  const std::string res = m.grid.resolution_warning(m.hbar_eff, m.p_interest, m.cutoff_safety);
  if (!res.empty()) ctx.warn(res);
  ctx.log << "building one-period propagator (n = " << m.grid.n << ")\n";
  quantum::Diagnostics diag;
  const auto blocks = quantum::build_propagator(m, quantum::kDrivePeriod, ctx.threads, &diag);
  ctx.absorb(diag);
  ctx.resolved["propagator"] = {
      {"even_block", blocks.even.rows()},
      {"odd_block", blocks.odd.rows()},
      {"parity_leakage", blocks.parity_leakage},
      {"unitarity_defect",
       std::max(quantum::unitarity_defect(blocks.even), quantum::unitarity_defect(blocks.odd))}};
  ctx.log << "diagonalising\n";
  return quantum::floquet_decompose(blocks);
}

json spectrum_json(const FloquetSpectrum& spec) {
  json parity = json::array();
  json energies = json::array();
  json moduli = json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    parity.push_back(quantum::to_string(spec.parity[i]));
    energies.push_back(spec.quasi_energies[i]);
    moduli.push_back(spec.eigenvalue_moduli[i]);
  }
  return {{"hbar_eff", spec.hbar_eff},
          {"period", spec.period},
          {"parity", parity},
          {"E_n", energies},
          {"abs_xi", moduli}};
}

void write_state(Context& ctx, const std::string& name, const WaveFunction& psi) {
  Csv csv("x,re,im");
  const auto& g = psi.grid();
  for (int j = 0; j < g.n; ++j) {
    const auto a = psi.amplitudes()[j];
    csv.row(g.x(j), a.real(), a.imag());
  }
  ctx.out.write(name, csv.text());
}

analysis::PairSearch pair_search(const classical::FixedPoint& island) {
  analysis::PairSearch ps;
  ps.island_x = island.x0;
  ps.island_p = island.p0;
  return ps;
}

TunnellingPair locate_pair(Context& ctx, const FloquetSpectrum& spec,
                           const classical::FixedPoint& island) {
  const auto ps = pair_search(island);
  const auto pair = analysis::find_tunnelling_pair(spec, ps);
  json j = {{"u", pair.u},
            {"v", pair.v},
            {"parity_u", "odd"},
            {"parity_v", "even"},
            {"E_u", pair.E_u},
            {"E_v", pair.E_v},
            {"splitting", pair.splitting},
            {"overlap_u", pair.overlap_u},
            {"overlap_v", pair.overlap_v},
            {"relative_phase", pair.relative_phase},
            {"hbar_eff", pair.hbar_eff},
            {"island", {{"x0", island.x0}, {"p0", island.p0}}},
            {"coherent_width", analysis::default_coherent_width(spec.hbar_eff)}};
  if (pair.T_tun > 0.0) {
    j["T_tun"] = pair.T_tun;
    j["T_tun_periods"] = pair.T_tun / spec.period;
  } else {
    j["T_tun"] = nullptr;
    j["T_tun_periods"] = nullptr;
    ctx.flags.push_back("degenerate pair");
  }
  ctx.out.write_json("pair.json", j);
  ctx.resolved["pair"] = {{"u", pair.u}, {"v", pair.v}, {"splitting", pair.splitting}};
  return pair;
}

void write_density(Context& ctx, const quantum::StroboscopicDensity& d) {
  Csv csv("s,x,rho");
  const auto& g = d.final_state.grid();
  for (Eigen::Index s = 0; s < d.rho.rows(); ++s) {
    for (int j = 0; j < g.n; ++j) csv.row(static_cast<long>(s), g.x(j), d.rho(s, j));
  }
  ctx.out.write("density.csv", csv.text());
  double drift = 0.0;
  for (double n : d.norms) drift = std::max(drift, std::abs(n - 1.0));
  ctx.resolved["max_norm_deviation"] = drift;
}

// ---- modes ----

void run_scale(Context& ctx) {
  const auto& p = *ctx.cfg.physical;
  const auto& s = *ctx.cfg.scaled_from_physical;
  const auto adi = params::adiabaticity_check(p, ctx.cfg.scale.x_max_scaled,
                                              ctx.cfg.scale.adiabatic_threshold);
  json j = {{"kappa", s.kappa},
            {"epsilon", s.epsilon},
            {"hbar_eff", s.hbar_eff},
            {"length_scale", s.length_scale},
            {"time_scale", s.time_scale},
            {"sigma_zpf", s.sigma_zpf},
            {"mean_photon_number", params::mean_photon_number(p)},
            {"modulation_photon_number", params::modulation_photon_number(p)},
            {"adiabaticity",
             {{"x_max_scaled", ctx.cfg.scale.x_max_scaled},
              {"gamma_c_over_omega_m", adi.cavity_over_mechanical},
              {"gamma_c_over_quartic", adi.cavity_over_quartic},
              {"gamma_c_over_Omega", adi.cavity_over_drive},
              {"gamma_c_over_detuning", std::isfinite(adi.cavity_over_detuning)
                                            ? json(adi.cavity_over_detuning)
                                            : json(nullptr)},
              {"threshold", adi.threshold},
              {"pass", adi.pass}}}};
  if (!adi.pass) ctx.warn("adiabatic elimination is marginal at this parameter set");
  ctx.out.write_json("scaled.json", j);
}

void run_poincare(Context& ctx) {
  const auto& opt = ctx.cfg.poincare;
  const auto seeds = classical::seed_lattice(opt.lattice);
  ctx.log << "integrating " << seeds.size() << " seeds for " << opt.n_periods << " periods\n";
  const auto sec = classical::poincare_section(seeds, opt.n_periods, drive(ctx.cfg),
                                               classical_integrator(ctx.cfg), ctx.threads);
  Csv csv("seed_id,s,x,p");
  std::size_t escaped = 0;
  for (std::size_t k = 0; k < sec.points.size(); ++k) {
    for (std::size_t s = 0; s < sec.points[k].size(); ++s) {
      csv.row(k, s, sec.points[k][s].x, sec.points[k][s].p);
    }
    if (sec.escaped[k]) ++escaped;
  }
  ctx.out.write("section.csv", csv.text());
  ctx.resolved["seeds"] = seeds.size();
  ctx.resolved["escaped_seeds"] = escaped;
  if (escaped) ctx.warn(std::to_string(escaped) + " seeds escaped the integration bound");

  if (opt.find_islands) {
    const auto plus = locate_island(ctx);
    const auto minus = classical::find_period_one_island({-plus.x0, -plus.p0}, drive(ctx.cfg),
                                                         classical_integrator(ctx.cfg));
    ctx.out.write_json("fixed_points.json", json::array({fixed_point_json("plus", plus),
                                                         fixed_point_json("minus", minus)}));
  }
}

void run_floquet(Context& ctx) {
  const auto spec = compute_spectrum(ctx);
  ctx.out.write_json("spectrum.json", spectrum_json(spec));
  for (long i : ctx.cfg.floquet.export_states) {
    if (static_cast<std::size_t>(i) >= spec.size()) {
      throw invalid_argument("floquet.export_states: index " + std::to_string(i) +
                             " exceeds spectrum size " + std::to_string(spec.size()));
    }
    write_state(ctx, "state_" + std::to_string(i) + ".csv", spec.state(static_cast<std::size_t>(i)));
  }
  if (ctx.cfg.floquet.export_pair) {
    const auto island = locate_island(ctx);
    const auto pair = locate_pair(ctx, spec, island);
    write_state(ctx, "state_" + std::to_string(pair.u) + ".csv", spec.state(pair.u));
    write_state(ctx, "state_" + std::to_string(pair.v) + ".csv", spec.state(pair.v));
  }
}

void run_husimi(Context& ctx) {
  const auto spec = compute_spectrum(ctx);
  const auto& opt = ctx.cfg.husimi;
  WaveFunction target;
  if (opt.state == "odd" || opt.state == "even" || opt.state == "plus" || opt.state == "minus") {
    const auto island = locate_island(ctx);
    const auto pair = locate_pair(ctx, spec, island);
    if (opt.state == "odd") target = spec.state(pair.u);
    else if (opt.state == "even") target = spec.state(pair.v);
    else target = analysis::combine_pair(spec, pair, opt.state == "plus" ? +1 : -1);
  } else {
    const auto idx = static_cast<std::size_t>(std::stol(opt.state));
    if (idx >= spec.size()) {
      throw invalid_argument("husimi.state: index exceeds spectrum size " +
                             std::to_string(spec.size()));
    }
    target = spec.state(idx);
  }
  const double width = opt.width.value_or(analysis::default_coherent_width(ctx.cfg.hbar_eff));
  const auto map = analysis::husimi(target, opt.window, width, ctx.cfg.hbar_eff, ctx.threads);
  Csv csv("x,p,Q");
  for (std::size_t i = 0; i < map.xs.size(); ++i) {
    for (std::size_t k = 0; k < map.ps.size(); ++k) csv.row(map.xs[i], map.ps[k], map.at(i, k));
  }
  ctx.out.write("husimi.csv", csv.text());
  json maxima = json::array();
  for (const auto& m : analysis::dominant_maxima(map)) {
    maxima.push_back({{"x", m.x}, {"p", m.p}, {"Q", m.q}});
  }
  ctx.resolved["husimi"] = {{"state", opt.state},
                            {"width", width},
                            {"total", map.total()},
                            {"dominant_maxima", maxima}};
}

void run_tunnel(Context& ctx) {
  const auto& opt = ctx.cfg.tunnel;
  if (opt.s_max == 0) {
    ctx.out.write("series.csv", Csv("s,P_plus,P_minus").text());
    ctx.flags.push_back("no evolution requested");
    return;
  }
  const auto spec = compute_spectrum(ctx);
  const auto island = locate_island(ctx);
  const auto pair = locate_pair(ctx, spec, island);
  const auto m = model(ctx.cfg);
  const quantum::Evolver evolver(m);
  const WaveFunction psi0 =
      opt.initial == "plus"
          ? analysis::combine_pair(spec, pair, +1)
          : analysis::approx_initial_state(opt.kappa_ini, m.hbar_eff, m.grid, island.x0, island.p0);
  ctx.log << "evolving " << opt.s_max << " periods\n";
  quantum::Diagnostics diag;
  const auto series = analysis::measure_tunnelling(psi0, spec, pair, opt.s_max, evolver, &diag);
  ctx.absorb(diag);
  Csv csv("s,P_plus,P_minus");
  for (std::size_t s = 0; s < series.p_plus.size(); ++s) {
    csv.row(s, series.p_plus[s], series.p_minus[s]);
  }
  ctx.out.write("series.csv", csv.text());
  const auto& est = series.estimate;
  ctx.resolved["tunnelling"] = {
      {"initial", opt.initial},
      {"predicted_period_periods",
       pair.T_tun > 0.0 ? json(pair.T_tun / quantum::kDrivePeriod) : json(nullptr)},
      {"fitted_period_periods",
       est.period_in_drive_periods ? json(*est.period_in_drive_periods) : json(nullptr)},
      {"fit_method", analysis::to_string(est.method)},
      {"exceeds_horizon", est.exceeds_horizon}};
  if (opt.initial == "approx") ctx.resolved["tunnelling"]["kappa_ini"] = opt.kappa_ini;
  if (est.exceeds_horizon) ctx.flags.push_back("period exceeds horizon");
  if (opt.density) {
    quantum::Diagnostics dd;
    write_density(ctx, quantum::stroboscopic_density(psi0, opt.s_max, evolver, &dd));
    ctx.absorb(dd);
  }
}

void run_evolve(Context& ctx) {
  const auto& opt = ctx.cfg.evolve;
  const auto m = model(ctx.cfg);
  const std::string res = m.grid.resolution_warning(m.hbar_eff, m.p_interest, m.cutoff_safety);
  if (!res.empty()) ctx.warn(res);
  const auto& init = opt.initial;
  const WaveFunction psi0 =
      init.type == "approx"
          ? analysis::approx_initial_state(init.kappa_ini, m.hbar_eff, m.grid, init.x0, init.p0)
          : analysis::coherent_state(init.x0, init.p0,
                                     init.width.value_or(analysis::default_coherent_width(m.hbar_eff)),
                                     m.hbar_eff, m.grid);
  if (opt.s_max == 0) ctx.flags.push_back("no evolution requested");
  const quantum::Evolver evolver(m);
  quantum::Diagnostics diag;
  const auto d = quantum::stroboscopic_density(psi0, opt.s_max, evolver, &diag);
  ctx.absorb(diag);
  if (opt.density) write_density(ctx, d);
  write_state(ctx, "final_state.csv", d.final_state);
  ctx.resolved["final"] = {{"t", d.final_state.time()},
                           {"mean_position", d.final_state.mean_position()},
                           {"mean_momentum", quantum::mean_momentum(d.final_state, m.hbar_eff)}};
}

void run_heff_map(Context& ctx) {
  const auto& sweep = *ctx.cfg.heff;
  const auto map = params::heff_map(sweep, ctx.threads);
  Csv csv("axis1,axis2,hbar_eff");
  for (std::size_t i = 0; i < map.axis1_values.size(); ++i) {
    for (std::size_t j = 0; j < map.axis2_values.size(); ++j) {
      csv.row(map.axis1_values[i], map.axis2_values[j], map.at(i, j));
    }
  }
  ctx.out.write("heff_map.csv", csv.text());
  json constraints = json::object();
  if (sweep.constraints.gamma_c_over_omega_m) {
    constraints["gamma_c_over_omega_m"] = *sweep.constraints.gamma_c_over_omega_m;
  }
  if (sweep.constraints.kappa) constraints["kappa"] = *sweep.constraints.kappa;
  json fixed = physical_json(sweep.base);
  fixed.erase(params::to_string(sweep.axis1.parameter));
  fixed.erase(params::to_string(sweep.axis2.parameter));
  if (sweep.constraints.gamma_c_over_omega_m) fixed.erase("gamma_c");
  if (sweep.constraints.kappa) fixed.erase("Omega");
  const auto [lo, hi] = std::minmax_element(map.hbar_eff.begin(), map.hbar_eff.end());
  ctx.out.write_json("heff_map.json", {{"csv", "heff_map.csv"},
                                       {"layout", "row-major, axis1 outer"},
                                       {"axis1", axis_json(sweep.axis1)},
                                       {"axis2", axis_json(sweep.axis2)},
                                       {"constraints", constraints},
                                       {"fixed", fixed},
                                       {"hbar_eff_min", *lo},
                                       {"hbar_eff_max", *hi}});
  ctx.resolved["hbar_eff_range"] = {*lo, *hi};
}

}  // namespace

json resolved_parameters(const ExperimentConfig& cfg) {
  json r = {{"mode", to_string(cfg.mode)}};
  if (cfg.mode != Mode::heff_map) {
    r["kappa"] = cfg.kappa;
    r["epsilon"] = cfg.epsilon;
    r["hbar_eff"] = cfg.hbar_eff;
  }
  if (cfg.physical) r["physical"] = physical_json(*cfg.physical);
  if (cfg.scaled_from_physical) {
    r["length_scale"] = cfg.scaled_from_physical->length_scale;
    r["time_scale"] = cfg.scaled_from_physical->time_scale;
    r["sigma_zpf"] = cfg.scaled_from_physical->sigma_zpf;
  }
  if (cfg.grid) {
    r["grid"] = {{"n", cfg.grid->n}, {"x_max", cfg.grid->x_max}, {"dx", cfg.grid->dx()}};
  }
  if (cfg.mode != Mode::scale && cfg.mode != Mode::heff_map) {
    r["integrator"] = {{"scheme", to_string(cfg.scheme)},
                       {"steps_per_period", cfg.steps_per_period},
                       {"classical_steps_per_period", cfg.classical_steps_per_period}};
  }
  if (cfg.heff) {
    r["base"] = physical_json(cfg.heff->base);
    r["axis1"] = axis_json(cfg.heff->axis1);
    r["axis2"] = axis_json(cfg.heff->axis2);
  }
  return r;
}

int run(const ExperimentConfig& cfg, int threads, std::ostream& log) {
  OutputSet out(cfg.output_dir);
  Context ctx{cfg, out, std::max(1, threads), log, resolved_parameters(cfg), {}, {}};
  int code = kExitOk;
  std::string error;
  try {
    switch (cfg.mode) {
      case Mode::scale: run_scale(ctx); break;
      case Mode::poincare: run_poincare(ctx); break;
      case Mode::floquet: run_floquet(ctx); break;
      case Mode::husimi: run_husimi(ctx); break;
      case Mode::tunnel: run_tunnel(ctx); break;
      case Mode::evolve: run_evolve(ctx); break;
      case Mode::heff_map: run_heff_map(ctx); break;
    }
  } catch (const Error& e) {
    error = e.what();
    code = e.kind() == ErrorKind::io ? kExitIo
           : e.kind() == ErrorKind::invalid_argument ? kExitConfig
                                                     : kExitNumeric;
  } catch (const std::bad_alloc&) {
    error = "out of memory";
    code = kExitNumeric;
  }

  json manifest = {{"tool", "dyntun"},
                   {"version", DYNTUN_VERSION},
                   {"mode", to_string(cfg.mode)},
                   {"status", code == kExitOk ? "complete" : "incomplete"}};
  if (code != kExitOk) {
    ctx.flags.insert(ctx.flags.begin(), "incomplete");
    manifest["error"] = error;
    log << "error: " << error << '\n';
  }
  manifest["flags"] = ctx.flags;
  manifest["warnings"] = ctx.warnings;
  manifest["resolved"] = ctx.resolved;
  manifest["config"] = cfg.document;
  manifest["files"] = out.file_records();
  out.write_json("manifest.json", manifest);
  return code;
}

}  // namespace dyntun::app
