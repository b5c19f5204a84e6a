#include "dyntun/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dyntun/error.hpp"
#include "dyntun/parallel.hpp"

namespace dyntun::params {

std::vector<std::string> PhysicalParams::violations() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      out.push_back(std::string(name) + " must be finite and > 0");
    }
  };
  positive(m, "m");
  positive(omega_m, "omega_m");
  positive(g4, "g4");
  positive(lambda_l, "lambda_l");
  positive(P0, "P0");
  positive(gamma_c, "gamma_c");
  positive(Omega, "Omega");
  if (!(PA >= 0.0) || !std::isfinite(PA)) {
    out.push_back("PA must be finite and >= 0");
  } else if (PA > P0 && P0 > 0.0) {
    out.push_back("epsilon > 1 (PA exceeds P0, instantaneous power negative)");
  }
  if (!std::isfinite(delta_c)) out.push_back("delta_c must be finite");
  return out;
}

void PhysicalParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid physical parameters:";
  for (const auto& s : v) msg << ' ' << s << ';';
  throw invalid_argument(msg.str());
}

double mean_photon_number(const PhysicalParams& p) {
  return 8.0 * p.P0 / (kHbar * p.laser_angular_frequency() * p.gamma_c);
}

double modulation_photon_number(const PhysicalParams& p) {
  return 8.0 * p.PA / (kHbar * p.laser_angular_frequency() * p.gamma_c);
}

double cavity_mean_field(const PhysicalParams& p, double t) {
  return mean_photon_number(p) + modulation_photon_number(p) * std::cos(p.Omega * t);
}

ScaledParams scale(const PhysicalParams& p) {
  if (p.P0 == 0.0) {
    throw invalid_argument("zero mean field, length scale undefined");
  }
  p.validate();

  ScaledParams s;
  s.kappa = (p.omega_m * p.omega_m) / (p.Omega * p.Omega);
  s.epsilon = p.PA / p.P0;
  s.hbar_eff = 32.0 * kHbar * p.g4 * p.P0 /
               (p.m * p.m * p.omega_m * p.omega_m * p.Omega *
                p.laser_angular_frequency() * p.gamma_c);
  s.sigma_zpf = std::sqrt(kHbar / (2.0 * p.m * p.omega_m));
  s.length_scale =
      1.0 / (s.sigma_zpf * std::sqrt(8.0 * p.g4 * mean_photon_number(p) / p.omega_m));
  s.time_scale = 1.0 / p.Omega;
  return s;
}

AdiabaticityReport adiabaticity_check(const PhysicalParams& p,
                                      double x_max_scaled, double threshold) {
  p.validate();
  if (!(x_max_scaled > 0.0)) {
    throw invalid_argument("adiabaticity_check: x_max must be > 0");
  }
  const ScaledParams s = scale(p);
  const double x = x_max_scaled * s.length_scale;

  AdiabaticityReport r;
  r.threshold = threshold;
  r.cavity_over_mechanical = p.gamma_c / p.omega_m;
  r.cavity_over_quartic = p.gamma_c / (p.g4 * x * x * x * x);
  r.cavity_over_drive = p.gamma_c / p.Omega;
  r.cavity_over_detuning = p.delta_c == 0.0
                               ? std::numeric_limits<double>::infinity()
                               : p.gamma_c / std::abs(p.delta_c);
  // Inclusive, so the customary gamma_c = 10 omega_m meets the default
  // threshold despite rounding in the ratio.
  const double floor = threshold * (1.0 - 1e-12);
  r.pass = r.cavity_over_mechanical >= floor && r.cavity_over_quartic >= floor &&
           r.cavity_over_drive >= floor;
  return r;
}

double to_scaled_position(double x, const ScaledParams& s) { return x / s.length_scale; }
double from_scaled_position(double x_scaled, const ScaledParams& s) {
  return x_scaled * s.length_scale;
}
double to_scaled_time(double t, const ScaledParams& s) { return t / s.time_scale; }
double from_scaled_time(double t_scaled, const ScaledParams& s) {
  return t_scaled * s.time_scale;
}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter param) {
  switch (param) {
    case SweepParameter::P0: return "P0";
    case SweepParameter::omega_m: return "omega_m";
    case SweepParameter::Omega: return "Omega";
    case SweepParameter::gamma_c: return "gamma_c";
    case SweepParameter::m: return "m";
  }
  return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& name) {
  for (auto p : {SweepParameter::P0, SweepParameter::omega_m, SweepParameter::Omega,
                 SweepParameter::gamma_c, SweepParameter::m}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::vector<double> SweepAxis::values() const {
  if (count < 1) throw invalid_argument("sweep axis needs count >= 1");
  if (logarithmic && !(min > 0.0 && max > 0.0)) {
    throw invalid_argument("logarithmic sweep axis needs positive bounds");
  }
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = min;
    return v;
  }
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    v[i] = logarithmic ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
                       : min + f * (max - min);
  }
  v.front() = min;
  v.back() = max;
  return v;
}

namespace {

double& field(PhysicalParams& p, SweepParameter param) {
  switch (param) {
    case SweepParameter::P0: return p.P0;
    case SweepParameter::omega_m: return p.omega_m;
    case SweepParameter::Omega: return p.Omega;
    case SweepParameter::gamma_c: return p.gamma_c;
    case SweepParameter::m: return p.m;
  }
  return p.P0;
}

void check_sweep(const HeffSweep& sweep) {
  if (sweep.axis1.parameter == sweep.axis2.parameter) {
    throw invalid_argument("parameter doubly determined: both axes sweep " +
                           to_string(sweep.axis1.parameter));
  }
  auto on_axis = [&](SweepParameter p) {
    return sweep.axis1.parameter == p || sweep.axis2.parameter == p;
  };
  if (sweep.constraints.gamma_c_over_omega_m && on_axis(SweepParameter::gamma_c)) {
    throw invalid_argument(
        "parameter doubly determined: gamma_c is both a sweep axis and tied to omega_m");
  }
  if (sweep.constraints.kappa && on_axis(SweepParameter::Omega)) {
    throw invalid_argument(
        "parameter doubly determined: Omega is both a sweep axis and fixed by kappa");
  }
  if (sweep.constraints.gamma_c_over_omega_m && !(*sweep.constraints.gamma_c_over_omega_m > 0.0)) {
    throw invalid_argument("gamma_c/omega_m ratio must be > 0");
  }
  if (sweep.constraints.kappa && !(*sweep.constraints.kappa > 0.0)) {
    throw invalid_argument("kappa constraint must be > 0");
  }
}

}  // namespace

PhysicalParams resolve_sweep_point(const HeffSweep& sweep, double v1, double v2) {
  check_sweep(sweep);
  PhysicalParams p = sweep.base;
  field(p, sweep.axis1.parameter) = v1;
  field(p, sweep.axis2.parameter) = v2;
  if (sweep.constraints.gamma_c_over_omega_m) {
    p.gamma_c = *sweep.constraints.gamma_c_over_omega_m * p.omega_m;
  }
  if (sweep.constraints.kappa) {
    p.Omega = p.omega_m / std::sqrt(*sweep.constraints.kappa);
  }
  return p;
}

HeffMap heff_map(const HeffSweep& sweep, int threads) {
  check_sweep(sweep);
  HeffMap out;
  out.axis1_values = sweep.axis1.values();
  out.axis2_values = sweep.axis2.values();
  const std::size_t n2 = out.axis2_values.size();
  out.hbar_eff.assign(out.axis1_values.size() * n2, 0.0);
  parallel_for(out.axis1_values.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const PhysicalParams p =
          resolve_sweep_point(sweep, out.axis1_values[i], out.axis2_values[j]);
      out.hbar_eff[i * n2 + j] = scale(p).hbar_eff;
    }
  });
  return out;
}

}  // namespace dyntun::params
