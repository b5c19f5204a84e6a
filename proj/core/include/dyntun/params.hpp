#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace dyntun::params {

inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;  // m / s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Laboratory device and drive parameters, SI units throughout.
///
/// All angular quantities (omega_m, g4, gamma_c, Omega, delta_c) are in
/// rad/s (g4 in rad s^-1 m^-4). Values quoted as "x/2pi" in Hz must be
/// multiplied by 2pi before they land here.
struct PhysicalParams {
  double m = 0.0;         // effective mass [kg]
  double omega_m = 0.0;   // mechanical angular frequency
  double g4 = 0.0;        // quartic dispersive coupling
  double lambda_l = 0.0;  // drive wavelength [m]
  double P0 = 0.0;        // mean laser power [W]
  double PA = 0.0;        // power modulation amplitude [W]
  double gamma_c = 0.0;   // cavity amplitude decay rate
  double Omega = 0.0;     // power modulation angular frequency
  double delta_c = 0.0;   // cavity-laser detuning, reporting only

  double laser_angular_frequency() const {
    return kTwoPi * kSpeedOfLight / lambda_l;
  }

  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations() const;

  /// Throws dyntun::Error (invalid_argument) listing every violation.
  void validate() const;
};

/// Dimensionless model parameters together with the scales that produced
/// them.
struct ScaledParams {
  double kappa = 0.0;
  double epsilon = 0.0;
  double hbar_eff = 0.0;
  double length_scale = 0.0;  // L [m]
  double time_scale = 0.0;    // tau [s]
  double sigma_zpf = 0.0;     // sqrt(hbar / 2 m omega_m) [m]
};

/// Intracavity photon number |alpha(t)|^2 in the bad-cavity limit.
double cavity_mean_field(const PhysicalParams& p, double t);

/// |alpha_0|^2 = 8 P0 / (hbar omega_l gamma_c).
double mean_photon_number(const PhysicalParams& p);

/// |A|^2 = 8 PA / (hbar omega_l gamma_c).
double modulation_photon_number(const PhysicalParams& p);

struct AdiabaticityReport {
  double cavity_over_mechanical = 0.0;  // gamma_c / omega_m
  double cavity_over_quartic = 0.0;     // gamma_c / (g4 x^4)
  double cavity_over_drive = 0.0;       // gamma_c / Omega
  double cavity_over_detuning = 0.0;    // gamma_c / |delta_c|, informational
  double threshold = 10.0;
  bool pass = false;
};

/// Checks that gamma_c dominates the mechanical, quartic and drive rates.
/// `x_max_scaled` is the largest excursion of interest in scaled units; it
/// is converted to metres with the length scale of `p`.
AdiabaticityReport adiabaticity_check(const PhysicalParams& p,
                                      double x_max_scaled,
                                      double threshold = 10.0);

/// Maps laboratory parameters onto (kappa, epsilon, hbar_eff) and the
/// length/time scales. Throws for P0 == 0.
ScaledParams scale(const PhysicalParams& p);

// Exact affine maps between laboratory and scaled coordinates.
double to_scaled_position(double x, const ScaledParams& s);
double from_scaled_position(double x_scaled, const ScaledParams& s);
double to_scaled_time(double t, const ScaledParams& s);
double from_scaled_time(double t_scaled, const ScaledParams& s);

// ---------------------------------------------------------------------------
// hbar_eff tunability maps

enum class SweepParameter { P0, omega_m, Omega, gamma_c, m };

std::string to_string(SweepParameter param);
std::optional<SweepParameter> parse_sweep_parameter(const std::string& name);

struct SweepAxis {
  SweepParameter parameter = SweepParameter::P0;
  double min = 0.0;
  double max = 0.0;
  int count = 2;
  bool logarithmic = false;

  /// Node values, endpoints included.
  std::vector<double> values() const;
};

/// Ties applied after the axis values are substituted.
struct SweepConstraints {
  std::optional<double> gamma_c_over_omega_m;  // gamma_c = c * omega_m
  std::optional<double> kappa;                 // Omega = omega_m / sqrt(kappa)
};

struct HeffSweep {
  PhysicalParams base;
  SweepAxis axis1;
  SweepAxis axis2;
  SweepConstraints constraints;
};

struct HeffMap {
  std::vector<double> axis1_values;
  std::vector<double> axis2_values;
  std::vector<double> hbar_eff;  // row-major, axis1 outer

  double at(std::size_t i, std::size_t j) const {
    return hbar_eff[i * axis2_values.size() + j];
  }
};

/// Parameter set for one node of the sweep, constraints applied.
PhysicalParams resolve_sweep_point(const HeffSweep& sweep, double v1,
                                   double v2);

/// Evaluates hbar_eff over the sweep grid. Throws "parameter doubly
/// determined" when a constraint targets an axis parameter. `threads` <= 1
/// evaluates serially; output does not depend on it.
HeffMap heff_map(const HeffSweep& sweep, int threads = 1);

}  // namespace dyntun::params
