#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyntun/floquet.hpp"
#include "dyntun/grid.hpp"
#include "dyntun/quantum.hpp"

namespace dyntun::analysis {

using quantum::FloquetSpectrum;
using quantum::SpatialGrid;
using quantum::WaveFunction;

/// sqrt(hbar_eff / 2): the unit-mass, unit-frequency coherent-state width.
double default_coherent_width(double hbar_eff);

/// psi(x) ~ exp(-(x - x0)^2 / (4 width^2) + i p0 (x - x0) / hbar_eff),
/// normalised on the grid. Throws "grid too small for coherent state" when
/// |psi|^2 dx at either grid edge exceeds 1e-12.
WaveFunction coherent_state(double x0, double p0, double width, double hbar_eff,
                            const SpatialGrid& grid);

struct PhaseSpaceWindow {
  double x_min = -3.0;
  double x_max = 3.0;
  double p_min = -3.0;
  double p_max = 3.0;
  int nx = 121;
  int np = 121;
};

/// Q(x, p) = |<alpha(x, p)|psi>|^2 / (2 pi hbar_eff) on a lattice.
struct HusimiMap {
  std::vector<double> xs;
  std::vector<double> ps;
  std::vector<double> q;  // row-major, x outer
  double dx = 0.0;
  double dp = 0.0;

  double at(std::size_t ix, std::size_t ip) const { return q[ix * ps.size() + ip]; }
  /// sum Q dx dp.
  double total() const;
};

HusimiMap husimi(const WaveFunction& state, const PhaseSpaceWindow& window, double width,
                 double hbar_eff, int threads = 1);

struct LocalMaximum {
  std::size_t ix = 0;
  std::size_t ip = 0;
  double x = 0.0;
  double p = 0.0;
  double q = 0.0;
};

/// Interior local maxima with Q >= fraction * max Q, strongest first.
std::vector<LocalMaximum> dominant_maxima(const HusimiMap& map, double fraction = 0.5);

// ---------------------------------------------------------------------------

struct TunnellingPair {
  std::size_t u = 0;  // odd state index
  std::size_t v = 0;  // even state index
  double E_u = 0.0;
  double E_v = 0.0;
  double splitting = 0.0;
  double T_tun = 0.0;  // 0 when the pair is degenerate
  double overlap_u = 0.0;
  double overlap_v = 0.0;
  /// Phase applied to Phi_v in combinations so that <x> of Phi_+ is positive.
  double relative_phase = 0.0;
  double hbar_eff = 0.0;
};

struct PairSearch {
  double island_x = 1.0;  // the pair is located through the coherent state at (island_x, 0)
  double island_p = 0.0;
  double width = 0.0;     // <= 0 selects default_coherent_width
  double overlap_floor = 0.1;
};

/// Odd and even Floquet states of maximal overlap with a coherent state on
/// the island. Throws when either best overlap is below the floor.
TunnellingPair find_tunnelling_pair(const FloquetSpectrum& spectrum, const PairSearch& search);

/// (Phi_u + sign e^{i phase} Phi_v) / sqrt 2; sign = +1 sits on the right.
WaveFunction combine_pair(const FloquetSpectrum& spectrum, const TunnellingPair& pair, int sign);

/// 2 pi hbar_eff / splitting. Throws "degenerate pair, period unresolvable"
/// for splitting below 1e-15 hbar_eff.
double tunnelling_period(double splitting, double hbar_eff);
double tunnelling_period(const TunnellingPair& pair);

enum class PeriodFit { first_minimum, cosine, none };

std::string to_string(PeriodFit fit);

struct PeriodEstimate {
  std::optional<double> period_in_drive_periods;
  PeriodFit method = PeriodFit::none;
  bool exceeds_horizon = false;
};

/// Period of a stroboscopic P_+(s) series. Uses twice the first deep
/// minimum (parabolic refinement); otherwise falls back to a least-squares
/// fit of P_+(0) cos^2(pi s / S) and flags the horizon.
PeriodEstimate fit_tunnelling_period(const std::vector<double>& p_plus);

struct TunnellingSeries {
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  PeriodEstimate estimate;

  std::optional<double> period() const {
    if (!estimate.period_in_drive_periods) return std::nullopt;
    return *estimate.period_in_drive_periods * quantum::kDrivePeriod;
  }
};

/// P_+-(s) = |<Phi_+-|Psi(sT)>|^2 by direct evolution for s = 0..s_max.
TunnellingSeries measure_tunnelling(const WaveFunction& psi0, const FloquetSpectrum& spectrum,
                                    const TunnellingPair& pair, long s_max,
                                    const quantum::Evolver& evolver,
                                    quantum::Diagnostics* diag = nullptr);

/// Same series reconstructed from the Floquet expansion.
TunnellingSeries floquet_tunnelling_series(const WaveFunction& psi0,
                                           const FloquetSpectrum& spectrum,
                                           const TunnellingPair& pair, long s_max);

/// Ground state of p^2/2 + kappa_ini x^2/2, width sqrt(hbar/(2 sqrt kappa_ini)),
/// displaced to (x0, p0). Throws "grid under-resolves initial state" when
/// the width is below 3 dx.
WaveFunction approx_initial_state(double kappa_ini, double hbar_eff, const SpatialGrid& grid,
                                  double x0 = 0.0, double p0 = 0.0);

}  // namespace dyntun::analysis
