#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dyntun/grid.hpp"
#include "dyntun/quantum.hpp"

namespace dyntun::quantum {

enum class Parity { even, odd };

std::string to_string(Parity p);

/// Floquet states at t = 0 and their quasi-energies, ordered by increasing
/// folded quasi-energy E_n in [-hbar_eff/2, hbar_eff/2).
///
/// Each state is normalised (sum |phi|^2 dx = 1) and phase-fixed so that its
/// largest-magnitude amplitude on x >= 0 is real and positive.
struct FloquetSpectrum {
  SpatialGrid grid;
  double hbar_eff = 0.0;
  double period = kDrivePeriod;
  Eigen::MatrixXcd states;  // column n is Phi_n(0) on the grid
  std::vector<double> quasi_energies;
  std::vector<Parity> parity;
  std::vector<double> eigenvalue_moduli;

  std::size_t size() const { return quasi_energies.size(); }
  WaveFunction state(std::size_t index) const;
};

struct DecomposeOptions {
  /// |xi_i - xi_j| below this marks a degenerate cluster.
  double degeneracy_tolerance = 1e-10;
  /// ||xi| - 1| above this aborts with "propagator not unitary".
  double unitarity_tolerance = 1e-6;
};

/// Dense eigendecomposition of each parity block.
FloquetSpectrum floquet_decompose(const PropagatorBlocks& blocks,
                                  const DecomposeOptions& opts = {});

/// E = -(hbar_eff / T) arg(xi), on [-hbar_eff/2, hbar_eff/2) for T = 2 pi.
double quasi_energy(std::complex<double> xi, double hbar_eff, double period);

/// Shortest distance between two quasi-energies on the circle of
/// circumference 2 pi hbar_eff / period.
double circular_distance(double e1, double e2, double hbar_eff, double period = kDrivePeriod);

/// c_n = <Phi_n(0)|psi>.
Eigen::VectorXcd floquet_coefficients(const FloquetSpectrum& spectrum, const WaveFunction& psi);

/// Psi(sT) = sum_n c_n exp(-i E_n s T / hbar_eff) Phi_n(0).
WaveFunction floquet_evolve(const Eigen::VectorXcd& coefficients,
                            const FloquetSpectrum& spectrum, long s);

struct StroboscopicDensity {
  /// rho(s, j) = |psi(x_j, sT)|^2 for s = 0..s_max.
  Eigen::MatrixXd rho;
  std::vector<double> norms;
  WaveFunction final_state;
};

/// Repeated one-period direct evolution with density snapshots.
StroboscopicDensity stroboscopic_density(const WaveFunction& psi0, long s_max,
                                         const Evolver& evolver,
                                         Diagnostics* diag = nullptr);

}  // namespace dyntun::quantum
