#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace dyntun::quantum {

using Complex = std::complex<double>;

/// Uniform periodic grid x_j = -x_max + j dx, j = 0..n-1, dx = 2 x_max / n.
/// x = 0 sits on node n/2; the mirror of node j is (n - j) mod n.
struct SpatialGrid {
  int n = 1024;
  double x_max = 8.0;

  double dx() const { return 2.0 * x_max / n; }
  double x(int j) const { return -x_max + j * dx(); }
  int center() const { return n / 2; }
  int mirror(int j) const { return (n - j) % n; }

  /// Momentum of FFT bin k (standard ordering), p = hbar_eff * wavenumber.
  double momentum(int k, double hbar_eff) const;

  /// pi hbar_eff / dx.
  double momentum_cutoff(double hbar_eff) const;

  std::vector<double> positions() const;

  /// Empty when n is a power of two >= 2 and x_max > 0.
  std::vector<std::string> violations() const;
  void validate() const;

  /// Violation text when the momentum cutoff does not exceed
  /// `safety * p_interest`, empty otherwise.
  std::string resolution_warning(double hbar_eff, double p_interest, double safety) const;

  bool operator==(const SpatialGrid&) const = default;
};

/// Complex amplitudes on a grid, normalised as sum |psi|^2 dx = 1.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(SpatialGrid grid, Eigen::VectorXcd amplitudes, double t = 0.0);

  const SpatialGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  double norm() const;
  WaveFunction normalized() const;

  /// <this|other> = sum conj(psi) phi dx.
  Complex inner(const WaveFunction& other) const;

  Eigen::VectorXd density() const;
  double mean_position() const;
  double position_variance() const;

  /// (P psi)(x) = psi(-x).
  WaveFunction parity_image() const;

 private:
  SpatialGrid grid_;
  Eigen::VectorXcd amplitudes_;
  double t_ = 0.0;
};

/// Probability per momentum bin (sums to the norm), FFT ordering.
Eigen::VectorXd momentum_distribution(const WaveFunction& psi);

/// <p> using the grid momenta.
double mean_momentum(const WaveFunction& psi, double hbar_eff);

/// Fraction of the norm in the outer 10% of the momentum grid.
double momentum_edge_fraction(const WaveFunction& psi);

}  // namespace dyntun::quantum
