#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "dyntun/grid.hpp"
#include "dyntun/splitting.hpp"

namespace dyntun::detail {
class FftPlan;
}

namespace dyntun::quantum {

inline constexpr double kDrivePeriod = 2.0 * std::numbers::pi;

/// V(x, t) = quadratic x^2/2 + quartic (1 + modulation cos t) x^4/4.
/// The driven oscillator has quadratic = quartic = kappa and
/// modulation = epsilon; setting quartic = 0 gives a harmonic oscillator.
struct Potential {
  double quadratic = 1.0;
  double quartic = 1.0;
  double modulation = 0.0;

  static Potential driven(double kappa, double epsilon) { return {kappa, kappa, epsilon}; }

  double operator()(double x, double t) const;
};

double potential(double x, double t, double kappa, double epsilon);

/// Collects non-fatal numerical warnings.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message);
};

struct Model {
  Potential potential;
  double hbar_eff = 0.5;
  SpatialGrid grid;
  double dt = kDrivePeriod / 4096.0;
  SplittingScheme scheme = SplittingScheme::blanes_moan4;
  /// Momentum range that must be resolved; checked against the grid cutoff.
  double p_interest = 4.0;
  double cutoff_safety = 2.0;

  void validate() const;
};

/// Spectral split-step propagation of i hbar dpsi/dt = [-hbar^2/2 d2/dx2 + V] psi.
class Evolver {
 public:
  explicit Evolver(const Model& model);
  ~Evolver();
  Evolver(const Evolver&) = delete;
  Evolver& operator=(const Evolver&) = delete;

  const Model& model() const { return model_; }

  /// Number of steps covering `span`; throws unless dt divides it.
  long steps_for(double span) const;

  /// Advances unit-l2 columns (amplitudes times sqrt(dx)) by `steps` steps
  /// starting at t0. Columns are processed independently; `threads` does not
  /// change the result.
  void advance(Eigen::Ref<Eigen::MatrixXcd> columns, double t0, long steps,
               int threads = 1) const;

  /// psi(t_end). Adds "grid too small" to diag when >= 1e-6 of the norm
  /// ends up in the outer 10% of the momentum grid.
  WaveFunction evolve(const WaveFunction& psi, double t_end,
                      Diagnostics* diag = nullptr) const;

 private:
  void advance_chunk(Complex* data, int ncols, double t0, long steps) const;
  void kick_phase(double w_quad, double w_quart, Complex* out) const;
  const std::vector<Eigen::ArrayXcd>& kick_cache() const;

  Model model_;
  Composition comp_;
  std::unique_ptr<detail::FftPlan> fft_;
  Eigen::ArrayXd half_x2_;
  Eigen::ArrayXd quarter_x4_;
  std::vector<Eigen::ArrayXcd> drift_phase_;
  // Kick phases for one drive period, indexed [step * kicks + stage]; only
  // used when dt divides the period and evolution starts on a period edge.
  long steps_per_period_ = 0;
  mutable std::once_flag cache_once_;
  mutable std::vector<Eigen::ArrayXcd> kick_cache_;
};

/// One-period propagator restricted to the parity subspaces.
///
/// Even basis (size n/2 + 1): delta at x = 0, (delta_j + delta_-j)/sqrt2 for
/// the n/2 - 1 mirror pairs, and the self-mirror edge node x = -x_max.
/// Odd basis (size n/2 - 1): (delta_j - delta_-j)/sqrt2. Pair m couples
/// nodes center + m and center - m.
struct PropagatorBlocks {
  SpatialGrid grid;
  double hbar_eff = 0.0;
  double duration = kDrivePeriod;
  Eigen::MatrixXcd even;
  Eigen::MatrixXcd odd;
  /// Largest |<odd|U|even>| or |<even|U|odd>| seen while projecting.
  double parity_leakage = 0.0;
};

/// Full-grid vector of even basis element m (unit l2 norm).
Eigen::VectorXcd even_basis_vector(const SpatialGrid& grid, int m);
/// Full-grid vector of odd basis element m (unit l2 norm).
Eigen::VectorXcd odd_basis_vector(const SpatialGrid& grid, int m);

PropagatorBlocks build_propagator(const Model& model, double duration = kDrivePeriod,
                                  int threads = 1, Diagnostics* diag = nullptr);

/// max |(U^dagger U - 1)_ij|.
double unitarity_defect(const Eigen::MatrixXcd& u);

}  // namespace dyntun::quantum
