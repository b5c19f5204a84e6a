#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <string>
#include <vector>

#include "dyntun/error.hpp"
#include "dyntun/splitting.hpp"

namespace dyntun::classical {

inline constexpr double kDrivePeriod = 2.0 * std::numbers::pi;

/// Scaled drive: V(x, t) = kappa x^2/2 + kappa (1 + epsilon cos t) x^4/4.
struct Drive {
  double kappa = 1.0;
  double epsilon = 0.0;
};

struct ClassicalState {
  double x = 0.0;
  double p = 0.0;
  double t = 0.0;
};

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

/// dp/dt = -kappa x - kappa (1 + epsilon cos t) x^3.
double force(double x, double t, const Drive& drive);

/// d(force)/dx, used by the tangent map.
double force_gradient(double x, double t, const Drive& drive);

/// Instantaneous H(x, p, t); conserved only for epsilon == 0.
double energy(const ClassicalState& s, const Drive& drive);

struct IntegratorConfig {
  double dt = kDrivePeriod / 4096.0;
  SplittingScheme scheme = SplittingScheme::blanes_moan4;
  double escape_bound = 50.0;
};

class TrajectoryEscaped : public Error {
 public:
  explicit TrajectoryEscaped(const ClassicalState& last_valid)
      : Error(ErrorKind::numeric, "trajectory escaped"), last_valid_(last_valid) {}
  const ClassicalState& last_valid() const noexcept { return last_valid_; }

 private:
  ClassicalState last_valid_;
};

/// Advances s0 to t_end with a fixed-step symplectic splitting. The step is
/// shrunk to the nearest value not larger than cfg.dt that divides the
/// interval. When `trajectory` is non-null every step (including s0) is
/// appended to it.
ClassicalState integrate(const ClassicalState& s0, double t_end, const Drive& drive,
                         const IntegratorConfig& cfg = {},
                         std::vector<ClassicalState>* trajectory = nullptr);

struct TangentFlow {
  ClassicalState state;
  Eigen::Matrix2d jacobian;  // d(x, p)(t_end) / d(x, p)(t0)
};

/// Same discrete flow as integrate(), with the exact tangent map of the
/// discrete scheme carried alongside.
TangentFlow integrate_with_tangent(const ClassicalState& s0, double t_end,
                                   const Drive& drive, const IntegratorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Stroboscopic sections

struct SeedLattice {
  double x_min = -3.0;
  double x_max = 3.0;
  double p_min = -3.0;
  double p_max = 3.0;
  int nx = 40;
  int np = 40;
};

/// Evenly spaced seeds at t = 0, endpoints included, x outer.
std::vector<ClassicalState> seed_lattice(const SeedLattice& lattice);

struct PoincareSection {
  std::vector<ClassicalState> seeds;
  /// points[k][s] is seed k at t = seed.t + 2 pi s; s = 0 is the seed.
  std::vector<std::vector<PhasePoint>> points;
  /// True when seed k left the escape bound; its points stop there.
  std::vector<bool> escaped;
  int n_periods = 0;
};

/// Seeds must sit at integer multiples of 2 pi. Escaped seeds are flagged
/// and do not abort the others.
PoincareSection poincare_section(const std::vector<ClassicalState>& seeds, int n_periods,
                                 const Drive& drive, const IntegratorConfig& cfg = {},
                                 int threads = 1);

// ---------------------------------------------------------------------------
// Period-one fixed points

enum class Stability { elliptic, hyperbolic, marginal };

std::string to_string(Stability s);

struct FixedPoint {
  double x0 = 0.0;
  double p0 = 0.0;
  double residual = 0.0;
  double monodromy_trace = 0.0;
  double monodromy_det = 1.0;
  Stability stability = Stability::marginal;
  int iterations = 0;
};

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  /// |trace| within this distance of 2 is reported as marginal.
  double marginal_band = 1e-9;
};

class NewtonFailure : public Error {
 public:
  explicit NewtonFailure(const FixedPoint& best)
      : Error(ErrorKind::numeric, "period-one Newton iteration did not converge"),
        best_(best) {}
  const FixedPoint& best() const noexcept { return best_; }

 private:
  FixedPoint best_;
};

/// Image of (x, p) at t = 0 after one drive period.
PhasePoint one_period_map(const PhasePoint& z, const Drive& drive,
                          const IntegratorConfig& cfg = {});

/// Linearised one-period map about z (t = 0 to 2 pi).
Eigen::Matrix2d monodromy(const PhasePoint& z, const Drive& drive,
                          const IntegratorConfig& cfg = {});

/// Grid node minimising |map(z) - z| over the window; used to seed Newton.
PhasePoint scan_for_period_one(const SeedLattice& window, const Drive& drive,
                               const IntegratorConfig& cfg = {});

/// Newton iteration on map(z) - z with the tangent-map Jacobian.
FixedPoint find_period_one_island(const PhasePoint& guess, const Drive& drive,
                                  const IntegratorConfig& cfg = {},
                                  const NewtonOptions& opts = {});

}  // namespace dyntun::classical
