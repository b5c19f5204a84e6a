#include "dyntun/classical.hpp"

#include <cmath>
#include <limits>

#include "dyntun/parallel.hpp"

namespace dyntun::classical {

double force(double x, double t, const Drive& drive) {
  return -drive.kappa * x - drive.kappa * (1.0 + drive.epsilon * std::cos(t)) * x * x * x;
}

double force_gradient(double x, double t, const Drive& drive) {
  return -drive.kappa - 3.0 * drive.kappa * (1.0 + drive.epsilon * std::cos(t)) * x * x;
}

double energy(const ClassicalState& s, const Drive& drive) {
  const double x2 = s.x * s.x;
  return 0.5 * s.p * s.p + 0.5 * drive.kappa * x2 +
         0.25 * drive.kappa * (1.0 + drive.epsilon * std::cos(s.t)) * x2 * x2;
}

namespace {

struct StepPlan {
  long steps = 0;
  double h = 0.0;
};

StepPlan plan_steps(double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw invalid_argument("integrate: dt must be > 0");
  if (!(t_end >= t0)) throw invalid_argument("integrate: t_end must be >= start time");
  const double span = t_end - t0;
  StepPlan plan;
  if (span == 0.0) return plan;
  plan.steps = static_cast<long>(std::ceil(span / dt - 1e-9));
  plan.steps = std::max(plan.steps, 1L);
  plan.h = span / static_cast<double>(plan.steps);
  return plan;
}

// Generic driver over one composition; `Tangent` is either a no-op or the
// 2x2 tangent accumulator.
template <class OnKick, class OnDrift, class OnStep>
void run_composition(const Composition& c, double t0, const StepPlan& plan,
                     OnKick&& kick, OnDrift&& drift, OnStep&& on_step) {
  const std::size_t stages = c.drift_weights.size();
  for (long i = 0; i < plan.steps; ++i) {
    const double ts = t0 + static_cast<double>(i) * plan.h;
    for (std::size_t k = 0; k < stages; ++k) {
      kick(c.kick_weights[k] * plan.h, ts + c.kick_times[k] * plan.h);
      drift(c.drift_weights[k] * plan.h);
    }
    kick(c.kick_weights[stages] * plan.h, ts + c.kick_times[stages] * plan.h);
    on_step(i + 1, t0 + static_cast<double>(i + 1) * plan.h);
  }
}

bool escaped(double x, double p, double bound) {
  return !std::isfinite(x) || !std::isfinite(p) || std::abs(x) > bound || std::abs(p) > bound;
}

}  // namespace

ClassicalState integrate(const ClassicalState& s0, double t_end, const Drive& drive,
                         const IntegratorConfig& cfg,
                         std::vector<ClassicalState>* trajectory) {
  const StepPlan plan = plan_steps(s0.t, t_end, cfg.dt);
  const Composition& c = composition(cfg.scheme);
  double x = s0.x;
  double p = s0.p;
  ClassicalState last = s0;
  if (trajectory) trajectory->push_back(s0);
  run_composition(
      c, s0.t, plan,
      [&](double w, double t) { p += w * force(x, t, drive); },
      [&](double d) { x += d * p; },
      [&](long, double t) {
        if (escaped(x, p, cfg.escape_bound)) throw TrajectoryEscaped(last);
        last = ClassicalState{x, p, t};
        if (trajectory) trajectory->push_back(last);
      });
  last.t = t_end;
  return last;
}

TangentFlow integrate_with_tangent(const ClassicalState& s0, double t_end,
                                   const Drive& drive, const IntegratorConfig& cfg) {
  const StepPlan plan = plan_steps(s0.t, t_end, cfg.dt);
  const Composition& c = composition(cfg.scheme);
  double x = s0.x;
  double p = s0.p;
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  ClassicalState last = s0;
  run_composition(
      c, s0.t, plan,
      [&](double w, double t) {
        const double g = w * force_gradient(x, t, drive);
        p += w * force(x, t, drive);
        m.row(1) += g * m.row(0);
      },
      [&](double d) {
        x += d * p;
        m.row(0) += d * m.row(1);
      },
      [&](long, double t) {
        if (escaped(x, p, cfg.escape_bound)) throw TrajectoryEscaped(last);
        last = ClassicalState{x, p, t};
      });
  last.t = t_end;
  return {last, m};
}

// ---------------------------------------------------------------------------

std::vector<ClassicalState> seed_lattice(const SeedLattice& l) {
  if (l.nx < 1 || l.np < 1) throw invalid_argument("seed lattice needs nx, np >= 1");
  auto node = [](double lo, double hi, int n, int i) {
    return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  };
  std::vector<ClassicalState> seeds;
  seeds.reserve(static_cast<std::size_t>(l.nx) * l.np);
  for (int i = 0; i < l.nx; ++i) {
    for (int j = 0; j < l.np; ++j) {
      seeds.push_back({node(l.x_min, l.x_max, l.nx, i), node(l.p_min, l.p_max, l.np, j), 0.0});
    }
  }
  return seeds;
}

PoincareSection poincare_section(const std::vector<ClassicalState>& seeds, int n_periods,
                                 const Drive& drive, const IntegratorConfig& cfg,
                                 int threads) {
  if (n_periods < 0) throw invalid_argument("poincare_section: n_periods must be >= 0");
  for (const auto& s : seeds) {
    const double k = s.t / kDrivePeriod;
    if (std::abs(k - std::round(k)) > 1e-12 * std::max(1.0, std::abs(k))) {
      throw invalid_argument("poincare_section: seeds must start at a multiple of 2 pi");
    }
  }
  PoincareSection out;
  out.seeds = seeds;
  out.n_periods = n_periods;
  out.points.resize(seeds.size());
  std::vector<char> escaped(seeds.size(), 0);

  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    auto& pts = out.points[k];
    pts.reserve(static_cast<std::size_t>(n_periods) + 1);
    ClassicalState s = seeds[k];
    pts.push_back({s.x, s.p});
    try {
      for (int period = 1; period <= n_periods; ++period) {
        s = integrate(s, seeds[k].t + kDrivePeriod * period, drive, cfg);
        pts.push_back({s.x, s.p});
      }
    } catch (const TrajectoryEscaped&) {
      escaped[k] = 1;
    }
  });
  out.escaped.assign(escaped.begin(), escaped.end());
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Stability s) {
  switch (s) {
    case Stability::elliptic: return "elliptic";
    case Stability::hyperbolic: return "hyperbolic";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

PhasePoint one_period_map(const PhasePoint& z, const Drive& drive,
                          const IntegratorConfig& cfg) {
  const ClassicalState end = integrate({z.x, z.p, 0.0}, kDrivePeriod, drive, cfg);
  return {end.x, end.p};
}

Eigen::Matrix2d monodromy(const PhasePoint& z, const Drive& drive,
                          const IntegratorConfig& cfg) {
  return integrate_with_tangent({z.x, z.p, 0.0}, kDrivePeriod, drive, cfg).jacobian;
}

PhasePoint scan_for_period_one(const SeedLattice& window, const Drive& drive,
                               const IntegratorConfig& cfg) {
  PhasePoint best{};
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& seed : seed_lattice(window)) {
    try {
      const PhasePoint img = one_period_map({seed.x, seed.p}, drive, cfg);
      const double d = std::hypot(img.x - seed.x, img.p - seed.p);
      if (d < best_dist) {
        best_dist = d;
        best = {seed.x, seed.p};
      }
    } catch (const TrajectoryEscaped&) {
    }
  }
  if (!std::isfinite(best_dist)) {
    throw numeric_failure("scan_for_period_one: every seed escaped");
  }
  return best;
}

namespace {

Stability classify(double trace, double band) {
  const double a = std::abs(trace);
  if (std::abs(a - 2.0) <= band) return Stability::marginal;
  return a < 2.0 ? Stability::elliptic : Stability::hyperbolic;
}

}  // namespace

FixedPoint find_period_one_island(const PhasePoint& guess, const Drive& drive,
                                  const IntegratorConfig& cfg, const NewtonOptions& opts) {
  Eigen::Vector2d z(guess.x, guess.p);
  FixedPoint best;
  best.residual = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= opts.max_iterations; ++it) {
    TangentFlow flow;
    try {
      flow = integrate_with_tangent({z(0), z(1), 0.0}, kDrivePeriod, drive, cfg);
    } catch (const TrajectoryEscaped&) {
      throw NewtonFailure(best);
    }
    const Eigen::Vector2d g(flow.state.x - z(0), flow.state.p - z(1));
    const double residual = g.cwiseAbs().maxCoeff();

    if (residual < best.residual) {
      best.x0 = z(0);
      best.p0 = z(1);
      best.residual = residual;
      best.monodromy_trace = flow.jacobian.trace();
      best.monodromy_det = flow.jacobian.determinant();
      best.stability = classify(best.monodromy_trace, opts.marginal_band);
      best.iterations = it;
    }
    if (residual < opts.tolerance) return best;
    if (it == opts.max_iterations) break;

    const Eigen::Matrix2d jac = flow.jacobian - Eigen::Matrix2d::Identity();
    if (std::abs(jac.determinant()) < 1e-300) break;
    z -= jac.partialPivLu().solve(g);
    if (!std::isfinite(z(0)) || !std::isfinite(z(1))) break;
  }
  throw NewtonFailure(best);
}

}  // namespace dyntun::classical
