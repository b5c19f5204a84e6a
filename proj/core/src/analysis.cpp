#include "dyntun/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dyntun/error.hpp"
#include "dyntun/parallel.hpp"

namespace dyntun::analysis {

using quantum::Complex;
using quantum::Parity;

double default_coherent_width(double hbar_eff) { return std::sqrt(0.5 * hbar_eff); }

namespace {

// Unnormalised Gaussian amplitudes; the caller normalises.
Eigen::VectorXcd gaussian(double x0, double p0, double width, double hbar_eff,
                          const SpatialGrid& grid) {
  Eigen::VectorXcd v(grid.n);
  const double inv4w2 = 1.0 / (4.0 * width * width);
  for (int j = 0; j < grid.n; ++j) {
    const double d = grid.x(j) - x0;
    v[j] = std::polar(std::exp(-d * d * inv4w2), p0 * d / hbar_eff);
  }
  return v;
}

}  // namespace

WaveFunction coherent_state(double x0, double p0, double width, double hbar_eff,
                            const SpatialGrid& grid) {
  if (!(width > 0.0)) throw invalid_argument("coherent state width must be > 0");
  if (!(hbar_eff > 0.0)) throw invalid_argument("hbar_eff must be > 0");
  WaveFunction psi = WaveFunction(grid, gaussian(x0, p0, width, hbar_eff, grid)).normalized();
  const double dx = grid.dx();
  const double edge = std::max(std::norm(psi.amplitudes()[0]), std::norm(psi.amplitudes()[grid.n - 1])) * dx;
  if (edge > 1e-12) throw invalid_argument("grid too small for coherent state");
  return psi;
}

double HusimiMap::total() const {
  double acc = 0.0;
  for (double v : q) acc += v;
  return acc * dx * dp;
}

HusimiMap husimi(const WaveFunction& state, const PhaseSpaceWindow& w, double width,
                 double hbar_eff, int threads) {
  if (w.nx < 2 || w.np < 2) throw invalid_argument("husimi window needs nx, np >= 2");
  if (!(width > 0.0)) throw invalid_argument("husimi width must be > 0");
  const SpatialGrid& g = state.grid();
  HusimiMap map;
  map.dx = (w.x_max - w.x_min) / (w.nx - 1);
  map.dp = (w.p_max - w.p_min) / (w.np - 1);
  for (int i = 0; i < w.nx; ++i) map.xs.push_back(w.x_min + i * map.dx);
  for (int i = 0; i < w.np; ++i) map.ps.push_back(w.p_min + i * map.dp);
  map.xs.back() = w.x_max;
  map.ps.back() = w.p_max;
  map.q.assign(map.xs.size() * map.ps.size(), 0.0);

  // Analytic normalisation of the continuum coherent state.
  const double norm = std::pow(2.0 * std::numbers::pi * width * width, -0.25);
  const double inv4w2 = 1.0 / (4.0 * width * width);
  const double prefactor = 1.0 / (2.0 * std::numbers::pi * hbar_eff);
  const double dx = g.dx();
  const Eigen::VectorXcd& psi = state.amplitudes();

  parallel_for(map.xs.size(), threads, [&](std::size_t ix) {
    const double x0 = map.xs[ix];
    // Only nodes where the envelope is non-negligible contribute.
    std::vector<int> idx;
    std::vector<double> env;
    std::vector<double> dxs;
    for (int j = 0; j < g.n; ++j) {
      const double d = g.x(j) - x0;
      const double e = d * d * inv4w2;
      if (e < 40.0) {
        idx.push_back(j);
        env.push_back(norm * std::exp(-e));
        dxs.push_back(d);
      }
    }
    for (std::size_t ip = 0; ip < map.ps.size(); ++ip) {
      const double k = map.ps[ip] / hbar_eff;
      Complex acc = 0.0;
      for (std::size_t a = 0; a < idx.size(); ++a) {
        // conj(alpha) psi with alpha = env * exp(i k d)
        acc += env[a] * std::polar(1.0, -k * dxs[a]) * psi[idx[a]];
      }
      map.q[ix * map.ps.size() + ip] = prefactor * std::norm(acc * dx);
    }
  });
  return map;
}

std::vector<LocalMaximum> dominant_maxima(const HusimiMap& map, double fraction) {
  std::vector<LocalMaximum> out;
  const std::size_t nx = map.xs.size();
  const std::size_t np = map.ps.size();
  const double qmax = *std::max_element(map.q.begin(), map.q.end());
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    for (std::size_t j = 1; j + 1 < np; ++j) {
      const double v = map.at(i, j);
      if (v < fraction * qmax) continue;
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (map.at(i + di, j + dj) > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) out.push_back({i, j, map.xs[i], map.ps[j], v});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LocalMaximum& a, const LocalMaximum& b) { return a.q > b.q; });
  return out;
}

// ---------------------------------------------------------------------------

double tunnelling_period(double splitting, double hbar_eff) {
  if (!(splitting > 1e-15 * hbar_eff)) {
    throw numeric_failure("degenerate pair, period unresolvable");
  }
  return 2.0 * std::numbers::pi * hbar_eff / splitting;
}

double tunnelling_period(const TunnellingPair& pair) {
  return tunnelling_period(pair.splitting, pair.hbar_eff);
}

TunnellingPair find_tunnelling_pair(const FloquetSpectrum& spectrum, const PairSearch& search) {
  const double hbar = spectrum.hbar_eff;
  const double width = search.width > 0.0 ? search.width : default_coherent_width(hbar);
  const WaveFunction probe =
      coherent_state(search.island_x, search.island_p, width, hbar, spectrum.grid);
  const Eigen::VectorXcd c = quantum::floquet_coefficients(spectrum, probe);

  std::optional<std::size_t> best_odd;
  std::optional<std::size_t> best_even;
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    const double w = std::norm(c[static_cast<Eigen::Index>(n)]);
    auto& slot = spectrum.parity[n] == Parity::odd ? best_odd : best_even;
    if (!slot || w > std::norm(c[static_cast<Eigen::Index>(*slot)])) slot = n;
  }
  if (!best_odd || !best_even) {
    throw invalid_argument("find_tunnelling_pair: spectrum lacks one parity");
  }
  TunnellingPair pair;
  pair.u = *best_odd;
  pair.v = *best_even;
  pair.hbar_eff = hbar;
  pair.overlap_u = std::norm(c[static_cast<Eigen::Index>(pair.u)]);
  pair.overlap_v = std::norm(c[static_cast<Eigen::Index>(pair.v)]);
  if (std::min(pair.overlap_u, pair.overlap_v) < search.overlap_floor) {
    std::ostringstream msg;
    msg << "no island-supported state; check hbar_eff vs island area (overlaps "
        << pair.overlap_u << ", " << pair.overlap_v << ")";
    throw numeric_failure(msg.str());
  }
  pair.E_u = spectrum.quasi_energies[pair.u];
  pair.E_v = spectrum.quasi_energies[pair.v];
  pair.splitting = quantum::circular_distance(pair.E_u, pair.E_v, hbar, spectrum.period);
  pair.T_tun = pair.splitting > 1e-15 * hbar ? tunnelling_period(pair) : 0.0;

  // <x> of (u + e^{i phi} v)/sqrt2 is Re(e^{i phi} <u|x|v>); maximise it.
  const auto& g = spectrum.grid;
  Complex xuv = 0.0;
  const auto u = spectrum.states.col(static_cast<Eigen::Index>(pair.u));
  const auto v = spectrum.states.col(static_cast<Eigen::Index>(pair.v));
  for (int j = 0; j < g.n; ++j) xuv += std::conj(u[j]) * g.x(j) * v[j];
  pair.relative_phase = std::abs(xuv) > 0.0 ? -std::arg(xuv) : 0.0;
  return pair;
}

WaveFunction combine_pair(const FloquetSpectrum& spectrum, const TunnellingPair& pair, int sign) {
  if (sign != 1 && sign != -1) throw invalid_argument("combine_pair: sign must be +1 or -1");
  const Complex phase = std::polar(static_cast<double>(sign), pair.relative_phase);
  Eigen::VectorXcd amp = (spectrum.states.col(static_cast<Eigen::Index>(pair.u)) +
                          phase * spectrum.states.col(static_cast<Eigen::Index>(pair.v))) /
                         std::sqrt(2.0);
  return WaveFunction(spectrum.grid, std::move(amp), 0.0);
}

// ---------------------------------------------------------------------------

std::string to_string(PeriodFit fit) {
  switch (fit) {
    case PeriodFit::first_minimum: return "first-minimum";
    case PeriodFit::cosine: return "cosine";
    case PeriodFit::none: return "none";
  }
  return "?";
}

namespace {

double cos2_residual(const std::vector<double>& p, double period) {
  double r = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const double c = std::cos(std::numbers::pi * static_cast<double>(s) / period);
    const double d = p[s] - p[0] * c * c;
    r += d * d;
  }
  return r;
}

// Least-squares period S of p0 cos^2(pi s / S) by log-grid scan plus golden
// section refinement.
double fit_cos2_period(const std::vector<double>& p) {
  const double lo = std::log(2.0);
  const double hi = std::log(1e12);
  const int samples = 400;
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double r = cos2_residual(p, std::exp(lo + (hi - lo) * i / samples));
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / samples;
  double b = lo + (hi - lo) * std::min(best + 1, samples) / samples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = cos2_residual(p, std::exp(c));
  double fd = cos2_residual(p, std::exp(d));
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = cos2_residual(p, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = cos2_residual(p, std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

PeriodEstimate fit_tunnelling_period(const std::vector<double>& p) {
  PeriodEstimate est;
  if (p.size() < 3) {
    est.exceeds_horizon = true;
    return est;
  }
  const auto [lo_it, hi_it] = std::minmax_element(p.begin(), p.end());
  const double range = *hi_it - *lo_it;
  // A minimum counts when it sits in the lower half of the observed swing.
  for (std::size_t s = 1; s + 1 < p.size(); ++s) {
    if (p[s] <= p[s - 1] && p[s] < p[s + 1] && p[0] - p[s] > 0.5 * range && range > 0.0) {
      const double y0 = p[s - 1];
      const double y1 = p[s];
      const double y2 = p[s + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      const double shift = denom > 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
      est.period_in_drive_periods = 2.0 * (static_cast<double>(s) + shift);
      est.method = PeriodFit::first_minimum;
      return est;
    }
  }
  est.exceeds_horizon = true;
  if (p[0] > 0.0 && range > 1e-13) {
    est.period_in_drive_periods = fit_cos2_period(p);
    est.method = PeriodFit::cosine;
  }
  return est;
}

TunnellingSeries measure_tunnelling(const WaveFunction& psi0, const FloquetSpectrum& spectrum,
                                    const TunnellingPair& pair, long s_max,
                                    const quantum::Evolver& evolver,
                                    quantum::Diagnostics* diag) {
  if (s_max < 0) throw invalid_argument("measure_tunnelling: s_max must be >= 0");
  TunnellingSeries out;
  if (s_max == 0) {
    out.estimate.exceeds_horizon = true;
    return out;
  }
  const WaveFunction plus = combine_pair(spectrum, pair, +1);
  const WaveFunction minus = combine_pair(spectrum, pair, -1);
  WaveFunction psi = psi0;
  for (long s = 0;; ++s) {
    out.p_plus.push_back(std::norm(plus.inner(psi)));
    out.p_minus.push_back(std::norm(minus.inner(psi)));
    if (s == s_max) break;
    psi = evolver.evolve(psi, psi.time() + quantum::kDrivePeriod, diag);
  }
  out.estimate = fit_tunnelling_period(out.p_plus);
  return out;
}

TunnellingSeries floquet_tunnelling_series(const WaveFunction& psi0,
                                           const FloquetSpectrum& spectrum,
                                           const TunnellingPair& pair, long s_max) {
  TunnellingSeries out;
  const WaveFunction plus = combine_pair(spectrum, pair, +1);
  const WaveFunction minus = combine_pair(spectrum, pair, -1);
  const Eigen::VectorXcd c = quantum::floquet_coefficients(spectrum, psi0);
  const Eigen::VectorXcd cp = quantum::floquet_coefficients(spectrum, plus);
  const Eigen::VectorXcd cm = quantum::floquet_coefficients(spectrum, minus);
  Eigen::VectorXcd phased(c.size());
  for (long s = 0; s <= s_max; ++s) {
    const double t = static_cast<double>(s) * spectrum.period;
    for (Eigen::Index n = 0; n < c.size(); ++n) {
      phased[n] = c[n] * std::polar(1.0, -spectrum.quasi_energies[static_cast<std::size_t>(n)] *
                                             t / spectrum.hbar_eff);
    }
    out.p_plus.push_back(std::norm(cp.dot(phased)));
    out.p_minus.push_back(std::norm(cm.dot(phased)));
  }
  out.estimate = fit_tunnelling_period(out.p_plus);
  return out;
}

WaveFunction approx_initial_state(double kappa_ini, double hbar_eff, const SpatialGrid& grid,
                                  double x0, double p0) {
  if (!(kappa_ini > 0.0)) throw invalid_argument("kappa_ini must be > 0");
  const double width = std::sqrt(hbar_eff / (2.0 * std::sqrt(kappa_ini)));
  if (width < 3.0 * grid.dx()) throw invalid_argument("grid under-resolves initial state");
  return coherent_state(x0, p0, width, hbar_eff, grid);
}

}  // namespace dyntun::analysis
