#include "dyntun/floquet.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <sstream>

#include "dyntun/error.hpp"

namespace dyntun::quantum {

std::string to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

WaveFunction FloquetSpectrum::state(std::size_t index) const {
  return WaveFunction(grid, states.col(static_cast<Eigen::Index>(index)), 0.0);
}

double quasi_energy(std::complex<double> xi, double hbar_eff, double period) {
  double e = -hbar_eff * std::arg(xi) / period;
  const double zone = 2.0 * std::numbers::pi * hbar_eff / period;
  // arg in (-pi, pi] maps to [-zone/2, zone/2); guard rounding at the edge.
  if (e >= 0.5 * zone) e -= zone;
  return e;
}

double circular_distance(double e1, double e2, double hbar_eff, double period) {
  const double zone = 2.0 * std::numbers::pi * hbar_eff / period;
  double d = std::fmod(std::abs(e1 - e2), zone);
  return std::min(d, zone - d);
}

namespace {

struct BlockEigen {
  std::vector<std::complex<double>> xi;
  Eigen::MatrixXcd vectors;
};

BlockEigen diagonalize(const Eigen::MatrixXcd& u, double period, double hbar,
                       const DecomposeOptions& opts) {
  BlockEigen out;
  if (u.rows() == 0) return out;
  // A unitary matrix is normal, so its Schur form is diagonal and the Schur
  // vectors are already an orthonormal eigenbasis. Any sizeable
  // off-diagonal part means the input was not unitary.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u, true);
  if (schur.info() != Eigen::Success) {
    throw numeric_failure("Floquet eigendecomposition failed to converge");
  }
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::VectorXcd vals = t.diagonal();
  const Eigen::MatrixXcd& vecs = schur.matrixU();
  const Eigen::Index m = u.rows();

  const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff();
  if (m > 1 && off > opts.unitarity_tolerance) {
    std::ostringstream msg;
    msg << "propagator not unitary: Schur form off-diagonal " << off;
    throw numeric_failure(msg.str());
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    const double dev = std::abs(std::abs(vals[i]) - 1.0);
    if (dev > opts.unitarity_tolerance) {
      std::ostringstream msg;
      msg << "propagator not unitary: |xi| deviates from 1 by " << dev;
      throw numeric_failure(msg.str());
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return quasi_energy(vals[a], hbar, period) < quasi_energy(vals[b], hbar, period);
  });

  out.vectors.resize(m, m);
  out.xi.resize(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    out.xi[k] = vals[order[k]];
    out.vectors.col(k) = vecs.col(order[k]).normalized();
  }

  // Modified Gram-Schmidt inside clusters of (numerically) equal eigenvalues.
  for (Eigen::Index start = 0; start < m;) {
    Eigen::Index end = start + 1;
    while (end < m && std::abs(out.xi[end] - out.xi[end - 1]) < opts.degeneracy_tolerance) ++end;
    for (Eigen::Index a = start + 1; a < end; ++a) {
      for (Eigen::Index b = start; b < a; ++b) {
        const std::complex<double> proj = out.vectors.col(b).dot(out.vectors.col(a));
        out.vectors.col(a) -= proj * out.vectors.col(b);
      }
      out.vectors.col(a).normalize();
    }
    start = end;
  }
  return out;
}

}  // namespace

FloquetSpectrum floquet_decompose(const PropagatorBlocks& blocks, const DecomposeOptions& opts) {
  if (!(blocks.duration > 0.0)) {
    throw invalid_argument("floquet_decompose needs a propagator over a positive period");
  }
  const SpatialGrid& g = blocks.grid;
  const double hbar = blocks.hbar_eff;
  const double period = blocks.duration;
  const BlockEigen even = diagonalize(blocks.even, period, hbar, opts);
  const BlockEigen odd = diagonalize(blocks.odd, period, hbar, opts);

  struct Entry {
    double energy;
    Parity parity;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < even.xi.size(); ++i) {
    entries.push_back({quasi_energy(even.xi[i], hbar, period), Parity::even,
                       static_cast<Eigen::Index>(i)});
  }
  for (std::size_t i = 0; i < odd.xi.size(); ++i) {
    entries.push_back({quasi_energy(odd.xi[i], hbar, period), Parity::odd,
                       static_cast<Eigen::Index>(i)});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.energy < b.energy; });

  FloquetSpectrum spec;
  spec.grid = g;
  spec.hbar_eff = hbar;
  spec.period = period;
  spec.states.resize(g.n, static_cast<Eigen::Index>(entries.size()));
  const int c = g.center();
  const int half = g.n / 2;
  const double r = 1.0 / std::sqrt(2.0);
  const double inv_sqrt_dx = 1.0 / std::sqrt(g.dx());

  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(g.n);
    std::complex<double> xi;
    if (e.parity == Parity::even) {
      const auto v = even.vectors.col(e.column);
      xi = even.xi[static_cast<std::size_t>(e.column)];
      full[c] = v[0];
      for (int m = 1; m < half; ++m) full[c + m] = full[c - m] = r * v[m];
      full[0] = v[half];
    } else {
      const auto v = odd.vectors.col(e.column);
      xi = odd.xi[static_cast<std::size_t>(e.column)];
      for (int m = 1; m < half; ++m) {
        full[c + m] = r * v[m - 1];
        full[c - m] = -r * v[m - 1];
      }
    }
    // Phase convention: largest amplitude on x >= 0 real positive.
    Eigen::Index arg = c;
    double best = -1.0;
    for (int j = c; j < g.n; ++j) {
      const double a = std::abs(full[j]);
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (best > 0.0) full *= std::conj(full[arg]) / std::abs(full[arg]);
    spec.states.col(static_cast<Eigen::Index>(k)) = full * inv_sqrt_dx;
    spec.quasi_energies.push_back(e.energy);
    spec.parity.push_back(e.parity);
    spec.eigenvalue_moduli.push_back(std::abs(xi));
  }
  return spec;
}

Eigen::VectorXcd floquet_coefficients(const FloquetSpectrum& spectrum, const WaveFunction& psi) {
  if (!(psi.grid() == spectrum.grid)) throw invalid_argument("floquet_coefficients: grid mismatch");
  return spectrum.states.adjoint() * psi.amplitudes() * spectrum.grid.dx();
}

WaveFunction floquet_evolve(const Eigen::VectorXcd& coefficients, const FloquetSpectrum& spectrum,
                            long s) {
  if (coefficients.size() != static_cast<Eigen::Index>(spectrum.size())) {
    throw invalid_argument("floquet_evolve: coefficient count does not match spectrum");
  }
  const double weight = coefficients.squaredNorm();
  if (std::abs(weight - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "floquet_evolve: coefficients not normalised (sum |c|^2 = " << weight << ")";
    throw invalid_argument(msg.str());
  }
  Eigen::VectorXcd phased(coefficients.size());
  const double t = static_cast<double>(s) * spectrum.period;
  for (Eigen::Index n = 0; n < coefficients.size(); ++n) {
    phased[n] = coefficients[n] *
                std::polar(1.0, -spectrum.quasi_energies[static_cast<std::size_t>(n)] * t /
                                    spectrum.hbar_eff);
  }
  return WaveFunction(spectrum.grid, spectrum.states * phased, t);
}

StroboscopicDensity stroboscopic_density(const WaveFunction& psi0, long s_max,
                                         const Evolver& evolver, Diagnostics* diag) {
  if (s_max < 0) throw invalid_argument("stroboscopic_density: s_max must be >= 0");
  const auto& g = psi0.grid();
  StroboscopicDensity out;
  out.rho.resize(s_max + 1, g.n);
  WaveFunction psi = psi0;
  for (long s = 0;; ++s) {
    out.rho.row(s) = psi.density().transpose();
    out.norms.push_back(psi.norm());
    if (s == s_max) break;
    psi = evolver.evolve(psi, psi.time() + kDrivePeriod, diag);
  }
  out.final_state = psi;
  return out;
}

}  // namespace dyntun::quantum
