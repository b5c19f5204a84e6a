#include "dyntun/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dyntun/error.hpp"
#include "dyntun/parallel.hpp"
#include "fft.hpp"

namespace dyntun::quantum {

double Potential::operator()(double x, double t) const {
  const double x2 = x * x;
  return 0.5 * quadratic * x2 + 0.25 * quartic * (1.0 + modulation * std::cos(t)) * x2 * x2;
}

double potential(double x, double t, double kappa, double epsilon) {
  return Potential::driven(kappa, epsilon)(x, t);
}

void Diagnostics::warn(std::string message) {
  for (const auto& w : warnings) {
    if (w == message) return;
  }
  warnings.push_back(std::move(message));
}

void Model::validate() const {
  grid.validate();
  if (!(hbar_eff > 0.0)) throw invalid_argument("hbar_eff must be > 0");
  if (!(dt > 0.0)) throw invalid_argument("dt must be > 0");
}

namespace {
constexpr int kChunk = 32;
}

Evolver::Evolver(const Model& model)
    : model_(model),
      comp_(model.scheme == SplittingScheme::strang ? strang_midpoint()
                                                    : composition(model.scheme)) {
  model_.validate();
  const auto& g = model_.grid;
  fft_ = std::make_unique<detail::FftPlan>(g.n);
  half_x2_.resize(g.n);
  quarter_x4_.resize(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double x2 = g.x(j) * g.x(j);
    half_x2_[j] = 0.5 * x2;
    quarter_x4_[j] = 0.25 * x2 * x2;
  }
  const double hbar = model_.hbar_eff;
  for (double d : comp_.drift_weights) {
    Eigen::ArrayXcd phase(g.n);
    for (int k = 0; k < g.n; ++k) {
      const double p = g.momentum(k, hbar);
      phase[k] = std::polar(1.0 / g.n, -d * model_.dt * p * p / (2.0 * hbar));
    }
    drift_phase_.push_back(std::move(phase));
  }
  // Cache kicks when a whole number of steps spans the period and the cache
  // stays under ~256 MB.
  const double per = kDrivePeriod / model_.dt;
  const double rounded = std::round(per);
  const double bytes = rounded * static_cast<double>(comp_.drift_weights.size()) * g.n * 16.0;
  if (std::abs(per - rounded) < 1e-9 * per && rounded >= 1.0 && bytes < 256e6) {
    steps_per_period_ = static_cast<long>(rounded);
  }
}

Evolver::~Evolver() = default;

long Evolver::steps_for(double span) const {
  if (span < 0.0) throw invalid_argument("cannot evolve backwards in time");
  const double ratio = span / model_.dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "dt = " << model_.dt << " does not divide the evolution interval " << span;
    throw invalid_argument(msg.str());
  }
  return static_cast<long>(steps);
}

void Evolver::kick_phase(double w_quad, double w_quart, Complex* out) const {
  const int n = model_.grid.n;
  const double scale = -model_.dt / model_.hbar_eff;
  const double a = scale * model_.potential.quadratic * w_quad;
  const double b = scale * model_.potential.quartic * w_quart;
  for (int j = 0; j < n; ++j) {
    const double angle = a * half_x2_[j] + b * quarter_x4_[j];
    out[j] = Complex(std::cos(angle), std::sin(angle));
  }
}

// Kicks at the same step boundary are merged; kicks commute, so
// exp(-i h (w1 V(t1) + w2 V(t2))/hbar) is exact. Layout of one period:
// entry [i * stages + k] is the kick before drift k of step i, with k = 0
// including the trailing kick of the previous step; the final entry
// is the bare leading kick.
const std::vector<Eigen::ArrayXcd>& Evolver::kick_cache() const {
  std::call_once(cache_once_, [this] {
    const std::size_t stages = comp_.drift_weights.size();
    const double h = model_.dt;
    const Potential& v = model_.potential;
    auto modulated = [&](double w, double t) { return w * (1.0 + v.modulation * std::cos(t)); };
    const double w0 = comp_.kick_weights.front();
    const double wl = comp_.kick_weights.back();
    kick_cache_.reserve(static_cast<std::size_t>(steps_per_period_) * stages + 1);
    for (long i = 0; i < steps_per_period_; ++i) {
      const double ts = static_cast<double>(i) * h;
      for (std::size_t k = 0; k < stages; ++k) {
        const double w = comp_.kick_weights[k];
        double quad = w;
        double quart = modulated(w, ts + comp_.kick_times[k] * h);
        if (k == 0) {
          quad += wl;
          quart += modulated(wl, ts - h + comp_.kick_times[stages] * h);
        }
        Eigen::ArrayXcd phase(model_.grid.n);
        kick_phase(quad, quart, phase.data());
        kick_cache_.push_back(std::move(phase));
      }
    }
    Eigen::ArrayXcd lead(model_.grid.n);
    kick_phase(w0, modulated(w0, comp_.kick_times.front() * h), lead.data());
    kick_cache_.push_back(std::move(lead));
  });
  return kick_cache_;
}

void Evolver::advance_chunk(Complex* data, int ncols, double t0, long steps) const {
  const int n = model_.grid.n;
  const double h = model_.dt;
  const Potential& v = model_.potential;
  const std::size_t stages = comp_.drift_weights.size();
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(ncols) * n;

  detail::AlignedBuffer work(static_cast<std::size_t>(len));
  std::copy(data, data + len, work.data());

  auto multiply = [&](const Complex* phase) {
    Eigen::Map<const Eigen::ArrayXcd> ph(phase, n);
    for (int c = 0; c < ncols; ++c) {
      Eigen::Map<Eigen::ArrayXcd>(work.data() + static_cast<std::ptrdiff_t>(c) * n, n) *= ph;
    }
  };
  auto drift = [&](std::size_t k) {
    const Eigen::ArrayXcd& phase = drift_phase_[k];
    for (int c = 0; c < ncols; ++c) {
      Complex* col = work.data() + static_cast<std::ptrdiff_t>(c) * n;
      fft_->forward(col);
      Eigen::Map<Eigen::ArrayXcd>(col, n) *= phase;
      fft_->backward(col);
    }
  };

  const double cycles = t0 / kDrivePeriod;
  const bool on_edge = std::abs(cycles - std::round(cycles)) < 1e-12 * std::max(1.0, cycles);
  if (steps_per_period_ > 0 && on_edge) {
    const auto& cache = kick_cache();
    const std::size_t per = static_cast<std::size_t>(steps_per_period_) * stages;
    for (long i = 0; i < steps; ++i) {
      const std::size_t base = static_cast<std::size_t>(i % steps_per_period_) * stages;
      for (std::size_t k = 0; k < stages; ++k) {
        multiply(i == 0 && k == 0 ? cache[per].data() : cache[base + k].data());
        drift(k);
      }
    }
    Eigen::ArrayXcd trail(n);
    const double wl = comp_.kick_weights[stages];
    const double t_end = static_cast<double>(steps - 1) * h + comp_.kick_times[stages] * h;
    kick_phase(wl, wl * (1.0 + v.modulation * std::cos(t_end)), trail.data());
    multiply(trail.data());
  } else {
    Eigen::ArrayXcd kick(n);
    auto modulated = [&](double w, double t) { return w * (1.0 + v.modulation * std::cos(t)); };
    double pend_quad = 0.0;
    double pend_quart = 0.0;
    for (long i = 0; i < steps; ++i) {
      const double ts = t0 + static_cast<double>(i) * h;
      for (std::size_t k = 0; k < stages; ++k) {
        const double w = comp_.kick_weights[k];
        kick_phase(pend_quad + w, pend_quart + modulated(w, ts + comp_.kick_times[k] * h),
                   kick.data());
        multiply(kick.data());
        pend_quad = pend_quart = 0.0;
        drift(k);
      }
      const double w_last = comp_.kick_weights[stages];
      pend_quad = w_last;
      pend_quart = modulated(w_last, ts + comp_.kick_times[stages] * h);
    }
    kick_phase(pend_quad, pend_quart, kick.data());
    multiply(kick.data());
  }
  std::copy(work.data(), work.data() + len, data);
}

void Evolver::advance(Eigen::Ref<Eigen::MatrixXcd> columns, double t0, long steps,
                      int threads) const {
  if (columns.rows() != model_.grid.n) {
    throw invalid_argument("advance: column length does not match grid");
  }
  if (steps <= 0 || columns.cols() == 0) return;
  const int ncols = static_cast<int>(columns.cols());
  const std::size_t chunks = static_cast<std::size_t>((ncols + kChunk - 1) / kChunk);
  const bool contiguous = columns.outerStride() == columns.rows();
  if (!contiguous) {
    Eigen::MatrixXcd tmp = columns;
    advance(tmp, t0, steps, threads);
    columns = tmp;
    return;
  }
  parallel_for(chunks, threads, [&](std::size_t c) {
    const int first = static_cast<int>(c) * kChunk;
    const int count = std::min(kChunk, ncols - first);
    advance_chunk(columns.data() + static_cast<std::ptrdiff_t>(first) * columns.rows(), count,
                  t0, steps);
  });
}

WaveFunction Evolver::evolve(const WaveFunction& psi, double t_end, Diagnostics* diag) const {
  if (!(psi.grid() == model_.grid)) throw invalid_argument("evolve: grid mismatch");
  const long steps = steps_for(t_end - psi.time());
  if (steps == 0) return psi;
  const double scale = std::sqrt(model_.grid.dx());
  Eigen::MatrixXcd work = psi.amplitudes() * scale;
  advance(work, psi.time(), steps);
  WaveFunction out(model_.grid, work.col(0) / scale, psi.time() + steps * model_.dt);
  if (diag && momentum_edge_fraction(out) >= 1e-6) {
    diag->warn("grid too small: momentum distribution reaches the grid edge");
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXcd even_basis_vector(const SpatialGrid& grid, int m) {
  const int c = grid.center();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid.n);
  if (m == 0) {
    v[c] = 1.0;
  } else if (m == grid.n / 2) {
    v[0] = 1.0;
  } else {
    v[c + m] = v[c - m] = 1.0 / std::sqrt(2.0);
  }
  return v;
}

Eigen::VectorXcd odd_basis_vector(const SpatialGrid& grid, int m) {
  const int c = grid.center();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid.n);
  v[c + m] = 1.0 / std::sqrt(2.0);
  v[c - m] = -1.0 / std::sqrt(2.0);
  return v;
}

namespace {

// Projections of a full-grid column onto the parity bases.
void project_even(const SpatialGrid& g, const Complex* col, Complex* out) {
  const int c = g.center();
  const int half = g.n / 2;
  const double r = 1.0 / std::sqrt(2.0);
  out[0] = col[c];
  for (int m = 1; m < half; ++m) out[m] = r * (col[c + m] + col[c - m]);
  out[half] = col[0];
}

void project_odd(const SpatialGrid& g, const Complex* col, Complex* out) {
  const int c = g.center();
  const double r = 1.0 / std::sqrt(2.0);
  for (int m = 1; m < g.n / 2; ++m) out[m - 1] = r * (col[c + m] - col[c - m]);
}

}  // namespace

PropagatorBlocks build_propagator(const Model& model, double duration, int threads,
                                  Diagnostics* diag) {
  model.validate();
  if (model.grid.n < 4) throw invalid_argument("build_propagator needs n >= 4");
  const auto& g = model.grid;
  if (diag) {
    const auto w = g.resolution_warning(model.hbar_eff, model.p_interest, model.cutoff_safety);
    if (!w.empty()) diag->warn(w);
  }
  Evolver evolver(model);
  const long steps = evolver.steps_for(duration);

  const int n_even = g.n / 2 + 1;
  const int n_odd = g.n / 2 - 1;
  PropagatorBlocks blocks;
  blocks.grid = g;
  blocks.hbar_eff = model.hbar_eff;
  blocks.duration = duration;
  if (steps == 0) {
    blocks.even = Eigen::MatrixXcd::Identity(n_even, n_even);
    blocks.odd = Eigen::MatrixXcd::Identity(n_odd, n_odd);
    return blocks;
  }
  Eigen::MatrixXcd cols(g.n, g.n);
  for (int m = 0; m < n_even; ++m) cols.col(m) = even_basis_vector(g, m);
  for (int m = 1; m <= n_odd; ++m) cols.col(n_even + m - 1) = odd_basis_vector(g, m);

  evolver.advance(cols, 0.0, steps, threads);

  blocks.even.resize(n_even, n_even);
  blocks.odd.resize(n_odd, n_odd);
  Eigen::VectorXcd e_buf(n_even);
  Eigen::VectorXcd o_buf(n_odd);
  double leak = 0.0;
  for (int m = 0; m < g.n; ++m) {
    const Complex* col = cols.col(m).data();
    project_even(g, col, e_buf.data());
    project_odd(g, col, o_buf.data());
    if (m < n_even) {
      blocks.even.col(m) = e_buf;
      if (n_odd > 0) leak = std::max(leak, o_buf.cwiseAbs().maxCoeff());
    } else {
      blocks.odd.col(m - n_even) = o_buf;
      leak = std::max(leak, e_buf.cwiseAbs().maxCoeff());
    }
  }
  blocks.parity_leakage = leak;
  return blocks;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd d =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

}  // namespace dyntun::quantum
