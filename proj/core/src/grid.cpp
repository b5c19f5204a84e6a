#include "dyntun/grid.hpp"

#include <cmath>
#include <mutex>
#include <new>
#include <numbers>
#include <sstream>
#include <vector>

#include "dyntun/error.hpp"
#include "fft.hpp"

namespace dyntun::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

AlignedBuffer::AlignedBuffer(std::size_t count)
    : data_(reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * count))) {
  if (!data_) throw std::bad_alloc();
}

AlignedBuffer::~AlignedBuffer() { fftw_free(data_); }

FftPlan::FftPlan(int n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  AlignedBuffer scratch(static_cast<std::size_t>(n));
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  forward_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
}

void FftPlan::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(forward_, p, p);
}

void FftPlan::backward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(backward_, p, p);
}

}  // namespace dyntun::detail

namespace dyntun::quantum {

double SpatialGrid::momentum(int k, double hbar_eff) const {
  const int signed_k = k < n / 2 ? k : k - n;
  return hbar_eff * 2.0 * std::numbers::pi * signed_k / (n * dx());
}

double SpatialGrid::momentum_cutoff(double hbar_eff) const {
  return std::numbers::pi * hbar_eff / dx();
}

std::vector<double> SpatialGrid::positions() const {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) xs[j] = x(j);
  return xs;
}

std::vector<std::string> SpatialGrid::violations() const {
  std::vector<std::string> out;
  if (n < 2 || (n & (n - 1)) != 0) out.push_back("grid.n must be a power of two >= 2");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) out.push_back("grid.x_max must be > 0");
  return out;
}

void SpatialGrid::validate() const {
  const auto v = violations();
  if (!v.empty()) throw invalid_argument(v.front());
}

std::string SpatialGrid::resolution_warning(double hbar_eff, double p_interest,
                                            double safety) const {
  const double cutoff = momentum_cutoff(hbar_eff);
  if (cutoff > safety * p_interest) return {};
  std::ostringstream msg;
  msg << "grid too small: momentum cutoff " << cutoff << " does not exceed " << safety
      << " x " << p_interest;
  return msg.str();
}

WaveFunction::WaveFunction(SpatialGrid grid, Eigen::VectorXcd amplitudes, double t)
    : grid_(grid), amplitudes_(std::move(amplitudes)), t_(t) {
  if (amplitudes_.size() != grid_.n) {
    throw invalid_argument("wave function size does not match grid");
  }
}

double WaveFunction::norm() const { return amplitudes_.squaredNorm() * grid_.dx(); }

WaveFunction WaveFunction::normalized() const {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw numeric_failure("cannot normalise a zero wave function");
  return WaveFunction(grid_, amplitudes_ / std::sqrt(nrm), t_);
}

Complex WaveFunction::inner(const WaveFunction& other) const {
  return amplitudes_.dot(other.amplitudes_) * grid_.dx();
}

Eigen::VectorXd WaveFunction::density() const { return amplitudes_.cwiseAbs2(); }

double WaveFunction::mean_position() const {
  double acc = 0.0;
  for (int j = 0; j < grid_.n; ++j) acc += grid_.x(j) * std::norm(amplitudes_[j]);
  return acc * grid_.dx() / norm();
}

double WaveFunction::position_variance() const {
  const double mean = mean_position();
  double acc = 0.0;
  for (int j = 0; j < grid_.n; ++j) {
    const double d = grid_.x(j) - mean;
    acc += d * d * std::norm(amplitudes_[j]);
  }
  return acc * grid_.dx() / norm();
}

WaveFunction WaveFunction::parity_image() const {
  Eigen::VectorXcd out(grid_.n);
  for (int j = 0; j < grid_.n; ++j) out[j] = amplitudes_[grid_.mirror(j)];
  return WaveFunction(grid_, std::move(out), t_);
}

Eigen::VectorXd momentum_distribution(const WaveFunction& psi) {
  const auto& grid = psi.grid();
  detail::FftPlan plan(grid.n);
  detail::AlignedBuffer buf(static_cast<std::size_t>(grid.n));
  Eigen::Map<Eigen::VectorXcd> work(buf.data(), grid.n);
  work = psi.amplitudes() * std::sqrt(grid.dx());
  plan.forward(work.data());
  return work.cwiseAbs2() / static_cast<double>(grid.n);
}

double mean_momentum(const WaveFunction& psi, double hbar_eff) {
  const Eigen::VectorXd prob = momentum_distribution(psi);
  double acc = 0.0;
  for (int k = 0; k < psi.grid().n; ++k) acc += psi.grid().momentum(k, hbar_eff) * prob[k];
  return acc / prob.sum();
}

double momentum_edge_fraction(const WaveFunction& psi) {
  const Eigen::VectorXd prob = momentum_distribution(psi);
  const int n = psi.grid().n;
  const double edge = 0.9 * (n / 2);
  double outer = 0.0;
  for (int k = 0; k < n; ++k) {
    const int signed_k = k < n / 2 ? k : k - n;
    if (std::abs(signed_k) > edge) outer += prob[k];
  }
  return outer / prob.sum();
}

}  // namespace dyntun::quantum
