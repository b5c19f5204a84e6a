#pragma once

// Reference computations written independently of the library: they share
// no code with core/ and use deliberately different methods (dense
// diagonalisation instead of split-step propagation, RK4 instead of
// symplectic splitting, finite differences instead of tangent maps).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHbarSI = 1.054571817e-34;
inline constexpr double kC = 299792458.0;

// ---- cavity drive ----

// Drive amplitude zeta for instantaneous power P, then the adiabatic cavity
// amplitude alpha = 2 zeta / gamma_c.
inline double photon_number_from_zeta(double power, double lambda, double gamma_c) {
  const double omega_l = 2.0 * kPi * kC / lambda;
  const double zeta = std::sqrt(2.0 * power * gamma_c / (kHbarSI * omega_l));
  const double alpha = 2.0 * zeta / gamma_c;
  return alpha * alpha;
}

// Integrates d(alpha)/dt = -gamma_c/2 alpha + zeta(t) with RK4 from the
// adiabatic initial value, for P(t) = P0 + PA cos(Omega t). Returns |alpha|^2
// at t_end.
inline double cavity_ode_photon_number(double P0, double PA, double Omega, double lambda,
                                       double gamma_c, double t_end, int steps) {
  const double omega_l = 2.0 * kPi * kC / lambda;
  auto zeta = [&](double t) {
    return std::sqrt(2.0 * (P0 + PA * std::cos(Omega * t)) * gamma_c / (kHbarSI * omega_l));
  };
  auto f = [&](double t, double a) { return -0.5 * gamma_c * a + zeta(t); };
  double a = 2.0 * zeta(0.0) / gamma_c;
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const double k1 = f(t, a);
    const double k2 = f(t + 0.5 * h, a + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, a + 0.5 * h * k2);
    const double k4 = f(t + h, a + h * k3);
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return a * a;
}

// ---- effective Planck constant, three routes ----

struct Device {
  double m, omega_m, g4, lambda, P0, gamma_c, Omega;
};

inline double heff_closed_form(const Device& d) {
  const double omega_l = 2.0 * kPi * kC / d.lambda;
  return 32.0 * kHbarSI * d.g4 * d.P0 /
         (d.m * d.m * d.omega_m * d.omega_m * d.Omega * omega_l * d.gamma_c);
}

// Prefactor of the rescaled Schroedinger equation: 16 sigma^4 g4 |alpha0|^2 / Omega.
inline double heff_from_zero_point(const Device& d) {
  const double sigma = std::sqrt(kHbarSI / (2.0 * d.m * d.omega_m));
  const double n0 = photon_number_from_zeta(d.P0, d.lambda, d.gamma_c);
  return 16.0 * std::pow(sigma, 4) * d.g4 * n0 / d.Omega;
}

// Commutator route: [x~, p~] = i hbar tau / (m L^2).
inline double heff_from_scales(const Device& d) {
  const double sigma = std::sqrt(kHbarSI / (2.0 * d.m * d.omega_m));
  const double n0 = photon_number_from_zeta(d.P0, d.lambda, d.gamma_c);
  const double L = 1.0 / (sigma * std::sqrt(8.0 * d.g4 * n0 / d.omega_m));
  const double tau = 1.0 / d.Omega;
  return kHbarSI * tau / (d.m * L * L);
}

// Closed forms with gamma_c = 10 omega_m (and Omega = omega_m / sqrt(kappa)).
inline double heff_gamma_tied(const Device& d) {
  const double omega_l = 2.0 * kPi * kC / d.lambda;
  return kHbarSI * d.g4 * d.P0 / (5.0 * std::pow(kPi, 4) * d.m * d.m * omega_l) /
         ((d.Omega / (2.0 * kPi)) * std::pow(d.omega_m / (2.0 * kPi), 3));
}
inline double heff_omega_tied(const Device& d) {
  const double omega_l = 2.0 * kPi * kC / d.lambda;
  return 16.0 * kHbarSI * d.g4 / (kPi * d.m * d.m * d.omega_m * d.omega_m * omega_l * d.Omega) *
         d.P0 / (d.gamma_c / (2.0 * kPi));
}
inline double heff_both_tied(const Device& d, double kappa) {
  const double omega_l = 2.0 * kPi * kC / d.lambda;
  return kHbarSI * d.g4 * std::sqrt(kappa) / (5.0 * std::pow(kPi, 4) * d.m * d.m * omega_l) *
         d.P0 / std::pow(d.omega_m / (2.0 * kPi), 4);
}

// ---- static spectrum on the periodic grid ----

struct StaticSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd states;  // columns, normalised with sum |phi|^2 dx = 1
  std::vector<int> parity;  // +1 even, -1 odd
  double dx;
};

// Dense Hamiltonian H = T + V on x_j = -x_max + j dx with the kinetic matrix
// assembled from its Fourier representation by explicit cosine sums:
// T_jl = (1/n) sum_k (p_k^2/2) cos(2 pi k (j - l)/n), p_k = hbar 2 pi k/(n dx).
inline StaticSpectrum static_spectrum(int n, double x_max, double hbar, double a2, double a4) {
  const double dx = 2.0 * x_max / n;
  std::vector<double> t(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int k = -n / 2; k < n / 2; ++k) {
      const double p = hbar * 2.0 * kPi * k / (n * dx);
      acc += 0.5 * p * p * std::cos(2.0 * kPi * k * m / n);
    }
    t[static_cast<std::size_t>(m)] = acc / n;
  }
  Eigen::MatrixXd h(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) h(j, l) = t[static_cast<std::size_t>(((j - l) % n + n) % n)];
    const double x = -x_max + j * dx;
    h(j, j) += 0.5 * a2 * x * x + 0.25 * a4 * x * x * x * x;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  StaticSpectrum out;
  out.energies = es.eigenvalues();
  out.states = es.eigenvectors() / std::sqrt(dx);
  out.dx = dx;
  for (int c = 0; c < n; ++c) {
    double sym = 0.0;
    for (int j = 0; j < n; ++j) sym += out.states(j, c) * out.states((n - j) % n, c) * dx;
    out.parity.push_back(sym > 0.0 ? 1 : -1);
  }
  return out;
}

// Folds E into [-hbar/2, hbar/2) for drive period 2 pi.
inline double fold(double e, double hbar) { return e - hbar * std::floor(e / hbar + 0.5); }

inline double circular(double a, double b, double hbar) {
  double d = std::fmod(std::abs(a - b), hbar);
  return std::min(d, hbar - d);
}

// ---- classical dynamics by RK4 ----

struct Phase {
  double x, p;
};

inline Phase rk4_flow(Phase z, double t0, double t1, double kappa, double eps, int steps) {
  auto acc = [&](double x, double t) {
    return -kappa * x - kappa * (1.0 + eps * std::cos(t)) * x * x * x;
  };
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const double k1x = z.p, k1p = acc(z.x, t);
    const double k2x = z.p + 0.5 * h * k1p, k2p = acc(z.x + 0.5 * h * k1x, t + 0.5 * h);
    const double k3x = z.p + 0.5 * h * k2p, k3p = acc(z.x + 0.5 * h * k2x, t + 0.5 * h);
    const double k4x = z.p + h * k3p, k4p = acc(z.x + h * k3x, t + h);
    z.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    z.p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  return z;
}

// Newton on the RK4 one-period map with a central-difference Jacobian.
inline Phase rk4_period_one(Phase z, double kappa, double eps, int steps = 8192) {
  const double period = 2.0 * kPi;
  for (int it = 0; it < 40; ++it) {
    const Phase f = rk4_flow(z, 0.0, period, kappa, eps, steps);
    const double gx = f.x - z.x, gp = f.p - z.p;
    if (std::hypot(gx, gp) < 1e-12) break;
    const double h = 1e-6;
    const Phase fxp = rk4_flow({z.x + h, z.p}, 0.0, period, kappa, eps, steps);
    const Phase fxm = rk4_flow({z.x - h, z.p}, 0.0, period, kappa, eps, steps);
    const Phase fpp = rk4_flow({z.x, z.p + h}, 0.0, period, kappa, eps, steps);
    const Phase fpm = rk4_flow({z.x, z.p - h}, 0.0, period, kappa, eps, steps);
    Eigen::Matrix2d j;
    j << (fxp.x - fxm.x) / (2 * h) - 1.0, (fpp.x - fpm.x) / (2 * h),
        (fxp.p - fxm.p) / (2 * h), (fpp.p - fpm.p) / (2 * h) - 1.0;
    const Eigen::Vector2d d = j.fullPivLu().solve(Eigen::Vector2d(-gx, -gp));
    z.x += d[0];
    z.p += d[1];
  }
  return z;
}

// ---- discrete Fourier transform by direct summation ----

inline std::vector<double> naive_momentum_density(const Eigen::VectorXcd& psi, double dx) {
  const int n = static_cast<int>(psi.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j) acc += psi[j] * std::polar(1.0, -2.0 * kPi * k * j / n);
    out[static_cast<std::size_t>(k)] = std::norm(acc) * dx / n;
  }
  return out;
}

}  // namespace oracle
