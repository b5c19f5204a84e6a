#include <doctest.h>

#include <cmath>
#include <random>

#include "dyntun/error.hpp"
#include "dyntun/params.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dyntun::params;

namespace {

constexpr double kTwoPiD = 2.0 * std::numbers::pi;

PhysicalParams set1() {
  PhysicalParams p;
  p.m = 50e-15;
  p.omega_m = kTwoPiD * 100e3;
  p.g4 = kTwoPiD * 0.4e36;
  p.lambda_l = 1064e-9;
  p.P0 = 5e-6;
  p.PA = 0.0;
  p.gamma_c = 10.0 * p.omega_m;
  p.Omega = p.omega_m / std::sqrt(1.2);
  return p;
}

PhysicalParams set2() {
  PhysicalParams p;
  p.m = 1e-15;
  p.omega_m = kTwoPiD * 10e3;
  p.g4 = kTwoPiD * 1e39;
  p.lambda_l = 1064e-9;
  p.P0 = 0.5e-3;
  p.PA = 0.45e-3;
  p.gamma_c = 10.0 * p.omega_m;
  p.Omega = p.omega_m / std::sqrt(1.2);
  return p;
}

oracle::Device device(const PhysicalParams& p) {
  return {p.m, p.omega_m, p.g4, p.lambda_l, p.P0, p.gamma_c, p.Omega};
}

PhysicalParams random_params(std::mt19937_64& rng) {
  auto logu = [&](double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  };
  PhysicalParams p;
  p.m = logu(1e-17, 1e-12);
  p.omega_m = logu(1e3, 1e7);
  p.g4 = logu(1e30, 1e42);
  p.lambda_l = logu(400e-9, 2000e-9);
  p.P0 = logu(1e-7, 1e-1);
  p.PA = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * p.P0;
  p.gamma_c = logu(1e4, 1e10);
  p.Omega = logu(1e3, 1e7);
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("params") {
  TEST_CASE("constant drive gives the adiabatic photon number at all times") {
    PhysicalParams p = set2();
    p.PA = 0.0;
    const double expected = oracle::photon_number_from_zeta(p.P0, p.lambda_l, p.gamma_c);
    for (double t : {0.0, 1e-5, 3.3e-4, 1.0}) {
      CHECK(rel(cavity_mean_field(p, t), expected) < 1e-13);
    }
  }

  TEST_CASE("full-depth modulation empties the cavity at Omega t = pi") {
    PhysicalParams p = set2();
    p.PA = p.P0;
    const double t = std::numbers::pi / p.Omega;
    CHECK(std::abs(cavity_mean_field(p, t)) < 1e-9 * mean_photon_number(p));
  }

  TEST_CASE("0.5 mW at 1064 nm into a 2pi x 100 kHz cavity") {
    PhysicalParams p = set2();
    p.PA = 0.0;
    p.gamma_c = kTwoPiD * 100e3;
    const double n0 = cavity_mean_field(p, 0.0);
    CHECK(rel(n0, oracle::photon_number_from_zeta(0.5e-3, 1064e-9, kTwoPiD * 100e3)) < 1e-13);
    // 8 P0 / (hbar omega_l gamma_c) by hand: omega_l = 1.7704e15 rad/s.
    CHECK(n0 == doctest::Approx(3.409927e10).epsilon(1e-5));
  }

  TEST_CASE("bad-cavity limit: the cavity ODE follows the mean field") {
    PhysicalParams p = set2();
    double previous = 1.0;
    for (double ratio : {10.0, 100.0, 1000.0}) {
      p.gamma_c = ratio * p.omega_m;
      const double t_end = 7.3 / p.Omega;
      const double ode = oracle::cavity_ode_photon_number(p.P0, p.PA, p.Omega, p.lambda_l,
                                                          p.gamma_c, t_end, 200000);
      const double err = rel(ode, cavity_mean_field(p, t_end));
      CHECK(err < 3.0 * p.Omega / p.gamma_c);
      CHECK(err < previous);
      previous = err;
    }
  }

  TEST_CASE("mean field minimum is |alpha0|^2 (1 - epsilon) and nonnegative") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const PhysicalParams p = random_params(rng);
      const double eps = p.PA / p.P0;
      const double n0 = mean_photon_number(p);
      double lo = INFINITY;
      for (int k = 0; k <= 64; ++k) lo = std::min(lo, cavity_mean_field(p, k * kTwoPiD / (64 * p.Omega)));
      CHECK(lo == doctest::Approx(n0 * (1.0 - eps)).epsilon(1e-12).scale(n0));
      CHECK(lo >= -1e-12 * n0);
    }
  }

  TEST_CASE("adiabaticity: gamma_c = 10 omega_m passes") {
    PhysicalParams p = set2();
    p.Omega = 0.9 * p.omega_m;
    const auto r = adiabaticity_check(p, 2.0);
    CHECK(r.pass);
    CHECK(r.cavity_over_mechanical == doctest::Approx(10.0));
    CHECK(r.cavity_over_drive == doctest::Approx(10.0 / 0.9));
  }

  TEST_CASE("adiabaticity: gamma_c = omega_m fails") {
    PhysicalParams p = set2();
    p.gamma_c = p.omega_m;
    const auto r = adiabaticity_check(p, 1.0);
    CHECK_FALSE(r.pass);
    CHECK(r.cavity_over_mechanical == doctest::Approx(1.0));
  }

  TEST_CASE("adiabaticity ratios for the 1 pg device at the island position") {
    const PhysicalParams p = set2();
    const auto s = scale(p);
    const double x0 = fixtures::kIslandX0;
    const auto r = adiabaticity_check(p, x0);
    const double x = x0 * s.length_scale;
    CHECK(r.cavity_over_quartic == doctest::Approx(p.gamma_c / (p.g4 * std::pow(x, 4))));
    CHECK(r.cavity_over_drive == doctest::Approx(10.0 * std::sqrt(1.2)));
    // The quartic energy at the island is far below gamma_c.
    CHECK(r.cavity_over_quartic > 1e6);
    CHECK(r.pass);
  }

  TEST_CASE("50 pg device: hbar_eff is 6.7e-15") {
    const auto s = scale(set1());
    CHECK(rel(s.hbar_eff, 6.7e-15) < 0.03);
    CHECK(s.kappa == doctest::Approx(1.2));
  }

  TEST_CASE("1 pg device: hbar_eff is 0.042") {
    const auto s = scale(set2());
    CHECK(rel(s.hbar_eff, 0.042) < 0.03);
    CHECK(s.epsilon == doctest::Approx(0.9));
  }

  TEST_CASE("Omega = omega_m gives kappa = 1 and PA = 0 gives epsilon = 0") {
    PhysicalParams p = set2();
    p.Omega = p.omega_m;
    p.PA = 0.0;
    const auto s = scale(p);
    CHECK(s.kappa == 1.0);
    CHECK(s.epsilon == 0.0);
  }

  TEST_CASE("P0 = 0 has no length scale") {
    PhysicalParams p = set2();
    p.P0 = 0.0;
    p.PA = 0.0;
    try {
      scale(p);
      FAIL("expected an error");
    } catch (const dyntun::Error& e) {
      CHECK(std::string(e.what()) == "zero mean field, length scale undefined");
    }
  }

  TEST_CASE("PA > P0 is rejected as epsilon > 1") {
    PhysicalParams p = set2();
    p.PA = 2.0 * p.P0;
    const auto v = p.violations();
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("epsilon > 1") != std::string::npos);
    CHECK_THROWS_AS(p.validate(), dyntun::Error);
  }

  TEST_CASE("nonpositive fields are violations") {
    PhysicalParams p = set2();
    p.m = 0.0;
    p.gamma_c = -1.0;
    CHECK(p.violations().size() == 2);
  }

  TEST_CASE("three routes to hbar_eff agree") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
      const PhysicalParams p = random_params(rng);
      const double h = scale(p).hbar_eff;
      const auto d = device(p);
      CHECK(rel(h, oracle::heff_closed_form(d)) < 1e-12);
      CHECK(rel(h, oracle::heff_from_zero_point(d)) < 1e-12);
      CHECK(rel(h, oracle::heff_from_scales(d)) < 1e-12);
    }
  }

  TEST_CASE("closed forms with tied cavity and drive frequencies") {
    PhysicalParams p = set2();
    const auto d = device(p);
    CHECK(rel(scale(p).hbar_eff, oracle::heff_gamma_tied(d)) < 1e-12);
    CHECK(rel(scale(p).hbar_eff, oracle::heff_omega_tied(d)) < 1e-12);
    CHECK(rel(scale(p).hbar_eff, oracle::heff_both_tied(d, 1.2)) < 1e-12);
  }

  TEST_CASE("kappa Omega^2 = omega_m^2") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      const PhysicalParams p = random_params(rng);
      const auto s = scale(p);
      CHECK(rel(s.kappa * p.Omega * p.Omega, p.omega_m * p.omega_m) < 1e-14);
    }
  }

  TEST_CASE("coordinate maps") {
    const auto s = scale(set2());
    CHECK(to_scaled_position(s.length_scale, s) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(to_scaled_time(kTwoPiD / set2().Omega, s) == doctest::Approx(kTwoPiD).epsilon(1e-15));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng);
      CHECK(rel(to_scaled_position(from_scaled_position(x, s), s), x) < 1e-14);
      CHECK(rel(to_scaled_time(from_scaled_time(x, s), s), x) < 1e-14);
    }
  }

  TEST_CASE("physical island position maps back to the scaled island centre") {
    const auto s = scale(set2());
    const double x_phys = fixtures::island().x0 * s.length_scale;
    // About 11.7 pm for the 1 pg device.
    CHECK(x_phys == doctest::Approx(1.1742e-11).epsilon(1e-3));
    CHECK(to_scaled_position(x_phys, s) == doctest::Approx(fixtures::island().x0).epsilon(1e-14));
  }

  TEST_CASE("heff_map is linear in P0") {
    HeffSweep sw;
    sw.base = set2();
    sw.base.PA = 0.0;
    sw.axis1 = {SweepParameter::P0, 1e-4, 2e-4, 2, false};
    sw.axis2 = {SweepParameter::m, 1e-15, 1e-15, 1, false};
    const auto map = heff_map(sw);
    CHECK(map.at(1, 0) == doctest::Approx(2.0 * map.at(0, 0)).epsilon(1e-14));
  }

  TEST_CASE("single-point map at the 1 pg device") {
    HeffSweep sw;
    sw.base = set2();
    sw.axis1 = {SweepParameter::P0, 0.5e-3, 0.5e-3, 1, false};
    sw.axis2 = {SweepParameter::omega_m, kTwoPiD * 10e3, kTwoPiD * 10e3, 1, false};
    sw.constraints.gamma_c_over_omega_m = 10.0;
    sw.constraints.kappa = 1.2;
    const auto map = heff_map(sw);
    CHECK(rel(map.at(0, 0), 0.042) < 0.03);
  }

  TEST_CASE("power slice at 10 kHz spans 0.001 to 0.1") {
    HeffSweep sw;
    sw.base = set2();
    sw.base.PA = 0.0;
    sw.axis1 = {SweepParameter::P0, 12e-6, 1.2e-3, 21, true};
    sw.axis2 = {SweepParameter::omega_m, kTwoPiD * 10e3, kTwoPiD * 10e3, 1, false};
    sw.constraints.gamma_c_over_omega_m = 10.0;
    sw.constraints.kappa = 1.2;
    const auto map = heff_map(sw);
    CHECK(rel(map.at(0, 0), 0.001) < 0.05);
    CHECK(rel(map.at(20, 0), 0.1) < 0.05);
  }

  TEST_CASE("a parameter fixed twice is rejected") {
    HeffSweep sw;
    sw.base = set2();
    sw.axis1 = {SweepParameter::P0, 1e-4, 1e-3, 3, false};
    sw.axis2 = {SweepParameter::gamma_c, 1e5, 1e6, 3, false};
    sw.constraints.gamma_c_over_omega_m = 10.0;
    try {
      heff_map(sw);
      FAIL("expected an error");
    } catch (const dyntun::Error& e) {
      CHECK(std::string(e.what()).find("parameter doubly determined") != std::string::npos);
    }
    sw.axis2 = {SweepParameter::P0, 1e-4, 1e-3, 3, false};
    sw.constraints = {};
    CHECK_THROWS_WITH_AS(heff_map(sw), doctest::Contains("parameter doubly determined"),
                         dyntun::Error);
  }

  TEST_CASE("constrained map equals scale() on the substituted parameters") {
    HeffSweep sw;
    sw.base = set2();
    sw.base.PA = 0.0;
    sw.axis1 = {SweepParameter::P0, 1e-6, 1e-2, 9, true};
    sw.axis2 = {SweepParameter::omega_m, 1e3, 1e6, 7, true};
    sw.constraints.gamma_c_over_omega_m = 10.0;
    sw.constraints.kappa = 1.2;
    const auto map = heff_map(sw, 3);
    for (std::size_t i = 0; i < map.axis1_values.size(); ++i) {
      for (std::size_t j = 0; j < map.axis2_values.size(); ++j) {
        PhysicalParams p = sw.base;
        p.P0 = map.axis1_values[i];
        p.omega_m = map.axis2_values[j];
        p.gamma_c = 10.0 * p.omega_m;
        p.Omega = p.omega_m / std::sqrt(1.2);
        CHECK(rel(map.at(i, j), scale(p).hbar_eff) < 1e-12);
      }
    }
  }

  TEST_CASE("map output does not depend on the thread count") {
    HeffSweep sw;
    sw.base = set2();
    sw.base.PA = 0.0;
    sw.axis1 = {SweepParameter::P0, 1e-6, 1e-2, 33, true};
    sw.axis2 = {SweepParameter::m, 1e-16, 1e-13, 17, true};
    const auto a = heff_map(sw, 1);
    const auto b = heff_map(sw, 4);
    CHECK(a.hbar_eff == b.hbar_eff);
  }

  TEST_CASE("sweep parameter names round trip") {
    for (auto p : {SweepParameter::P0, SweepParameter::omega_m, SweepParameter::Omega,
                   SweepParameter::gamma_c, SweepParameter::m}) {
      CHECK(parse_sweep_parameter(to_string(p)) == p);
    }
    CHECK_FALSE(parse_sweep_parameter("lambda").has_value());
  }
}
