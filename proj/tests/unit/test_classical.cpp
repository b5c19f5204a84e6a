#include <doctest.h>

#include <cmath>
#include <random>

#include "dyntun/classical.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dyntun::classical;

namespace {

constexpr double kPi = std::numbers::pi;
const Drive kMixed{fixtures::kKappa, fixtures::kEpsilon};
const Drive kStatic{fixtures::kKappa, 0.0};

double max_relative_energy_drift(const ClassicalState& s0, int periods, const IntegratorConfig& cfg) {
  const double e0 = energy(s0, kStatic);
  double worst = 0.0;
  ClassicalState s = s0;
  for (int k = 1; k <= periods; ++k) {
    s = integrate(s, k * kDrivePeriod, kStatic, cfg);
    worst = std::max(worst, std::abs(energy(s, kStatic) - e0) / std::abs(e0));
  }
  return worst;
}

}  // namespace

TEST_SUITE("classical") {
  TEST_CASE("force at reference points") {
    CHECK(force(1.0, 0.0, {1.2, 0.0}) == doctest::Approx(-2.4));
    CHECK(force(1.0, 0.0, {1.2, 0.9}) == doctest::Approx(-3.48));
    CHECK(force(1.0, kPi, {1.2, 0.9}) == doctest::Approx(-1.32));
    CHECK(force(0.0, 0.3, kMixed) == 0.0);
    CHECK(force(-2.0, 1.1, kMixed) == -force(2.0, 1.1, kMixed));
  }

  TEST_CASE("force gradient matches a central difference") {
    for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9}) {
      for (double t : {0.0, 1.0, 4.0}) {
        const double h = 1e-6;
        const double fd = (force(x + h, t, kMixed) - force(x - h, t, kMixed)) / (2 * h);
        CHECK(force_gradient(x, t, kMixed) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("origin is a fixed point") {
    const auto s = integrate({0.0, 0.0, 0.0}, 10 * kDrivePeriod, kMixed);
    CHECK(s.x == 0.0);
    CHECK(s.p == 0.0);
  }

  TEST_CASE("integrate lands exactly on t_end and records every step") {
    std::vector<ClassicalState> traj;
    IntegratorConfig cfg;
    cfg.dt = kDrivePeriod / 64;
    const auto s = integrate({0.5, 0.0, 0.0}, kDrivePeriod, kMixed, cfg, &traj);
    CHECK(s.t == doctest::Approx(kDrivePeriod).epsilon(1e-15));
    CHECK(traj.size() == 65);
    CHECK(traj.front().x == 0.5);
    CHECK(traj.back().x == s.x);
  }

  TEST_CASE("epsilon = 0 conserves energy over 100 periods") {
    for (const ClassicalState s0 : {ClassicalState{1.0, 0.0, 0.0}, ClassicalState{0.2, 1.5, 0.0},
                                    ClassicalState{2.5, -0.4, 0.0}}) {
      CHECK(max_relative_energy_drift(s0, 100, {}) < 1e-8);
    }
  }

  TEST_CASE("halving dt reduces energy drift at least four-fold") {
    for (auto scheme : {dyntun::SplittingScheme::strang, dyntun::SplittingScheme::blanes_moan4}) {
      IntegratorConfig coarse;
      coarse.scheme = scheme;
      coarse.dt = kDrivePeriod / 256;
      IntegratorConfig fine = coarse;
      fine.dt = coarse.dt / 2;
      const ClassicalState s0{2.0, 0.5, 0.0};
      const double a = max_relative_energy_drift(s0, 20, coarse);
      const double b = max_relative_energy_drift(s0, 20, fine);
      CAPTURE(dyntun::to_string(scheme));
      CHECK(a / b >= 4.0);
    }
  }

  TEST_CASE("island orbit stays bounded for 500 periods at both dt") {
    // The linearised island is an ellipse roughly 17 times taller in p than
    // in x, so the bound is set per coordinate.
    double extent[2][2] = {};
    int row = 0;
    for (double div : {4096.0, 8192.0}) {
      IntegratorConfig cfg;
      cfg.dt = kDrivePeriod / div;
      PhasePoint z{fixtures::kIslandX0 + 0.05, 0.0};
      for (int s = 0; s < 500; ++s) {
        z = one_period_map(z, kMixed, cfg);
        extent[row][0] = std::max(extent[row][0], std::abs(z.x - fixtures::kIslandX0));
        extent[row][1] = std::max(extent[row][1], std::abs(z.p));
      }
      CHECK(extent[row][0] < 0.06);
      CHECK(extent[row][1] < 1.0);
      ++row;
    }
    CHECK(extent[0][0] == doctest::Approx(extent[1][0]).epsilon(1e-3));
    CHECK(extent[0][1] == doctest::Approx(extent[1][1]).epsilon(1e-3));
  }

  TEST_CASE("poincare section at epsilon = 0 stays on the energy shell") {
    const auto seeds = seed_lattice({-2.0, 2.0, -2.0, 2.0, 5, 5});
    const auto sec = poincare_section(seeds, 100, kStatic, {}, 2);
    REQUIRE(sec.points.size() == 25);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      CHECK_FALSE(sec.escaped[k]);
      CHECK(sec.points[k].size() == 101);
      const double e0 = energy(seeds[k], kStatic);
      double spread = 0.0;
      for (const auto& z : sec.points[k]) {
        spread = std::max(spread, std::abs(energy({z.x, z.p, 0.0}, kStatic) - e0));
      }
      CHECK(spread < 1e-8 * std::max(1.0, std::abs(e0)));
    }
  }

  TEST_CASE("section does not depend on the thread count") {
    const auto seeds = seed_lattice({-3.0, 3.0, -3.0, 3.0, 6, 6});
    const auto a = poincare_section(seeds, 30, kMixed, {}, 1);
    const auto b = poincare_section(seeds, 30, kMixed, {}, 4);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      REQUIRE(a.points[k].size() == b.points[k].size());
      for (std::size_t s = 0; s < a.points[k].size(); ++s) {
        CHECK(a.points[k][s].x == b.points[k][s].x);
        CHECK(a.points[k][s].p == b.points[k][s].p);
      }
    }
  }

  TEST_CASE("mirrored seeds give mirrored trajectories") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int i = 0; i < 20; ++i) {
      const PhasePoint z{u(rng), u(rng)};
      PhasePoint a = z, b{-z.x, -z.p};
      for (int s = 0; s < 20; ++s) {
        a = one_period_map(a, kMixed);
        b = one_period_map(b, kMixed);
        CHECK(std::abs(a.x + b.x) < 1e-12);
        CHECK(std::abs(a.p + b.p) < 1e-12);
      }
    }
  }

  TEST_CASE("seeds off the stroboscopic times are rejected") {
    CHECK_THROWS_AS(poincare_section({{0.1, 0.0, 1.0}}, 5, kMixed), dyntun::Error);
  }

  TEST_CASE("runaway seed is flagged, the others continue") {
    IntegratorConfig cfg;
    const auto sec = poincare_section({{49.0, 0.0, 0.0}, {0.5, 0.0, 0.0}}, 10, kMixed, cfg);
    CHECK(sec.escaped[0]);
    CHECK(sec.points[0].size() <= 11);
    CHECK_FALSE(sec.escaped[1]);
    CHECK(sec.points[1].size() == 11);
    CHECK_THROWS_AS(integrate({49.0, 0.0, 0.0}, kDrivePeriod, kMixed), TrajectoryEscaped);
  }

  TEST_CASE("island centre at kappa 1.2, epsilon 0.9") {
    const auto& fp = fixtures::island();
    CHECK(fp.x0 == doctest::Approx(fixtures::kIslandX0).epsilon(1e-9));
    CHECK(std::abs(fp.p0) < 1e-9);
    CHECK(fp.residual < 1e-10);
    CHECK(std::abs(fp.monodromy_trace) < 2.0);
    CHECK(fp.monodromy_det == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fp.stability == Stability::elliptic);
  }

  TEST_CASE("island centre agrees with the RK4 finite-difference oracle") {
    const auto z = oracle::rk4_period_one({1.76, 0.02}, fixtures::kKappa, fixtures::kEpsilon);
    CHECK(z.x == doctest::Approx(fixtures::island().x0).epsilon(1e-8));
    CHECK(std::abs(z.p - fixtures::island().p0) < 1e-8);
  }

  TEST_CASE("mirror island is found from the mirrored guess") {
    const auto fp = find_period_one_island({-1.75, 0.0}, kMixed);
    CHECK(fp.x0 == doctest::Approx(-fixtures::island().x0).epsilon(1e-12));
    CHECK(fp.stability == Stability::elliptic);
  }

  TEST_CASE("harmonic monodromy trace at the origin") {
    for (double kappa : {0.5, 1.2, 2.0}) {
      const auto m = monodromy({0.0, 0.0}, {kappa, 0.7});
      CHECK(m.trace() == doctest::Approx(2.0 * std::cos(2.0 * kPi * std::sqrt(kappa))).epsilon(1e-9));
      CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("monodromy is symplectic across drives and seeds") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0), e(0.0, 1.0), k(0.5, 2.0);
    for (int i = 0; i < 25; ++i) {
      const Drive d{k(rng), e(rng)};
      const auto m = monodromy({u(rng), u(rng)}, d);
      CHECK(std::abs(m.determinant() - 1.0) < 1e-8);
    }
  }

  TEST_CASE("tangent map matches finite differences of the flow") {
    const ClassicalState s0{1.3, 0.4, 0.0};
    const auto tf = integrate_with_tangent(s0, kDrivePeriod, kMixed);
    const double h = 1e-6;
    auto at = [&](double dx, double dp) {
      return integrate({s0.x + dx, s0.p + dp, 0.0}, kDrivePeriod, kMixed);
    };
    CHECK(tf.jacobian(0, 0) == doctest::Approx((at(h, 0).x - at(-h, 0).x) / (2 * h)).epsilon(1e-6));
    CHECK(tf.jacobian(1, 1) == doctest::Approx((at(0, h).p - at(0, -h).p) / (2 * h)).epsilon(1e-6));
    CHECK(tf.state.x == at(0, 0).x);
  }

  TEST_CASE("halving dt changes the island trace by less than 1e-6") {
    IntegratorConfig fine;
    fine.dt = kDrivePeriod / 8192;
    const auto a = fixtures::island();
    const auto b = find_period_one_island({a.x0, a.p0}, kMixed, fine);
    CHECK(std::abs(a.monodromy_trace - b.monodromy_trace) < 1e-6);
  }

  TEST_CASE("newton reports failure with its best iterate") {
    NewtonOptions opts;
    opts.max_iterations = 1;
    try {
      find_period_one_island({0.9, 0.8}, kMixed, {}, opts);
      FAIL("expected NewtonFailure");
    } catch (const NewtonFailure& e) {
      CHECK(e.best().residual > 1e-10);
      CHECK(e.kind() == dyntun::ErrorKind::numeric);
    }
  }

  TEST_CASE("seed lattice covers its window") {
    const auto s = seed_lattice({-1.0, 1.0, -2.0, 2.0, 3, 5});
    REQUIRE(s.size() == 15);
    CHECK(s.front().x == -1.0);
    CHECK(s.front().p == -2.0);
    CHECK(s.back().x == 1.0);
    CHECK(s.back().p == 2.0);
    CHECK(s[5].x == 0.0);
  }
}
