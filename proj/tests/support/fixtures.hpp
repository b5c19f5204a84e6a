#pragma once

// Expensive objects shared by several test cases, built once per process.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "dyntun/analysis.hpp"
#include "dyntun/classical.hpp"
#include "dyntun/floquet.hpp"
#include "dyntun/quantum.hpp"

namespace fixtures {

inline constexpr double kKappa = 1.2;
inline constexpr double kEpsilon = 0.9;

// Reference island centre for kappa = 1.2, epsilon = 0.9 (scan + Newton,
// cross-checked against the RK4 oracle in the classical tests).
inline constexpr double kIslandX0 = 1.7765730079;

// Steps per period of the library's default time step.
inline const long kDefaultSteps =
    std::lround(dyntun::quantum::kDrivePeriod / dyntun::quantum::Model{}.dt);

inline dyntun::quantum::Model model(int n, double hbar, double epsilon = kEpsilon,
                                    long steps_per_period = kDefaultSteps, double x_max = 8.0) {
  dyntun::quantum::Model m;
  m.potential = dyntun::quantum::Potential::driven(kKappa, epsilon);
  m.hbar_eff = hbar;
  m.grid = {n, x_max};
  m.dt = dyntun::quantum::kDrivePeriod / static_cast<double>(steps_per_period);
  return m;
}

struct Driven {
  dyntun::quantum::Model model;
  dyntun::quantum::PropagatorBlocks blocks;
  dyntun::quantum::FloquetSpectrum spectrum;
};

inline const Driven& driven(int n, double hbar, double epsilon = kEpsilon,
                            long steps_per_period = kDefaultSteps) {
  using Key = std::tuple<int, double, double, long>;
  static std::map<Key, std::unique_ptr<Driven>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto& slot = cache[Key{n, hbar, epsilon, steps_per_period}];
  if (!slot) {
    slot = std::make_unique<Driven>();
    slot->model = model(n, hbar, epsilon, steps_per_period);
    slot->blocks = dyntun::quantum::build_propagator(slot->model);
    slot->spectrum = dyntun::quantum::floquet_decompose(slot->blocks);
  }
  return *slot;
}

inline const dyntun::classical::FixedPoint& island() {
  static const dyntun::classical::FixedPoint fp = [] {
    const dyntun::classical::Drive d{kKappa, kEpsilon};
    const auto guess = dyntun::classical::scan_for_period_one({0.2, 2.5, -1.0, 1.0, 24, 21}, d);
    return dyntun::classical::find_period_one_island(guess, d);
  }();
  return fp;
}

inline dyntun::analysis::TunnellingPair pair(const dyntun::quantum::FloquetSpectrum& spec) {
  dyntun::analysis::PairSearch ps;
  ps.island_x = island().x0;
  ps.island_p = island().p0;
  return dyntun::analysis::find_tunnelling_pair(spec, ps);
}

}  // namespace fixtures
