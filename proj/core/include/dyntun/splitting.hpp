#pragma once

#include <string>
#include <optional>
#include <vector>

namespace dyntun {

/// Symmetric kick/drift compositions for H = T(p) + V(x, t).
enum class SplittingScheme {
  /// Second-order Strang splitting.
  strang,
  /// Fourth-order six-stage Runge-Kutta-Nystrom splitting of Blanes and
  /// Moan (BAB form). Default for both integrators.
  blanes_moan4,
};

std::string to_string(SplittingScheme scheme);
std::optional<SplittingScheme> parse_splitting_scheme(const std::string& name);

/// One step of length h is
///   kick(w[0]) drift(d[0]) kick(w[1]) ... drift(d[m-1]) kick(w[m])
/// where kick(w) applies exp(-i w h V(x, t0 + c h)) with c = kick_times[k]
/// and drift(d) applies exp(-i d h T(p)). Weights of each kind sum to one.
struct Composition {
  std::vector<double> kick_weights;
  std::vector<double> kick_times;
  std::vector<double> drift_weights;
  int order = 2;
};

/// Kick times equal the accumulated drift fraction (extended phase space),
/// so the force is evaluated at the kick instants.
const Composition& composition(SplittingScheme scheme);

/// Strang with both half kicks sampled at the step midpoint.
const Composition& strang_midpoint();

}  // namespace dyntun
