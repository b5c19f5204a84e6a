#include "dyntun/splitting.hpp"

namespace dyntun {

namespace {

Composition make_bm4() {
  // Blanes & Moan, J. Comput. Appl. Math. 142 (2002), SRKN_6^b.
  const double b1 = 0.0829844064174052;
  const double b2 = 0.396309801498368;
  const double b3 = -0.0390563049223486;
  const double b4 = 1.0 - 2.0 * (b1 + b2 + b3);
  const double a1 = 0.245298957184271;
  const double a2 = 0.604872665711080;
  const double a3 = 0.5 - (a1 + a2);

  Composition c;
  c.kick_weights = {b1, b2, b3, b4, b3, b2, b1};
  c.drift_weights = {a1, a2, a3, a3, a2, a1};
  c.order = 4;
  double t = 0.0;
  c.kick_times.push_back(t);
  for (double a : c.drift_weights) {
    t += a;
    c.kick_times.push_back(t);
  }
  c.kick_times.back() = 1.0;
  return c;
}

}  // namespace

std::string to_string(SplittingScheme scheme) {
  switch (scheme) {
    case SplittingScheme::strang: return "strang";
    case SplittingScheme::blanes_moan4: return "blanes-moan4";
  }
  return "?";
}

std::optional<SplittingScheme> parse_splitting_scheme(const std::string& name) {
  if (name == "strang") return SplittingScheme::strang;
  if (name == "blanes-moan4") return SplittingScheme::blanes_moan4;
  return std::nullopt;
}

const Composition& composition(SplittingScheme scheme) {
  static const Composition strang{{0.5, 0.5}, {0.0, 1.0}, {1.0}, 2};
  static const Composition bm4 = make_bm4();
  return scheme == SplittingScheme::strang ? strang : bm4;
}

const Composition& strang_midpoint() {
  static const Composition c{{0.5, 0.5}, {0.5, 0.5}, {1.0}, 2};
  return c;
}

}  // namespace dyntun
