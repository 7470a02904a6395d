#include "fundom/quotient.hpp"

#include <algorithm>
#include <cmath>

#include "fundom/rng.hpp"

namespace fundom {

MarginValue rho(const ActionSystem& action, const Point& x) {
  const SpaceModel& space = action.space();
  space.require(x);
  if (action.generator_count() == 0) throw margin_inconclusive();
  // Start from the smallest generator displacement: the minimizer, if it
  // beats every generator, lies inside that ball and Exact enumeration
  // covers it. Double only if (unexpectedly) nothing non-trivial shows up.
  double radius = std::numeric_limits<double>::infinity();
  for (const auto& g : action.generators())
    radius = std::min(radius, space.distance(g.apply(space, x), x));
  radius += kPointTol;
  const double cap = 1e6;
  while (true) {
    MarginValue best;
    best.complete = action.complete_enumeration();
    bool found = false;
    for (auto& g : action.mapping_near(x, x, radius)) {
      if (g.is_identity_word()) continue;
      double d = space.distance(g.map.apply(space, x), x);
      if (!found || d < best.value) {
        best.value = d;
        best.attaining = g;
        found = true;
      }
    }
    if (found) return best;
    if (radius > cap) throw margin_inconclusive();
    radius = radius * 2 + 1;
  }
}

double quotient_distance(const ActionSystem& action, const Point& x, const Point& y) {
  const SpaceModel& space = action.space();
  double best = space.distance(x, y);  // identity candidate
  for (const auto& g : action.mapping_near(y, x, best))
    best = std::min(best, space.distance(x, g.map.apply(space, y)));
  return best;
}

LocalIsometryReport verify_local_isometry(const ActionSystem& action, const Point& x, int trials,
                                          std::uint64_t seed) {
  const SpaceModel& space = action.space();
  auto stab = action.stabilizer(x, action.max_generator_displacement() + 1.0);
  for (const auto& g : stab)
    if (!g.is_identity_word())
      throw std::invalid_argument("verify_local_isometry requires a free action at x");
  MarginValue margin = rho(action, x);
  if (!(margin.value > 1e-6))
    throw std::invalid_argument("verify_local_isometry requires rho(x) > 0");

  LocalIsometryReport report;
  report.trials = trials;
  report.radius = margin.value / 8.0;
  report.complete = action.complete_enumeration() && margin.complete;
  if (trials > 0) {
    SampleSet samples = space.sample_ball(x, report.radius, 2 * trials, seed);
    for (int i = 0; i < trials; ++i) {
      const Point& y = samples.points[2 * i];
      const Point& z = samples.points[2 * i + 1];
      double dev = std::abs(quotient_distance(action, y, z) - space.distance(y, z));
      report.max_deviation = std::max(report.max_deviation, dev);
    }
  }
  report.pass = report.max_deviation <= kPointTol;
  return report;
}

}  // namespace fundom
