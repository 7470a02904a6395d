#ifndef FUNDOM_NETTING_HPP
#define FUNDOM_NETTING_HPP

#include <functional>

#include "fundom/voronoi.hpp"

namespace fundom {

class stream_too_small : public std::runtime_error {
 public:
  stream_too_small(const std::string& what, Point witness)
      : std::runtime_error(what), witness(witness) {}
  Point witness;
};

class thin_boundary_unachieved : public std::runtime_error {
 public:
  explicit thin_boundary_unachieved(const std::string& what) : std::runtime_error(what) {}
};

class non_free_action : public std::runtime_error {
 public:
  non_free_action(const std::string& what, Point witness)
      : std::runtime_error(what), witness(witness) {}
  Point witness;
};

struct NettingOptions {
  // Stream sizes scale with window measure; <= 0 means this default.
  int stream_per_unit{10000};
  int min_stream{2000};
  double covering_slack{0.05};  // accepted overshoot of the covering radius
  int perturb_retries{5};
  double audit_band{1e-4};
  double audit_fraction{0.01};
  int audit_samples{20000};
};

// Greedy maximal net against phi over a seeded sample stream: a point enters
// iff d(x, y) >= min(phi(x), phi(y)) / 2 against everything admitted before
// it. Coverage is then validated on a fresh stream.
Net maximal_net(const SpaceModel& space, const Window& window,
                const std::function<double(const Point&)>& phi, int stream_size,
                std::uint64_t seed, const NettingOptions& opts = {});

// Seeded perturbation within per-point radii eps_x (shrinking with admission
// rank, disjoint balls, below local phi), followed by a boundary-thinness
// audit of the perturbed tessellation. Graph backends may keep fat bisectors;
// the audit failure is recorded on the net instead of thrown.
Net perturb_net(const SpaceModel& space, const Net& net, std::uint64_t seed,
                const NettingOptions& opts = {});

// G-invariant net for a free action: maximal net + perturbation of orbit
// representatives against phi = rho/16, closed under the enumerated action
// within a padded window.
Net invariant_net(const ActionSystem& action, const Window& window, std::uint64_t seed,
                  const NettingOptions& opts = {});

// Audit fraction of window samples falling in some BoundaryBand at the given
// band width (shared by perturb_net and tests).
double boundary_band_fraction(const SpaceModel& space, const Net& net, const Window& window,
                              double band, int samples, std::uint64_t seed);

}  // namespace fundom

#endif  // FUNDOM_NETTING_HPP
