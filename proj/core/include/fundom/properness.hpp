#ifndef FUNDOM_PROPERNESS_HPP
#define FUNDOM_PROPERNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "fundom/action.hpp"

namespace fundom {

// One level of a dynamical-relation witness: a point x_n near x and an
// element g_n with g_n x_n near y, at the dyadic scale of its level.
struct WitnessLevel {
  int level{0};
  double epsilon{0};
  GroupElement element;
  Point x_n;
  Point image;      // g_n x_n
  double dist_x{0};  // d(x_n, x)
  double dist_y{0};  // d(g_n x_n, y)
};

struct DynamicalWitness {
  Point x, y;
  std::vector<WitnessLevel> levels;
  double residual{0};  // max(dist_x, dist_y) of the last level
};

struct TransporterGrowth {
  struct Row {
    double radius{0};
    std::size_t cardinality{0};
  };
  std::vector<Row> rows;
  enum class Verdict { BoundedObserved, GrowthObserved } verdict{Verdict::BoundedObserved};
  bool complete{true};
  // The verdict reads counts of (K|K)_G along the window schedule; it is
  // meaningful when the radii converge (a growing count against a converging
  // compact certifies non-properness; against diverging windows it does not).
  std::string caveat;
};

class not_wandering : public std::runtime_error {
 public:
  explicit not_wandering(const std::string& what) : std::runtime_error(what) {}
};

TransporterGrowth check_transporter_finiteness(const ActionSystem& action,
                                               const std::vector<Window>& windows);

// Searches for a dynamical relation between x and y: shrinking dyadic source
// balls around x, one fresh element per level mapping the ball next to y. A
// witness is declared after 5 consecutive successful levels; absence of a
// witness is NOT a properness certificate.
std::optional<DynamicalWitness> find_dynamical_relation(const ActionSystem& action,
                                                        const Point& x, const Point& y,
                                                        int depth);

// Metric slice radius at a wandering point: half the minimal displacement of
// elements moving x. Verified through a transporter call before returning.
double wandering_radius(const ActionSystem& action, const Point& x);

}  // namespace fundom

#endif  // FUNDOM_PROPERNESS_HPP
