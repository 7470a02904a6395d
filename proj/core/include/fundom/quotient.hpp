#ifndef FUNDOM_QUOTIENT_HPP
#define FUNDOM_QUOTIENT_HPP

#include <optional>

#include "fundom/action.hpp"

namespace fundom {

// Minimal displacement of a point under non-identity elements,
// rho(x) = inf { d(gx, x) : g != 1 }.
struct MarginValue {
  double value{0};
  std::optional<GroupElement> attaining;
  bool complete{true};  // false when the enumeration was heuristic
};

class margin_inconclusive : public std::runtime_error {
 public:
  margin_inconclusive() : std::runtime_error("no non-identity element enumerated; margin inconclusive") {}
};

MarginValue rho(const ActionSystem& action, const Point& x);

// Quotient pseudo-metric d_G([x],[y]) = min_g d(x, g y). The enumeration
// window d(x, y) suffices: any better candidate g y lies in B(x, d(x, y)).
double quotient_distance(const ActionSystem& action, const Point& x, const Point& y);

struct LocalIsometryReport {
  int trials{0};
  double radius{0};
  double max_deviation{0};
  bool pass{false};
  bool complete{true};
};

// Checks that the quotient map restricted to B(x, rho(x)/8) preserves
// distances: random pairs y, z in the ball must satisfy d_G = d.
LocalIsometryReport verify_local_isometry(const ActionSystem& action, const Point& x, int trials,
                                          std::uint64_t seed);

}  // namespace fundom

#endif  // FUNDOM_QUOTIENT_HPP
