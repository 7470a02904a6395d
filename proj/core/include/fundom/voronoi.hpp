#ifndef FUNDOM_VORONOI_HPP
#define FUNDOM_VORONOI_HPP

#include <functional>
#include <memory>

#include "fundom/action.hpp"

namespace fundom {

// A metrically proper discrete point set within a working window, with the
// certificates the construction produced. Invariant nets additionally carry
// an orbit id and the element mapping the orbit representative to each point.
struct Net {
  std::vector<Point> points;
  double gap{0};  // observed minimum pairwise distance
  bool proper{true};
  bool complete{true};  // enumeration completeness of the construction
  Window window;        // working window the net was built for
  bool boundary_audit_pass{true};
  std::vector<double> phi;          // phi at points (netting output)
  std::vector<int> orbit;           // orbit ids, empty unless invariant
  std::vector<GroupElement> from_rep;  // rep -> point maps, parallel to orbit
  std::vector<int> rep_index;       // orbit id -> index of its representative
};

enum class TileVerdict { Interior, BoundaryBand, Outside };

const char* verdict_name(TileVerdict v);

struct TileMembership {
  TileVerdict verdict{TileVerdict::Outside};
  double margin{0};  // min_{x' != x} d(y, x') - d(y, x)
  int nearest{-1};   // index of the closest net point
};

// Net + spatial index + membership oracles for the Voronoi tiles V_x / V^_x.
class Tessellation {
 public:
  Tessellation(SpaceModel space, Net net, double band = kPointTol);

  const SpaceModel& space() const { return space_; }
  const Net& net() const { return net_; }
  double band() const { return band_; }
  int size() const { return static_cast<int>(net_.points.size()); }

  struct Hit {
    int index;
    double dist;
  };
  // k closest net points to y (all of them if fewer).
  std::vector<Hit> nearest(const Point& y, int k) const;
  // All net points within distance r of y.
  std::vector<Hit> within(const Point& y, double r) const;
  // Centers whose closed tile contains y up to `slack`:
  // d(y, c) <= min distance + slack.
  std::vector<Hit> covering_centers(const Point& y, double slack) const;

  TileMembership membership(int center, const Point& y) const;
  TileMembership membership(int center, const Point& y, double band) const;
  // Membership against the nearest center.
  TileMembership classify(const Point& y) const;

 private:
  SpaceModel space_;
  Net net_;
  double band_;
  // Uniform grid over plane/disk coordinates; graphs fall back to scans.
  struct Grid;
  std::shared_ptr<const Grid> grid_;
};

TileMembership tile_membership(const Tessellation& tess, int center, const Point& y);

struct StarlikeReport {
  int rays{0};
  int probes_per_ray{0};
  int violations{0};
  double worst_margin{0};  // most negative margin observed along rays
  bool pass{true};
};

// Walks geodesics from the tile center to sampled closed-tile points; every
// intermediate point must stay non-Outside.
StarlikeReport verify_starlike(const Tessellation& tess, int center, int rays, int probes_per_ray,
                               double sample_radius, std::uint64_t seed);

struct CoveringReport {
  int samples{0};
  bool precondition_ok{true};
  std::optional<Point> precondition_witness;  // z with B(z, phi(z)) missing E
  int violations{0};
  double worst_excess{0};  // max d(x, y) - 2 phi(x) over closed-tile samples
  bool pass{false};
};

// Checks the covering-radius bound: when every B(z, phi(z)) meets the net,
// each closed tile sits inside B(x, 2 phi(x)).
CoveringReport verify_covering_radius(const Tessellation& tess, const Window& window,
                                      const std::function<double(const Point&)>& phi, int samples,
                                      std::uint64_t seed);

// A sampled subset of the space together with a distance oracle used to
// refine sample proximity into distance-to-set (tiles, bisectors).
struct QuasiSet {
  std::vector<Point> pool;
  std::function<double(const Point&)> distance_to_set;
};

// Bisector Bis(x, y) sampled within the window; distance refinement walks
// the sign change of d(., x) - d(., y).
QuasiSet make_bisector_set(const SpaceModel& space, const Point& x, const Point& y,
                           const Window& window, int pool_size, std::uint64_t seed);
// A closed Voronoi tile as a quasiconvexity target.
QuasiSet make_tile_set(const Tessellation& tess, int center, const Window& window, int pool_size,
                       std::uint64_t seed);

struct QuasiconvexReport {
  int pairs{0};
  double lambda{0};
  double max_excess{0};
  int violations{0};
  bool pass{false};
  bool inconclusive{false};  // under-sampled set
};

// For sampled pairs p, q in the set, probes along the geodesic pq must stay
// within lambda (+1e-6) of the set.
QuasiconvexReport verify_quasiconvexity(const SpaceModel& space, const QuasiSet& set, double lambda,
                                        int trials, std::uint64_t seed);

}  // namespace fundom

#endif  // FUNDOM_VORONOI_HPP
