#include "fundom/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fundom/rng.hpp"

namespace fundom {

const char* verdict_name(TileVerdict v) {
  switch (v) {
    case TileVerdict::Interior: return "interior";
    case TileVerdict::BoundaryBand: return "boundary";
    case TileVerdict::Outside: return "outside";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Spatial index
// ---------------------------------------------------------------------------

// Uniform bucket grid over the plane/disk coordinates. For the disk the
// hyperbolic metric dominates twice the Euclidean one (ds_h >= 2 ds_e), so a
// Euclidean search radius of d/2 is safe for any hyperbolic target d.
struct Tessellation::Grid {
  bool active{false};
  double x0{0}, y0{0}, cell{1};
  int nx{0}, ny{0};
  std::vector<std::vector<int>> buckets;

  void build(const std::vector<Point>& pts) {
    if (pts.empty()) return;
    double x1 = -1e300, y1 = -1e300;
    x0 = 1e300;
    y0 = 1e300;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    double w = std::max({x1 - x0, y1 - y0, 1e-6});
    cell = std::max(w / std::max(1.0, std::sqrt(static_cast<double>(pts.size()))), 1e-6);
    nx = static_cast<int>((x1 - x0) / cell) + 1;
    ny = static_cast<int>((y1 - y0) / cell) + 1;
    buckets.assign(static_cast<std::size_t>(nx) * ny, {});
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      buckets[slot(pts[i].x, pts[i].y)].push_back(i);
    active = true;
  }

  std::size_t slot(double x, double y) const {
    int ix = std::clamp(static_cast<int>((x - x0) / cell), 0, nx - 1);
    int iy = std::clamp(static_cast<int>((y - y0) / cell), 0, ny - 1);
    return static_cast<std::size_t>(iy) * nx + ix;
  }
};

Tessellation::Tessellation(SpaceModel space, Net net, double band)
    : space_(std::move(space)), net_(std::move(net)), band_(band) {
  if (net_.points.empty()) throw std::invalid_argument("empty net");
  for (const auto& p : net_.points) space_.require(p);
  auto grid = std::make_shared<Grid>();
  if (space_.model() != Model::Graph && net_.points.size() > 32) grid->build(net_.points);
  grid_ = std::move(grid);
}

std::vector<Tessellation::Hit> Tessellation::nearest(const Point& y, int k) const {
  std::vector<Hit> best;
  auto consider = [&](int i) {
    double d = space_.distance(net_.points[i], y);
    if (static_cast<int>(best.size()) < k) {
      best.push_back({i, d});
      std::sort(best.begin(), best.end(), [](const Hit& a, const Hit& b) { return a.dist < b.dist; });
    } else if (d < best.back().dist) {
      best.back() = {i, d};
      std::sort(best.begin(), best.end(), [](const Hit& a, const Hit& b) { return a.dist < b.dist; });
    }
  };
  if (!grid_->active) {
    for (int i = 0; i < size(); ++i) consider(i);
    return best;
  }
  const Grid& g = *grid_;
  int cx = std::clamp(static_cast<int>((y.x - g.x0) / g.cell), 0, g.nx - 1);
  int cy = std::clamp(static_cast<int>((y.y - g.y0) / g.cell), 0, g.ny - 1);
  int max_ring = std::max(g.nx, g.ny);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Termination: once k hits are held and the nearest possible point in
    // the next ring is farther (metric-converted), stop.
    if (static_cast<int>(best.size()) == k) {
      double ring_edge = (ring - 1) * g.cell;  // min Euclidean dist to unvisited cells
      if (ring_edge > 0) {
        double bound = space_.model() == Model::Disk ? 2 * ring_edge : ring_edge;
        if (bound > best.back().dist) break;
      }
    }
    bool any = false;
    for (int iy = cy - ring; iy <= cy + ring; ++iy) {
      if (iy < 0 || iy >= g.ny) continue;
      for (int ix = cx - ring; ix <= cx + ring; ++ix) {
        if (ix < 0 || ix >= g.nx) continue;
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        any = true;
        for (int i : g.buckets[static_cast<std::size_t>(iy) * g.nx + ix]) consider(i);
      }
    }
    if (!any && ring > std::max(g.nx, g.ny)) break;
  }
  return best;
}

std::vector<Tessellation::Hit> Tessellation::within(const Point& y, double r) const {
  std::vector<Hit> out;
  auto consider = [&](int i) {
    double d = space_.distance(net_.points[i], y);
    if (d <= r) out.push_back({i, d});
  };
  if (!grid_->active) {
    for (int i = 0; i < size(); ++i) consider(i);
  } else {
    const Grid& g = *grid_;
    double er = space_.model() == Model::Disk ? r / 2 : r;  // safe Euclidean radius
    int ix0 = std::clamp(static_cast<int>((y.x - er - g.x0) / g.cell), 0, g.nx - 1);
    int ix1 = std::clamp(static_cast<int>((y.x + er - g.x0) / g.cell), 0, g.nx - 1);
    int iy0 = std::clamp(static_cast<int>((y.y - er - g.y0) / g.cell), 0, g.ny - 1);
    int iy1 = std::clamp(static_cast<int>((y.y + er - g.y0) / g.cell), 0, g.ny - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        for (int i : g.buckets[static_cast<std::size_t>(iy) * g.nx + ix]) consider(i);
  }
  std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  });
  return out;
}

std::vector<Tessellation::Hit> Tessellation::covering_centers(const Point& y, double slack) const {
  auto top = nearest(y, 1);
  if (top.empty()) return {};
  return within(y, top[0].dist + slack);
}

TileMembership Tessellation::membership(int center, const Point& y) const {
  return membership(center, y, band_);
}

TileMembership Tessellation::membership(int center, const Point& y, double band) const {
  if (center < 0 || center >= size()) throw std::out_of_range("net index");
  TileMembership m;
  double dc = space_.distance(net_.points[center], y);
  auto top = nearest(y, 2);
  m.nearest = top.empty() ? center : top[0].index;
  double other = std::numeric_limits<double>::infinity();
  for (const auto& h : top) {
    if (h.index != center) {
      other = h.dist;
      break;
    }
  }
  m.margin = other - dc;
  if (m.margin > band)
    m.verdict = TileVerdict::Interior;
  else if (m.margin < -band)
    m.verdict = TileVerdict::Outside;
  else
    m.verdict = TileVerdict::BoundaryBand;
  return m;
}

TileMembership Tessellation::classify(const Point& y) const {
  auto top = nearest(y, 1);
  return membership(top[0].index, y);
}

TileMembership tile_membership(const Tessellation& tess, int center, const Point& y) {
  return tess.membership(center, y);
}

// ---------------------------------------------------------------------------
// Verifiers
// ---------------------------------------------------------------------------

StarlikeReport verify_starlike(const Tessellation& tess, int center, int rays, int probes_per_ray,
                               double sample_radius, std::uint64_t seed) {
  const SpaceModel& space = tess.space();
  const Point& x = tess.net().points[center];
  StarlikeReport report;
  report.probes_per_ray = probes_per_ray;
  Rng rng(seed);
  int attempts = 0, max_attempts = 40 * rays + 100;
  while (report.rays < rays && attempts < max_attempts) {
    ++attempts;
    SampleSet s = space.sample_ball(x, sample_radius, 1, rng.next());
    const Point& z = s.points[0];
    if (space.points_equal(x, z)) continue;
    if (tess.membership(center, z).verdict == TileVerdict::Outside) continue;
    ++report.rays;
    Geodesic geo = space.geodesic(x, z);
    for (int j = 1; j <= probes_per_ray; ++j) {
      double t = geo.length() * j / (probes_per_ray + 1);
      TileMembership m = tess.membership(center, geo.eval(t));
      report.worst_margin = std::min(report.worst_margin, m.margin);
      if (m.verdict == TileVerdict::Outside) ++report.violations;
    }
  }
  report.pass = report.violations == 0;
  return report;
}

CoveringReport verify_covering_radius(const Tessellation& tess, const Window& window,
                                      const std::function<double(const Point&)>& phi, int samples,
                                      std::uint64_t seed) {
  const SpaceModel& space = tess.space();
  CoveringReport report;
  report.samples = samples;
  SampleSet s = space.sample_ball(window.center, window.radius, samples, seed);
  // Precondition: every sampled z sees a net point within phi(z).
  for (const auto& z : s.points) {
    auto top = tess.nearest(z, 1);
    if (top.empty() || top[0].dist >= phi(z)) {
      report.precondition_ok = false;
      report.precondition_witness = z;
      return report;
    }
  }
  for (const auto& y : s.points) {
    auto top = tess.nearest(y, 1);
    int x = top[0].index;  // y lies in the closed tile of its nearest center
    double excess = top[0].dist - 2 * phi(tess.net().points[x]);
    report.worst_excess = std::max(report.worst_excess, excess);
    if (excess > kPointTol) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

namespace {

// Find a point of {m = 0} on the geodesic from a to b given margins of
// opposite sign; returns distance from a to the located point.
double bisect_zero(const SpaceModel& space, const std::function<double(const Point&)>& m,
                   const Point& a, const Point& b) {
  Geodesic geo = space.geodesic(a, b);
  double lo = 0, hi = geo.length();
  double mlo = m(a);
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    double v = m(geo.eval(mid));
    if ((v < 0) == (mlo < 0))
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

QuasiSet make_bisector_set(const SpaceModel& space, const Point& x, const Point& y,
                           const Window& window, int pool_size, std::uint64_t seed) {
  auto margin = [space, x, y](const Point& z) {
    return space.distance(z, x) - space.distance(z, y);
  };
  QuasiSet set;
  // Draw window samples and slide each one onto the bisector along the
  // geodesic towards the farther of x / y (the margin changes sign there).
  SampleSet s = space.sample_ball(window.center, window.radius, pool_size, seed);
  for (const auto& z : s.points) {
    double m = margin(z);
    if (std::abs(m) <= kPointTol) {
      set.pool.push_back(z);
      continue;
    }
    const Point& target = m < 0 ? y : x;  // walk towards the farther center
    if (space.points_equal(z, target)) continue;
    Geodesic geo = space.geodesic(z, target);
    double t = bisect_zero(space, margin, z, target);
    if (t <= geo.length()) set.pool.push_back(geo.eval(t));
  }
  set.distance_to_set = [space, x, y, margin](const Point& z) {
    double m = margin(z);
    if (std::abs(m) <= kPointTol) return 0.0;
    const Point& target = m < 0 ? y : x;
    if (space.points_equal(z, target)) return space.distance(z, target);
    return bisect_zero(space, margin, z, target);
  };
  return set;
}

QuasiSet make_tile_set(const Tessellation& tess, int center, const Window& window, int pool_size,
                       std::uint64_t seed) {
  const SpaceModel space = tess.space();
  const Point x = tess.net().points[center];
  QuasiSet set;
  SampleSet s = space.sample_ball(window.center, window.radius, pool_size, seed);
  for (const auto& z : s.points)
    if (tess.membership(center, z).verdict != TileVerdict::Outside) set.pool.push_back(z);
  Tessellation t2 = tess;
  set.distance_to_set = [space, t2, center, x](const Point& z) {
    if (t2.membership(center, z).verdict != TileVerdict::Outside) return 0.0;
    if (space.points_equal(z, x)) return 0.0;
    // Walk towards the center; tiles are starlike, so the membership margin
    // changes sign exactly once.
    auto margin = [&](const Point& p) { return -t2.membership(center, p).margin; };
    return bisect_zero(space, margin, z, x);
  };
  return set;
}

QuasiconvexReport verify_quasiconvexity(const SpaceModel& space, const QuasiSet& set, double lambda,
                                        int trials, std::uint64_t seed) {
  QuasiconvexReport report;
  report.lambda = lambda;
  if (set.pool.size() < 2) {
    report.inconclusive = true;
    return report;
  }
  Rng rng(seed);
  const int kProbes = 20;
  for (int i = 0; i < trials; ++i) {
    const Point& p = set.pool[rng.below(set.pool.size())];
    const Point& q = set.pool[rng.below(set.pool.size())];
    if (space.points_equal(p, q)) continue;
    ++report.pairs;
    Geodesic geo = space.geodesic(p, q);
    for (int j = 1; j <= kProbes; ++j) {
      Point z = geo.eval(geo.length() * j / (kProbes + 1));
      double excess = set.distance_to_set(z) - lambda;
      report.max_excess = std::max(report.max_excess, excess);
      if (excess > 1e-6) ++report.violations;
    }
  }
  report.pass = report.violations == 0;
  return report;
}

}  // namespace fundom
