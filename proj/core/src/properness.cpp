#include "fundom/properness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fundom {

TransporterGrowth check_transporter_finiteness(const ActionSystem& action,
                                               const std::vector<Window>& windows) {
  if (windows.size() < 2) throw std::invalid_argument("need at least two windows");
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (!(windows[i].radius > windows[i - 1].radius))
      throw std::invalid_argument("window radii must increase");
    double shift = action.space().distance(windows[i].center, windows[i - 1].center);
    if (shift + windows[i - 1].radius > windows[i].radius + kPointTol)
      throw std::invalid_argument("windows must be nested");
  }
  TransporterGrowth out;
  out.complete = action.complete_enumeration();
  if (!out.complete) out.caveat = "heuristic enumeration; counts are lower bounds";
  for (const auto& w : windows)
    out.rows.push_back({w.radius, action.transporter(w, w).size()});
  std::size_t n = out.rows.size();
  bool growth = n >= 3 && out.rows[n - 3].cardinality < out.rows[n - 2].cardinality &&
                out.rows[n - 2].cardinality < out.rows[n - 1].cardinality;
  out.verdict = growth ? TransporterGrowth::Verdict::GrowthObserved
                       : TransporterGrowth::Verdict::BoundedObserved;
  return out;
}

namespace {

struct LevelCandidate {
  GroupElement element;
  Point x_n;
  double residual;
};

// Best witness point for one element at one scale. Isometric maps move the
// source along the geodesic towards g^-1 y; affine plane maps solve the
// trust-region problem min |L u + (g x - y)| over |u| <= eps.
std::optional<LevelCandidate> level_candidate(const ActionSystem& action, const GroupElement& g,
                                              const Point& x, const Point& y, double eps) {
  const SpaceModel& space = action.space();
  if (g.map.isometric()) {
    Point target = g.map.inverse().apply(space, y);
    double dist = space.distance(x, target);
    Point x_n = x;
    if (dist > kPointTol) {
      Geodesic geo = space.geodesic(x, target);
      x_n = geo.eval(std::min(eps, dist));
    }
    double res = space.distance(g.map.apply(space, x_n), y);
    if (res > eps + kPointTol) return std::nullopt;
    return LevelCandidate{g, x_n, res};
  }
  if (space.model() != Model::Plane) return std::nullopt;
  Point gx = g.map.apply(space, x);
  TrustRegionResult tr = min_affine_residual(g.map.linear(), {gx.x - y.x, gx.y - y.y}, eps);
  if (tr.residual > eps + kPointTol) return std::nullopt;
  return LevelCandidate{g, Point::plane(x.x + tr.u[0], x.y + tr.u[1]), tr.residual};
}

}  // namespace

std::optional<DynamicalWitness> find_dynamical_relation(const ActionSystem& action,
                                                        const Point& x, const Point& y,
                                                        int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  const SpaceModel& space = action.space();
  space.require(x);
  space.require(y);
  const double scale0 = std::max(1.0, space.distance(x, y));
  const int kStreak = 5;

  std::vector<WitnessLevel> streak;
  auto used = [&](const GroupElement& g) {
    for (const auto& lvl : streak)
      if (lvl.element.word == g.word) return true;
    return false;
  };

  for (int n = 1; n <= depth; ++n) {
    double eps = scale0 * std::ldexp(1.0, -n);
    // Candidate elements that can bring the eps-ball around x next to y.
    std::vector<GroupElement> candidates;
    if (action.isometric()) {
      candidates = action.mapping_near(x, y, 2 * eps);
    } else {
      candidates = action.enumerated_elements();
    }
    std::optional<LevelCandidate> best;
    for (const auto& g : candidates) {
      if (g.is_identity_word() || used(g)) continue;
      auto cand = level_candidate(action, g, x, y, eps);
      if (!cand) continue;
      // Prefer the shortest fresh word, then the smallest residual: keeps the
      // reported sequence's residuals decreasing level over level.
      if (!best || cand->element.word.size() < best->element.word.size() ||
          (cand->element.word.size() == best->element.word.size() &&
           cand->residual < best->residual)) {
        best = cand;
      }
    }
    if (!best) {
      streak.clear();
      continue;
    }
    WitnessLevel lvl;
    lvl.level = n;
    lvl.epsilon = eps;
    lvl.element = best->element;
    lvl.x_n = best->x_n;
    lvl.image = best->element.map.apply(space, best->x_n);
    lvl.dist_x = space.distance(lvl.x_n, x);
    lvl.dist_y = space.distance(lvl.image, y);
    streak.push_back(std::move(lvl));
  }
  if (static_cast<int>(streak.size()) < kStreak) return std::nullopt;
  DynamicalWitness w;
  w.x = x;
  w.y = y;
  w.levels = std::move(streak);
  w.residual = std::max(w.levels.back().dist_x, w.levels.back().dist_y);
  return w;
}

double wandering_radius(const ActionSystem& action, const Point& x) {
  const SpaceModel& space = action.space();
  space.require(x);
  double search = std::max(action.max_generator_displacement() * 2, 1.0);
  double rho_free = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 8 && !std::isfinite(rho_free); ++round) {
    for (const auto& g : action.mapping_near(x, x, search)) {
      double d = space.distance(g.map.apply(space, x), x);
      if (d > kPointTol) rho_free = std::min(rho_free, d);
    }
    search *= 2;
  }
  if (!std::isfinite(rho_free)) {
    // Every enumerated element fixes x; any radius gives a slice.
    return std::max(action.max_generator_displacement(), 1.0);
  }
  if (rho_free <= kPointTol)
    throw not_wandering("orbit accumulates at the point; no positive slice radius");
  double r = rho_free / 2.0;
  // (B|B)_G must lie in the stabilizer. The closed-ball transporter also
  // reports elements touching at displacement exactly 2r; those do not meet
  // the open ball and are allowed.
  for (const auto& g : action.transporter({x, r}, {x, r})) {
    double d = space.distance(g.map.apply(space, x), x);
    if (d > kPointTol && d < 2 * r - 1e-6)
      throw not_wandering("transporter of the slice ball leaves the stabilizer");
  }
  return r;
}

}  // namespace fundom
