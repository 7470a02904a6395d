#include "fundom/netting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "fundom/quotient.hpp"
#include "fundom/rng.hpp"

namespace fundom {

namespace {

// Append-only bucket grid over plane/disk coordinates (graphs scan linearly).
// Disk queries widen by the d_h >= 2 d_e bound.
class IncrementalGrid {
 public:
  IncrementalGrid(const SpaceModel& space, const Point& center, double euclid_extent)
      : space_(space), graph_(space.model() == Model::Graph) {
    cx_ = graph_ ? 0 : center.x;
    cy_ = graph_ ? 0 : center.y;
    cell_ = std::max(euclid_extent / 192.0, 1e-9);
  }

  int size() const { return static_cast<int>(points_.size()); }
  const Point& point(int i) const { return points_[i]; }

  int add(const Point& p) {
    points_.push_back(p);
    if (!graph_) buckets_[key(p.x, p.y)].push_back(size() - 1);
    return size() - 1;
  }

  // Indices within metric distance r of y (sorted by distance).
  std::vector<std::pair<int, double>> within(const Point& y, double r) const {
    std::vector<std::pair<int, double>> out;
    auto consider = [&](int i) {
      double d = space_.distance(points_[i], y);
      if (d <= r) out.emplace_back(i, d);
    };
    if (graph_) {
      for (int i = 0; i < size(); ++i) consider(i);
    } else {
      double er = space_.model() == Model::Disk ? r / 2 : r;
      long ix0 = cell_index(y.x - er - cx_), ix1 = cell_index(y.x + er - cx_);
      long iy0 = cell_index(y.y - er - cy_), iy1 = cell_index(y.y + er - cy_);
      double cells = static_cast<double>(ix1 - ix0 + 1) * static_cast<double>(iy1 - iy0 + 1);
      if (!std::isfinite(er) || cells > size() + 1024.0) {
        for (int i = 0; i < size(); ++i) consider(i);
      } else {
        for (long iy = iy0; iy <= iy1; ++iy) {
          for (long ix = ix0; ix <= ix1; ++ix) {
            auto it = buckets_.find(pack(ix, iy));
            if (it == buckets_.end()) continue;
            for (int i : it->second) consider(i);
          }
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second < b.second || (a.second == b.second && a.first < b.first);
    });
    return out;
  }

  // Nearest point (doubling radius search); -1 when empty.
  std::pair<int, double> nearest(const Point& y, double start_radius) const {
    if (points_.empty()) return {-1, 0};
    double r = std::max(start_radius, cell_);
    for (int i = 0; i < 60; ++i) {
      auto hits = within(y, r);
      if (!hits.empty()) return hits.front();
      r *= 2;
    }
    return {-1, 0};
  }

 private:
  const SpaceModel& space_;
  bool graph_;
  double cx_, cy_, cell_;
  std::vector<Point> points_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;

  long cell_index(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  std::uint64_t key(double x, double y) const { return pack(cell_index(x - cx_), cell_index(y - cy_)); }
  static std::uint64_t pack(long ix, long iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) ^
           static_cast<std::uint32_t>(iy);
  }
};

double euclid_extent(const SpaceModel& space, const Window& w) {
  if (space.model() == Model::Disk) return 2.0 * std::tanh((w.radius + 1) / 2.0);
  return 2.0 * (w.radius + 1);
}

int stream_size_for(const SpaceModel& space, const Window& w, int requested,
                    const NettingOptions& opts) {
  if (requested > 0) return requested;
  double measure = space.ball_measure(w.center, w.radius);
  double n = measure * opts.stream_per_unit;
  return static_cast<int>(std::clamp(n, static_cast<double>(opts.min_stream), 4e6));
}

double net_gap(const SpaceModel& space, const IncrementalGrid& grid) {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    double r = 1e-6;
    for (int round = 0; round < 60; ++round) {
      auto hits = grid.within(grid.point(i), r);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [j, d] : hits)
        if (j != i) best = std::min(best, d);
      if (std::isfinite(best)) {
        gap = std::min(gap, best);
        break;
      }
      r *= 2;
      if (r > 1e9) break;
    }
  }
  return std::isfinite(gap) ? gap : 0.0;
}

}  // namespace

double boundary_band_fraction(const SpaceModel& space, const Net& net, const Window& window,
                              double band, int samples, std::uint64_t seed) {
  Tessellation tess(space, net, band);
  SampleSet s = space.sample_ball(window.center, window.radius, samples, seed);
  int in_band = 0;
  for (const auto& y : s.points)
    if (tess.classify(y).verdict == TileVerdict::BoundaryBand) ++in_band;
  return static_cast<double>(in_band) / std::max(1, samples);
}

Net maximal_net(const SpaceModel& space, const Window& window,
                const std::function<double(const Point&)>& phi, int stream_size,
                std::uint64_t seed, const NettingOptions& opts) {
  space.require(window.center);
  int n = stream_size_for(space, window, stream_size, opts);
  SampleSet stream = space.sample_ball(window.center, window.radius, n, seed);
  IncrementalGrid grid(space, window.center, euclid_extent(space, window));
  Net net;
  net.window = window;
  for (const auto& y : stream.points) {
    double fy = phi(y);
    if (!(fy >= 1e-6)) throw std::invalid_argument("phi must stay above 1e-6 on the window");
    bool ok = true;
    for (const auto& [i, d] : grid.within(y, fy / 2)) {
      if (d < std::min(net.phi[i], fy) / 2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    grid.add(y);
    net.points.push_back(y);
    net.phi.push_back(fy);
  }
  if (net.points.empty()) throw std::invalid_argument("empty stream or window");

  // Covering validation on a fresh stream: every z sees a net point within
  // phi(z), up to the finite-stream slack.
  SampleSet check = space.sample_ball(window.center, window.radius, n, Rng(seed).split(17).next());
  for (const auto& z : check.points) {
    double fz = phi(z);
    auto [i, d] = grid.nearest(z, fz);
    if (i < 0 || d > fz * (1 + opts.covering_slack))
      throw stream_too_small("covering validation failed; enlarge the sample stream", z);
  }
  net.gap = net_gap(space, grid);
  net.proper = true;
  return net;
}

Net perturb_net(const SpaceModel& space, const Net& net, std::uint64_t seed,
                const NettingOptions& opts) {
  if (net.phi.size() != net.points.size())
    throw std::invalid_argument("perturb_net needs a net with recorded phi");
  Rng rng(seed);
  Net out = net;
  for (int attempt = 0; attempt < std::max(1, opts.perturb_retries); ++attempt) {
    out.points = net.points;
    // eps_x: below 1e-2 * min(phi, neighbor gap)/2, shrinking dyadically with
    // admission rank, so the perturbation sequence tends to zero.
    IncrementalGrid grid(space, net.window.center, euclid_extent(space, net.window));
    for (const auto& p : net.points) grid.add(p);
    std::vector<double> eps(net.points.size(), 0.0);
    for (std::size_t i = 0; i < net.points.size(); ++i) {
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& [j, d] : grid.within(net.points[i], net.phi[i] * 2))
        if (j != static_cast<int>(i)) gap = std::min(gap, d);
      if (!std::isfinite(gap)) gap = net.phi[i];
      double rank_cap = 1e-2 * std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(i, 1000)));
      eps[i] = std::min(1e-2 * std::min(net.phi[i], gap) / 2, rank_cap);
    }
    for (std::size_t i = 0; i < net.points.size(); ++i) {
      if (eps[i] <= 0) continue;
      SampleSet s = space.sample_ball(net.points[i], eps[i], 1, rng.next());
      out.points[i] = s.points[0];
    }
    // Perturbation balls must stay pairwise disjoint.
    bool disjoint = true;
    for (std::size_t i = 0; i < net.points.size() && disjoint; ++i) {
      for (const auto& [j, d] : grid.within(net.points[i], net.phi[i] * 2)) {
        if (j != static_cast<int>(i) && d <= eps[i] + eps[j]) {
          disjoint = false;
          break;
        }
      }
    }
    if (!disjoint) continue;

    double frac = boundary_band_fraction(space, out, net.window, opts.audit_band,
                                         opts.audit_samples, rng.next());
    if (frac < opts.audit_fraction) {
      out.boundary_audit_pass = true;
      IncrementalGrid regrid(space, net.window.center, euclid_extent(space, net.window));
      for (const auto& p : out.points) regrid.add(p);
      out.gap = net_gap(space, regrid);
      return out;
    }
  }
  if (space.model() == Model::Graph) {
    // Graph bisectors can keep nonempty interior; record instead of failing.
    out.boundary_audit_pass = false;
    return out;
  }
  throw thin_boundary_unachieved("boundary band stayed above the audit threshold");
}

// ---------------------------------------------------------------------------
// Invariant nets
// ---------------------------------------------------------------------------

namespace {

// rho = margin function with Lipschitz-bound caching: exact values anchor a
// coarse memo, queries in the uncertain band recompute exactly.
class MarginField {
 public:
  MarginField(const ActionSystem& action, const Window& window)
      : action_(action),
        anchors_(action.space(), window.center, euclid_extent(action.space(), window)) {}

  double exact(const Point& y) {
    double v = rho(action_, y).value;
    anchors_.add(y);
    values_.push_back(v);
    return v;
  }

  // Lipschitz band from the nearest anchor: |rho(y) - rho(a)| <= 2 d(y, a).
  std::pair<double, double> bounds(const Point& y) const {
    auto [i, d] = anchors_.nearest(y, 0.05);
    if (i < 0) return {0.0, std::numeric_limits<double>::infinity()};
    return {values_[i] - 2 * d, values_[i] + 2 * d};
  }

 private:
  const ActionSystem& action_;
  IncrementalGrid anchors_;
  std::vector<double> values_;
};

}  // namespace

Net invariant_net(const ActionSystem& action, const Window& window, std::uint64_t seed,
                  const NettingOptions& opts) {
  const SpaceModel& space = action.space();
  space.require(window.center);
  Net net;
  net.window = window;
  net.complete = action.complete_enumeration();

  // Trivial group: nothing to close over; a coarse net stands in for the
  // quotient construction (rho is infinite).
  if (action.known_order() && *action.known_order() == 1) {
    double diam = 4 * window.radius;
    Net base = maximal_net(space, window, [diam](const Point&) { return diam; }, 0, seed, opts);
    base = perturb_net(space, base, Rng(seed).split(3).next(), opts);
    base.orbit.resize(base.points.size());
    base.rep_index.resize(base.points.size());
    base.from_rep.assign(base.points.size(), GroupElement{});
    for (std::size_t i = 0; i < base.points.size(); ++i) {
      base.orbit[i] = static_cast<int>(i);
      base.rep_index[i] = static_cast<int>(i);
    }
    base.complete = true;
    return base;
  }

  MarginField field(action, window);
  auto phi_exact = [&](const Point& y) {
    double r = field.exact(y);
    if (!(r > 1e-6)) throw non_free_action("action is not free on the window", y);
    return r / 16.0;
  };

  const double phi_center = phi_exact(window.center);
  const double phi_max = phi_center + window.radius / 8.0;  // 2-Lipschitz / 16
  const double pad = 6.0 * phi_max;
  const Window padded{window.center, window.radius + pad};

  struct Rep {
    Point point;
    double phi;
  };
  std::vector<Rep> reps;
  IncrementalGrid images(space, window.center, euclid_extent(space, padded));
  std::vector<int> image_orbit;    // materialized index -> orbit id
  std::vector<GroupElement> image_from;  // materialized index -> rep map

  auto close_orbit = [&](const Point& rep, double phi_rep, int orbit_id) {
    for (auto& g : action.mapping_near(rep, window.center, padded.radius)) {
      Point img = g.map.apply(space, rep);
      if (!images.within(img, kPointTol).empty()) continue;  // free action guard
      images.add(img);
      image_orbit.push_back(orbit_id);
      image_from.push_back(std::move(g));
      net.phi.push_back(phi_rep);
    }
  };

  int n = stream_size_for(space, window, 0, opts);
  SampleSet stream = space.sample_ball(window.center, window.radius, n, seed);
  for (const auto& y : stream.points) {
    auto [lb, ub] = field.bounds(y);
    if (ub <= 1e-6) throw non_free_action("action is not free on the window", y);
    double phi_lb = std::max(lb, 0.0) / 16.0;
    double phi_ub = ub / 16.0;
    // Cheap certain-reject: an image closer than half of both phis.
    auto hits = images.within(y, phi_ub / 2);
    bool rejected = false;
    bool uncertain = false;
    for (const auto& [i, d] : hits) {
      double other = net.phi[i];
      if (d < std::min(other, phi_lb) / 2) {
        rejected = true;
        break;
      }
      if (d < std::min(other, phi_ub) / 2) uncertain = true;
    }
    if (rejected) continue;
    (void)uncertain;
    // Candidate survives the cheap screen; settle it with the exact phi.
    double fy = phi_exact(y);
    bool ok = true;
    for (const auto& [i, d] : images.within(y, fy / 2)) {
      if (d < std::min(net.phi[i], fy) / 2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    int orbit_id = static_cast<int>(reps.size());
    reps.push_back({y, fy});
    close_orbit(y, fy, orbit_id);
  }
  if (reps.empty()) throw std::invalid_argument("no net representative admitted");

  // Covering validation against the quotient distance (nearest orbit image).
  SampleSet check = space.sample_ball(window.center, window.radius, n, Rng(seed).split(17).next());
  for (const auto& z : check.points) {
    auto [lb, ub] = field.bounds(z);
    double phi_lb = std::max(lb, 0.0) / 16.0, phi_ub = ub / 16.0;
    auto [i, d] = images.nearest(z, phi_ub);
    if (i < 0) throw stream_too_small("covering validation failed", z);
    if (d <= phi_lb * (1 + opts.covering_slack)) continue;
    double fz = field.exact(z) / 16.0;
    if (d > fz * (1 + opts.covering_slack))
      throw stream_too_small("covering validation failed; enlarge the stream", z);
  }

  // Perturb representatives (dyadic, disjoint, below phi), then re-close.
  Rng prng(Rng(seed).split(29).next());
  for (int attempt = 0; attempt < std::max(1, opts.perturb_retries); ++attempt) {
    Net out;
    out.window = window;
    out.complete = net.complete;
    IncrementalGrid regrid(space, window.center, euclid_extent(space, padded));
    out.rep_index.assign(reps.size(), -1);
    bool good = true;
    for (std::size_t r = 0; r < reps.size() && good; ++r) {
      auto [i0, gap] = [&]() {
        auto hits = images.within(reps[r].point, reps[r].phi * 2);
        for (const auto& [j, d] : hits)
          if (d > kPointTol) return std::make_pair(j, d);
        return std::make_pair(-1, reps[r].phi);
      }();
      (void)i0;
      double rank_cap = 1e-2 * std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(r, 1000)));
      double eps = std::min(1e-2 * std::min(reps[r].phi, gap) / 2, rank_cap);
      Point moved = reps[r].point;
      if (eps > 0) {
        SampleSet s = space.sample_ball(reps[r].point, eps, 1, prng.next());
        moved = s.points[0];
      }
      // Re-close the orbit of the moved representative.
      int orbit_id = static_cast<int>(r);
      for (auto& g : action.mapping_near(moved, window.center, padded.radius)) {
        Point img = g.map.apply(space, moved);
        if (!regrid.within(img, kPointTol).empty()) {
          good = false;  // collision after perturbation; retry
          break;
        }
        int idx = regrid.add(img);
        out.points.push_back(img);
        out.phi.push_back(reps[r].phi);
        out.orbit.push_back(orbit_id);
        bool is_id = g.is_identity_word();
        out.from_rep.push_back(std::move(g));
        if (is_id) out.rep_index[r] = idx;
      }
      if (out.rep_index[r] < 0) good = false;
    }
    if (!good) continue;
    double frac = boundary_band_fraction(space, out, window, opts.audit_band, opts.audit_samples,
                                         prng.next());
    out.boundary_audit_pass = frac < opts.audit_fraction;
    if (!out.boundary_audit_pass && space.model() != Model::Graph &&
        attempt + 1 < std::max(1, opts.perturb_retries))
      continue;
    if (!out.boundary_audit_pass && space.model() != Model::Graph)
      throw thin_boundary_unachieved("boundary band stayed above the audit threshold");
    IncrementalGrid gapgrid(space, window.center, euclid_extent(space, padded));
    for (const auto& p : out.points) gapgrid.add(p);
    out.gap = net_gap(space, gapgrid);
    out.proper = true;
    return out;
  }
  throw thin_boundary_unachieved("perturbation retries exhausted");
}

}  // namespace fundom
