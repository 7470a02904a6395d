#include "fundom/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "fundom/quotient.hpp"
#include "fundom/rng.hpp"

namespace fundom {

TileMembership dirichlet_membership(const ActionSystem& action, const Point& x, const Point& y) {
  const SpaceModel& space = action.space();
  space.require(x);
  space.require(y);
  double dxy = space.distance(x, y);
  // Orbit points of x near y decide the margin; anything beyond the cap
  // cannot push it lower, so the reported margin is min(true margin, cap).
  const double cap = std::max(1.0, dxy);
  TileMembership m;
  m.margin = cap;
  m.nearest = 0;
  for (const auto& g : action.mapping_near(x, y, dxy + cap)) {
    Point gx = g.map.apply(space, x);
    if (space.distance(gx, x) <= kPointTol) continue;  // stabilizer: same tile
    m.margin = std::min(m.margin, space.distance(y, gx) - dxy);
  }
  if (m.margin > kPointTol)
    m.verdict = TileVerdict::Interior;
  else if (m.margin < -kPointTol)
    m.verdict = TileVerdict::Outside;
  else
    m.verdict = TileVerdict::BoundaryBand;
  return m;
}

FundamentalSetReport verify_fundamental_set(const ActionSystem& action,
                                            const std::function<bool(const Point&)>& oracle,
                                            const Window& window, int samples,
                                            std::uint64_t seed) {
  const SpaceModel& space = action.space();
  FundamentalSetReport report;
  report.samples = samples;
  report.complete = action.complete_enumeration();
  Rng rng(seed);
  SampleSet s = space.sample_ball(window.center, window.radius, samples, rng.next());
  for (const auto& y : s.points) {
    bool covered = false;
    // g^-1 y can only land in the window when g maps the center near y.
    for (const auto& g : action.mapping_near(window.center, y, window.radius)) {
      Point p = g.map.inverse().apply(space, y);
      if (!space.valid(p)) continue;
      if (space.distance(p, window.center) > window.radius + kPointTol) continue;
      if (oracle(p)) {
        covered = true;
        break;
      }
    }
    if (covered) ++report.covered;
  }
  report.coverage = static_cast<double>(report.covered) / std::max(1, samples);

  // Local finiteness: count elements whose translate of the set meets small
  // probe balls.
  double probe_radius = std::min(1.0, window.radius / 2);
  for (int b = 0; b < 3; ++b) {
    Point center = b == 0 ? window.center
                          : space.sample_ball(window.center, window.radius * 0.6, 1, seed + b)
                                .points[0];
    SampleSet zs = space.sample_ball(center, probe_radius, 200, rng.next());
    std::set<std::vector<int>> elements;
    for (const auto& z : zs.points) {
      for (const auto& g : action.mapping_near(window.center, z, window.radius)) {
        Point p = g.map.inverse().apply(space, z);
        if (!space.valid(p)) continue;
        if (space.distance(p, window.center) > window.radius + kPointTol) continue;
        if (oracle(p)) elements.insert(g.word);
      }
    }
    report.ball_counts.push_back(static_cast<int>(elements.size()));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Incidence graph
// ---------------------------------------------------------------------------

namespace {

int find_vertex(const Tessellation& tess, const Point& p) {
  if (!tess.space().valid(p)) return -1;
  auto hits = tess.within(p, kPointTol);
  return hits.empty() ? -1 : hits[0].index;
}

// A probe certifies tiles i, j as adjacent when it sees them as its two
// closest centers within tau of each other and clearly ahead of the third
// (higher-order corner ties are skipped; other probes settle those pairs).
bool probe_accepts(const Tessellation& tess, int i, int j, const Point& q, double tau) {
  auto top = tess.nearest(q, 3);
  if (top.size() < 2) return false;
  if (!((top[0].index == i && top[1].index == j) || (top[0].index == j && top[1].index == i)))
    return false;
  if (top[1].dist - top[0].dist > tau) return false;
  if (top.size() >= 3 && top[2].dist - top[1].dist <= tau) return false;
  return true;
}

bool confirm_edge(const Tessellation& tess, int i, int j, int probes, std::uint64_t seed,
                  double tau) {
  const SpaceModel& space = tess.space();
  const Point& pi = tess.net().points[i];
  const Point& pj = tess.net().points[j];
  Point mid = space.midpoint(pi, pj);
  if (probe_accepts(tess, i, j, mid, tau)) return true;
  auto margin = [&](const Point& z) { return space.distance(z, pi) - space.distance(z, pj); };
  Rng rng(seed);
  double spread = space.distance(pi, pj) / 3;
  for (int k = 0; k < probes; ++k) {
    SampleSet s = space.sample_ball(mid, spread, 1, rng.next());
    Point q = s.points[0];
    double m = margin(q);
    const Point& target = m < 0 ? pj : pi;  // slide onto the (i, j) bisector
    if (space.points_equal(q, target)) continue;
    Geodesic geo = space.geodesic(q, target);
    double lo = 0, hi = geo.length();
    for (int it = 0; it < 50; ++it) {
      double t = 0.5 * (lo + hi);
      double v = margin(geo.eval(t));
      if ((v < 0) == (m < 0))
        lo = t;
      else
        hi = t;
    }
    if (probe_accepts(tess, i, j, geo.eval(hi), tau)) return true;
  }
  return false;
}

std::vector<std::pair<int, int>> candidate_pairs(const Tessellation& tess, const Window& window) {
  const SpaceModel& space = tess.space();
  const Net& net = tess.net();
  std::set<std::pair<int, int>> pairs;
  auto add = [&](int a, int b) {
    if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
  };
  if (space.model() == Model::Graph) {
    for (int i = 0; i < tess.size(); ++i) {
      double fi = net.phi.empty() ? net.window.radius : net.phi[i];
      for (const auto& h : tess.within(net.points[i], 4 * fi))
        if (h.index > i) add(i, h.index);
    }
    return {pairs.begin(), pairs.end()};
  }
  // Raster the window's bounding box with nearest-center ownership; cells
  // with differently-owned neighbors yield the candidate pairs.
  double ex0, ex1, ey0, ey1;
  if (space.model() == Model::Disk) {
    ex0 = ey0 = 1e300;
    ex1 = ey1 = -1e300;
    SampleSet ring = space.sample_ball(window.center, window.radius, 256, 99);
    for (const auto& p : ring.points) {
      ex0 = std::min(ex0, p.x);
      ex1 = std::max(ex1, p.x);
      ey0 = std::min(ey0, p.y);
      ey1 = std::max(ey1, p.y);
    }
    double pad = 0.02 * (ex1 - ex0 + 1e-6);
    ex0 -= pad;
    ex1 += pad;
    ey0 -= pad;
    ey1 += pad;
  } else {
    ex0 = window.center.x - window.radius;
    ex1 = window.center.x + window.radius;
    ey0 = window.center.y - window.radius;
    ey1 = window.center.y + window.radius;
  }
  int grid = std::clamp(static_cast<int>(3 * std::sqrt(static_cast<double>(tess.size()))) + 32, 64,
                        700);
  std::vector<int> owner(static_cast<std::size_t>(grid) * grid, -1);
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      double x = ex0 + (ex1 - ex0) * (ix + 0.5) / grid;
      double y = ey0 + (ey1 - ey0) * (iy + 0.5) / grid;
      Point p = space.model() == Model::Disk ? Point::disk(x, y) : Point::plane(x, y);
      if (!space.valid(p)) continue;
      auto top = tess.nearest(p, 1);
      if (!top.empty()) owner[static_cast<std::size_t>(iy) * grid + ix] = top[0].index;
    }
  }
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      int o = owner[static_cast<std::size_t>(iy) * grid + ix];
      if (o < 0) continue;
      if (ix + 1 < grid) {
        int r = owner[static_cast<std::size_t>(iy) * grid + ix + 1];
        if (r >= 0) add(o, r);
      }
      if (iy + 1 < grid) {
        int d = owner[static_cast<std::size_t>(iy + 1) * grid + ix];
        if (d >= 0) add(o, d);
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

void finalize_graph(IncidenceGraph& graph, const std::set<std::pair<int, int>>& edges,
                    const std::map<std::pair<int, int>, std::pair<int, int>>& canon_of) {
  graph.edges.assign(edges.begin(), edges.end());
  graph.edge_canonical.resize(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    auto it = canon_of.find(graph.edges[e]);
    graph.edge_canonical[e] = it == canon_of.end() ? graph.edges[e] : it->second;
  }
  graph.adjacency.assign(graph.n, {});
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    graph.adjacency[graph.edges[e].first].push_back(static_cast<int>(e));
    graph.adjacency[graph.edges[e].second].push_back(static_cast<int>(e));
  }
  std::vector<char> seen(graph.n, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int e : graph.adjacency[v]) {
      int w = graph.other_end(e, v);
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        bfs.push(w);
      }
    }
  }
  graph.connected = reached == graph.n;
  graph.underprobed = !graph.connected;
}

}  // namespace

IncidenceGraph incidence_graph(const ActionSystem& action, const Tessellation& tess,
                               const Window& window, int probes_per_pair, std::uint64_t seed,
                               double tau_adj) {
  const SpaceModel& space = action.space();
  const Net& net = tess.net();
  if (net.orbit.empty() || net.from_rep.size() != net.points.size())
    throw std::invalid_argument("incidence_graph needs a G-invariant net with orbit data");
  IncidenceGraph graph;
  graph.n = tess.size();
  graph.orbit = net.orbit;
  graph.rep_index = net.rep_index;
  graph.from_rep = net.from_rep;

  Rng rng(seed);
  std::set<std::pair<int, int>> raw;
  for (const auto& [i, j] : candidate_pairs(tess, window))
    if (confirm_edge(tess, i, j, probes_per_pair, rng.next(), tau_adj)) raw.emplace(i, j);

  // Anchor an edge at an endpoint's orbit representative; for free actions
  // equivalent edges collide on the same anchored pair.
  auto canonical = [&](int i, int j) -> std::pair<int, int> {
    std::pair<int, int> best{-1, -1};
    for (int side = 0; side < 2; ++side) {
      int a = side == 0 ? i : j;
      int b = side == 0 ? j : i;
      Isometry to_rep = net.from_rep[a].map.inverse();
      int bb = find_vertex(tess, to_rep.apply(space, net.points[b]));
      if (bb < 0) continue;
      int ra = net.rep_index[net.orbit[a]];
      std::pair<int, int> key{std::min(ra, bb), std::max(ra, bb)};
      if (best.first < 0 || key < best) best = key;
    }
    return best;
  };

  std::set<std::pair<int, int>> canon;
  std::set<std::pair<int, int>> edges;
  std::map<std::pair<int, int>, std::pair<int, int>> canon_of;
  for (const auto& [i, j] : raw) {
    auto key = canonical(i, j);
    if (key.first < 0) {
      edges.emplace(i, j);  // unanchorable window-boundary edge
    } else {
      canon.insert(key);
    }
  }
  // Expand every edge orbit through the stored rep maps so the edge set is
  // equivariant within the materialized window.
  for (const auto& [a, b] : canon) {
    int orb_a = net.orbit[a];
    for (int v = 0; v < graph.n; ++v) {
      if (net.orbit[v] != orb_a) continue;
      int w = v == a ? b : find_vertex(tess, net.from_rep[v].map.apply(space, net.points[b]));
      if (w < 0 || w == v) continue;
      std::pair<int, int> e{std::min(v, w), std::max(v, w)};
      edges.insert(e);
      canon_of[e] = {a, b};
    }
  }
  finalize_graph(graph, edges, canon_of);

  auto top = tess.nearest(window.center, 1);
  graph.root_hint = top.empty() ? 0 : net.orbit[top[0].index];
  return graph;
}

IncidenceGraph make_incidence_graph(int n, const std::vector<std::pair<int, int>>& edges,
                                    const std::vector<std::vector<int>>& element_vertex_maps) {
  IncidenceGraph graph;
  graph.n = n;
  // Orbits = connected components of the vertex-map relation.
  graph.orbit.assign(n, -1);
  int orbits = 0;
  for (int v = 0; v < n; ++v) {
    if (graph.orbit[v] >= 0) continue;
    std::queue<int> bfs;
    bfs.push(v);
    graph.orbit[v] = orbits;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (const auto& m : element_vertex_maps) {
        int w = m[u];
        if (w >= 0 && graph.orbit[w] < 0) {
          graph.orbit[w] = orbits;
          bfs.push(w);
        }
      }
    }
    ++orbits;
  }
  graph.rep_index.assign(orbits, -1);
  for (int v = 0; v < n; ++v)
    if (graph.rep_index[graph.orbit[v]] < 0) graph.rep_index[graph.orbit[v]] = v;

  std::set<std::pair<int, int>> eset;
  std::map<std::pair<int, int>, std::pair<int, int>> canon_of;
  for (auto [i, j] : edges) eset.emplace(std::min(i, j), std::max(i, j));
  for (const auto& e : eset) {
    // Anchor: an element mapping one endpoint onto its orbit representative.
    std::pair<int, int> best{-1, -1};
    for (int side = 0; side < 2; ++side) {
      int a = side == 0 ? e.first : e.second;
      int b = side == 0 ? e.second : e.first;
      int ra = graph.rep_index[graph.orbit[a]];
      for (const auto& m : element_vertex_maps) {
        if (m[a] != ra || m[b] < 0) continue;
        std::pair<int, int> key{std::min(ra, m[b]), std::max(ra, m[b])};
        if (best.first < 0 || key < best) best = key;
        break;
      }
    }
    if (best.first >= 0) canon_of[e] = best;
  }
  finalize_graph(graph, eset, canon_of);
  graph.root_hint = graph.orbit.empty() ? 0 : graph.orbit[0];
  return graph;
}

// ---------------------------------------------------------------------------
// Spanning tree lift
// ---------------------------------------------------------------------------

namespace {

TreeLift try_lift(const IncidenceGraph& graph, int root_orbit) {
  TreeLift lift;
  int orbits = 0;
  for (int v = 0; v < graph.n; ++v) orbits = std::max(orbits, graph.orbit[v] + 1);
  lift.vertex_orbits = orbits;

  std::map<std::pair<int, int>, int> eo_id;
  for (const auto& key : graph.edge_canonical)
    if (!eo_id.count(key)) {
      int id = static_cast<int>(eo_id.size());
      eo_id[key] = id;
    }
  lift.edge_orbits = static_cast<int>(eo_id.size());

  // Quotient graph Gamma'/G: vertex-orbit nodes [0, V), edge-orbit nodes
  // [V, V + E). Barycentric subdivision happens implicitly: each edge orbit
  // is a midpoint node joined to its endpoint orbits.
  int total = orbits + lift.edge_orbits;
  std::vector<std::set<int>> qadj(total);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    int m = orbits + eo_id.at(graph.edge_canonical[e]);
    int a = graph.orbit[graph.edges[e].first];
    int b = graph.orbit[graph.edges[e].second];
    qadj[a].insert(m);
    qadj[m].insert(a);
    qadj[b].insert(m);
    qadj[m].insert(b);
  }
  for (int q = 0; q < total; ++q)
    for (int r : qadj[q])
      if (q < r) lift.quotient_edges.emplace_back(q, r);

  // Breadth-first maximal subtree of the quotient rooted at the chosen orbit.
  std::vector<int> parent(total, -2);
  std::queue<int> bfs;
  parent[root_orbit] = -1;
  bfs.push(root_orbit);
  std::vector<int> order;
  while (!bfs.empty()) {
    int q = bfs.front();
    bfs.pop();
    order.push_back(q);
    for (int r : qadj[q]) {
      if (parent[r] != -2) continue;
      parent[r] = q;
      lift.tree_edges.emplace_back(q, r);
      bfs.push(r);
    }
  }
  if (static_cast<int>(order.size()) != total)
    throw lift_failure("quotient graph is disconnected");

  // Lift the tree ball-by-ball: the root lifts to its representative; each
  // tree edge lifts to a concrete incident edge of the right orbit.
  lift.lifted_vertex.assign(orbits, -1);
  lift.lifted_edges.assign(lift.edge_orbits, {-1, -1});
  lift.lifted_vertex[root_orbit] = graph.rep_index[root_orbit];
  for (int q : order) {
    if (q == root_orbit) continue;
    int p = parent[q];
    if (q >= orbits) {
      // Midpoint node: pick the lowest concrete edge at the lifted parent
      // vertex whose canonical key matches this orbit.
      int pv = lift.lifted_vertex[p];
      if (pv < 0) throw lift_failure("parent vertex not lifted");
      int found = -1;
      for (int e : graph.adjacency[pv]) {
        if (eo_id.at(graph.edge_canonical[e]) + orbits == q) {
          int w = graph.other_end(e, pv);
          if (found < 0 || w < graph.other_end(found, pv)) found = e;
        }
      }
      if (found < 0) throw lift_failure("no incident edge lifts the quotient edge");
      int w = graph.other_end(found, pv);
      lift.lifted_edges[q - orbits] = {pv, w};
    } else {
      // Vertex node entered through a lifted midpoint: take its far endpoint.
      auto [u, w] = lift.lifted_edges[p - orbits];
      if (u < 0) throw lift_failure("parent edge not lifted");
      int lifted = graph.orbit[w] == q ? w : (graph.orbit[u] == q ? u : -1);
      if (lifted < 0) throw lift_failure("edge lift endpoint misses the vertex orbit");
      if (lift.lifted_vertex[q] >= 0) throw lift_failure("orbit lifted twice");
      lift.lifted_vertex[q] = lifted;
    }
  }

  lift.S.assign(lift.lifted_vertex.begin(), lift.lifted_vertex.end());
  std::sort(lift.S.begin(), lift.S.end());
  // Strictness: every vertex orbit is met exactly once.
  std::vector<int> count(orbits, 0);
  for (int v : lift.S) {
    if (v < 0) throw lift_failure("orbit without a lift");
    ++count[graph.orbit[v]];
  }
  lift.strict = std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
  return lift;
}

}  // namespace

TreeLift spanning_tree_lift(const IncidenceGraph& graph) {
  if (graph.n == 0) throw std::invalid_argument("empty incidence graph");
  int orbits = 0;
  for (int v = 0; v < graph.n; ++v) orbits = std::max(orbits, graph.orbit[v] + 1);
  std::string last_error;
  for (int attempt = 0; attempt < orbits; ++attempt) {
    int root = (graph.root_hint + attempt) % orbits;
    try {
      return try_lift(graph, root);
    } catch (const lift_failure& e) {
      last_error = e.what();
    }
  }
  throw lift_failure("tree lift failed from every root: " + last_error);
}

// ---------------------------------------------------------------------------
// Fundamental domain assembly
// ---------------------------------------------------------------------------

bool FundamentalDomain::in_R(const Point& y) const {
  TileMembership m = tess.classify(y);
  return m.verdict == TileVerdict::Interior && in_S[m.nearest];
}

bool FundamentalDomain::in_F(const Point& y) const {
  for (const auto& h : tess.covering_centers(y, tess.band()))
    if (in_S[h.index]) return true;
  return false;
}

FundamentalDomain build_fundamental_domain(const ActionSystem& action, const Window& window,
                                           std::uint64_t seed, const DomainOptions& opts) {
  const SpaceModel& space = action.space();
  Rng rng(seed);
  Net net = invariant_net(action, window, seed, opts.netting);
  Tessellation tess(space, net);

  IncidenceGraph graph = incidence_graph(action, tess, window, opts.probes_per_pair, rng.next());
  if (graph.underprobed) {
    // One escalation pass with denser probing before giving up on the window.
    graph = incidence_graph(action, tess, window, opts.probes_per_pair * 4, rng.next());
  }
  TreeLift lift = spanning_tree_lift(graph);

  FundamentalDomain fd{std::move(net), std::move(tess), std::move(graph), std::move(lift),
                       {},        {},               {}};
  fd.S = fd.lift.S;
  fd.in_S.assign(fd.net.points.size(), 0);
  for (int v : fd.S) fd.in_S[v] = 1;
  std::vector<int> s_of_orbit(fd.lift.vertex_orbits, -1);
  for (int v : fd.S) s_of_orbit[fd.net.orbit[v]] = v;

  DomainReport& rep = fd.report;
  rep.net_size = static_cast<int>(fd.net.points.size());
  rep.orbit_count = fd.lift.vertex_orbits;
  rep.s_size = static_cast<int>(fd.S.size());
  rep.samples = opts.report_samples;
  if (!action.complete_enumeration()) rep.caveats.push_back("heuristic-enumeration");
  if (!fd.net.boundary_audit_pass) rep.caveats.push_back("boundary-audit-failed");
  if (fd.graph.underprobed) rep.caveats.push_back("incidence-underprobed");
  if (!fd.lift.strict) rep.caveats.push_back("tree-lift-not-strict");

  // Disjointness of {g R} and covering by G F over window samples.
  SampleSet samples = space.sample_ball(window.center, window.radius, opts.report_samples,
                                        rng.next());
  int interior_hits = 0, f_density_hits = 0, f_density_total = 0;
  for (const auto& y : samples.points) {
    bool in_r = fd.in_R(y);
    if (in_r) {
      ++interior_hits;
      for (const auto& g : action.mapping_near(window.center, y, window.radius)) {
        if (g.is_identity_word()) continue;
        Point p = g.map.inverse().apply(space, y);
        if (!space.valid(p)) continue;
        if (fd.in_R(p)) {
          ++rep.disjointness_violations;
          break;
        }
      }
      if (!fd.in_F(y)) rep.r_subset_f = false;
    }
    // Covering: map y's tile center back onto its S-representative.
    TileMembership m = fd.tess.classify(y);
    int c = m.nearest;
    bool covered = false;
    if (fd.in_S[c]) {
      covered = true;
    } else {
      int s = s_of_orbit[fd.net.orbit[c]];
      if (s >= 0) {
        // h maps s to c; h^-1 y lies in the tile of s.
        Isometry h = fd.net.from_rep[c].map.compose(fd.net.from_rep[s].map.inverse());
        Point p = h.inverse().apply(space, y);
        covered = space.valid(p) && fd.in_F(p);
      }
    }
    if (!covered) ++rep.missed_samples;

    // Closure density: an F-sample should reach R within 1e-3 (plane/disk).
    if (space.model() != Model::Graph && fd.in_F(y)) {
      ++f_density_total;
      if (fd.in_R(y)) {
        ++f_density_hits;
      } else {
        int sc = -1;  // the S-tile covering y
        for (const auto& h : fd.tess.covering_centers(y, fd.tess.band()))
          if (fd.in_S[h.index]) {
            sc = h.index;
            break;
          }
        bool reached = false;
        if (sc >= 0) {
          const Point& center = fd.net.points[sc];
          double d = space.distance(y, center);
          if (d > kPointTol) {
            Geodesic geo = space.geodesic(y, center);
            Point probe = geo.eval(std::min(1e-3, geo.length()));
            reached = fd.in_R(probe);
          }
        }
        if (reached) ++f_density_hits;
      }
    }
  }
  (void)interior_hits;
  rep.coverage = 1.0 - static_cast<double>(rep.missed_samples) / std::max(1, rep.samples);
  rep.closure_density =
      f_density_total == 0 ? 1.0 : static_cast<double>(f_density_hits) / f_density_total;

  // Local finiteness of {g F} across probe balls.
  double probe_radius = std::min(1.0, window.radius / 2);
  for (int b = 0; b < opts.probe_balls; ++b) {
    Point center = b == 0 ? window.center
                          : space.sample_ball(window.center, window.radius * 0.6, 1, seed + 31 + b)
                                .points[0];
    SampleSet zs = space.sample_ball(center, probe_radius, opts.ball_samples, rng.next());
    std::set<std::vector<int>> elements;
    for (const auto& z : zs.points) {
      for (const auto& h : fd.tess.covering_centers(z, fd.tess.band())) {
        int c = h.index;
        int s = s_of_orbit[fd.net.orbit[c]];
        if (s < 0) continue;
        // g = from_rep[c] . from_rep[s]^-1 sends s to c, so g F covers z.
        std::vector<int> word = fd.net.from_rep[c].word;
        for (auto it = fd.net.from_rep[s].word.rbegin(); it != fd.net.from_rep[s].word.rend(); ++it)
          word.push_back(-*it);
        elements.insert(std::move(word));
      }
    }
    rep.ball_counts.push_back(static_cast<int>(elements.size()));
  }

  // F-connectedness through the S-induced incidence subgraph, the criterion
  // the construction itself provides.
  std::map<int, int> s_pos;
  for (std::size_t i = 0; i < fd.S.size(); ++i) s_pos[fd.S[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> sadj(fd.S.size());
  for (const auto& [i, j] : fd.graph.edges) {
    auto a = s_pos.find(i), b = s_pos.find(j);
    if (a != s_pos.end() && b != s_pos.end()) {
      sadj[a->second].push_back(b->second);
      sadj[b->second].push_back(a->second);
    }
  }
  std::vector<char> seen(fd.S.size(), 0);
  std::queue<int> bfs;
  if (!fd.S.empty()) {
    bfs.push(0);
    seen[0] = 1;
  }
  std::size_t reached = fd.S.empty() ? 0 : 1;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int w : sadj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        bfs.push(w);
      }
  }
  rep.f_connected = reached == fd.S.size();
  return fd;
}

}  // namespace fundom
