#include "fundom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <tuple>

#include "fundom/rng.hpp"

namespace fundom {

using cplx = std::complex<double>;

const char* model_name(Model m) {
  switch (m) {
    case Model::Plane: return "plane";
    case Model::Disk: return "disk";
    case Model::Graph: return "graph";
  }
  return "?";
}

double hypot2(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

namespace {

cplx as_complex(const Point& p) { return cplx(p.x, p.y); }

// d(z, w) = 2 artanh |z - w| / |1 - conj(z) w|  (curvature -1 disk metric).
double disk_distance(const cplx& z, const cplx& w) {
  double num = std::abs(z - w);
  if (num == 0.0) return 0.0;
  double den = std::abs(1.0 - std::conj(z) * w);
  double t = num / den;
  if (t >= 1.0) t = 1.0 - 1e-16;
  return std::log((1.0 + t) / (1.0 - t));
}

// Disk automorphism taking p to the origin and its inverse.
cplx to_origin(const cplx& p, const cplx& z) { return (z - p) / (1.0 - std::conj(p) * z); }
cplx from_origin(const cplx& p, const cplx& w) { return (w + p) / (1.0 + std::conj(p) * w); }

}  // namespace

// ---------------------------------------------------------------------------
// Graph backend
// ---------------------------------------------------------------------------

struct SpaceModel::GraphData {
  int nv{0};
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> incident;  // vertex -> edge ids
  // All-pairs shortest vertex distances and, for path reconstruction, the
  // first edge of the canonical shortest path (lowest edge-id tie-break).
  std::vector<std::vector<double>> dist;
  std::vector<std::vector<int>> first_edge;
  double total_length{0};
  double max_vertex_dist{0};
};

SpaceModel SpaceModel::plane() {
  SpaceModel s;
  s.model_ = Model::Plane;
  return s;
}

SpaceModel SpaceModel::disk() {
  SpaceModel s;
  s.model_ = Model::Disk;
  return s;
}

SpaceModel SpaceModel::graph(int vertex_count, std::vector<GraphEdge> edges) {
  if (vertex_count <= 0) throw std::invalid_argument("graph needs at least one vertex");
  auto data = std::make_shared<GraphData>();
  data->nv = vertex_count;
  data->incident.resize(vertex_count);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const GraphEdge& ge = edges[e];
    if (ge.u < 0 || ge.u >= vertex_count || ge.v < 0 || ge.v >= vertex_count)
      throw std::invalid_argument("edge endpoint out of range");
    if (!(ge.length > 0)) throw std::invalid_argument("edge lengths must be positive");
    data->incident[ge.u].push_back(e);
    if (ge.v != ge.u) data->incident[ge.v].push_back(e);
    data->total_length += ge.length;
  }
  data->edges = std::move(edges);

  // Dijkstra from every vertex, settling on the lexicographically smallest
  // (distance, first edge id) key so path reconstruction is deterministic.
  const double inf = std::numeric_limits<double>::infinity();
  data->dist.assign(data->nv, std::vector<double>(data->nv, inf));
  data->first_edge.assign(data->nv, std::vector<int>(data->nv, -1));
  for (int src = 0; src < data->nv; ++src) {
    auto& dist = data->dist[src];
    auto& first = data->first_edge[src];
    std::vector<char> settled(data->nv, 0);
    using Item = std::tuple<double, int, int>;  // dist, first edge, vertex
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, -1, src);
    while (!pq.empty()) {
      auto [d, fe, v] = pq.top();
      pq.pop();
      if (settled[v]) continue;
      settled[v] = 1;
      dist[v] = d;
      first[v] = fe;
      for (int e : data->incident[v]) {
        const GraphEdge& ge = data->edges[e];
        int w = (ge.u == v) ? ge.v : ge.u;
        if (settled[w]) continue;
        pq.emplace(d + ge.length, fe < 0 ? e : fe, w);
      }
    }
    for (int v = 0; v < data->nv; ++v) {
      if (!settled[v]) throw std::invalid_argument("metric graph must be connected");
      data->max_vertex_dist = std::max(data->max_vertex_dist, dist[v]);
    }
  }

  SpaceModel s;
  s.model_ = Model::Graph;
  s.graph_ = std::move(data);
  return s;
}

int SpaceModel::vertex_count() const {
  if (model_ != Model::Graph) throw model_mismatch("vertex_count on non-graph model");
  return graph_->nv;
}

const std::vector<GraphEdge>& SpaceModel::edges() const {
  if (model_ != Model::Graph) throw model_mismatch("edges on non-graph model");
  return graph_->edges;
}

double SpaceModel::total_length() const {
  if (model_ != Model::Graph) throw model_mismatch("total_length on non-graph model");
  return graph_->total_length;
}

double SpaceModel::vertex_distance(int a, int b) const {
  if (model_ != Model::Graph) throw model_mismatch("vertex_distance on non-graph model");
  return graph_->dist[a][b];
}

Point SpaceModel::vertex_point(int v) const {
  if (model_ != Model::Graph) throw model_mismatch("vertex_point on non-graph model");
  // Canonical representation: lowest incident edge id.
  int e = graph_->incident[v].empty() ? 0 : graph_->incident[v].front();
  for (int cand : graph_->incident[v]) e = std::min(e, cand);
  const GraphEdge& ge = graph_->edges[e];
  return Point::graph(e, ge.u == v ? 0.0 : ge.length);
}

bool SpaceModel::valid(const Point& p) const {
  if (p.model != model_) return false;
  switch (model_) {
    case Model::Plane:
      return std::isfinite(p.x) && std::isfinite(p.y);
    case Model::Disk:
      return std::isfinite(p.x) && std::isfinite(p.y) &&
             p.x * p.x + p.y * p.y < 1.0 - kDiskMargin;
    case Model::Graph: {
      if (p.edge < 0 || p.edge >= static_cast<int>(graph_->edges.size())) return false;
      double len = graph_->edges[p.edge].length;
      return p.offset >= -kPointTol && p.offset <= len + kPointTol;
    }
  }
  return false;
}

void SpaceModel::require(const Point& p) const {
  if (p.model != model_)
    throw model_mismatch(std::string("point of model ") + model_name(p.model) +
                         " used with " + model_name(model_) + " space");
  if (!valid(p)) throw std::invalid_argument("invalid point for space model");
}

double SpaceModel::graph_distance(const Point& p, const Point& q) const {
  const auto& g = *graph_;
  const GraphEdge& ep = g.edges[p.edge];
  const GraphEdge& eq = g.edges[q.edge];
  double best = std::numeric_limits<double>::infinity();
  if (p.edge == q.edge) best = std::abs(p.offset - q.offset);
  const double pu = p.offset, pv = ep.length - p.offset;
  const double qu = q.offset, qv = eq.length - q.offset;
  best = std::min(best, pu + g.dist[ep.u][eq.u] + qu);
  best = std::min(best, pu + g.dist[ep.u][eq.v] + qv);
  best = std::min(best, pv + g.dist[ep.v][eq.u] + qu);
  best = std::min(best, pv + g.dist[ep.v][eq.v] + qv);
  return best;
}

double SpaceModel::distance(const Point& p, const Point& q) const {
  require(p);
  require(q);
  switch (model_) {
    case Model::Plane:
      return hypot2(p.x - q.x, p.y - q.y);
    case Model::Disk:
      return disk_distance(as_complex(p), as_complex(q));
    case Model::Graph:
      return graph_distance(p, q);
  }
  return 0.0;
}

Point Geodesic::eval(double t) const {
  t = std::clamp(t, 0.0, length_);
  switch (model_) {
    case Model::Plane: {
      double s = (length_ > 0) ? t / length_ : 0.0;
      return Point::plane(start_.x + s * (end_.x - start_.x), start_.y + s * (end_.y - start_.y));
    }
    case Model::Disk: {
      cplx p = as_complex(start_);
      cplx q0 = to_origin(p, as_complex(end_));
      double aq = std::abs(q0);
      cplx dir = (aq > 0) ? q0 / aq : cplx(1, 0);
      cplx w = std::tanh(t / 2.0) * dir;
      cplx z = from_origin(p, w);
      return Point::disk(z.real(), z.imag());
    }
    case Model::Graph: {
      double acc = 0.0;
      for (const auto& seg : segments_) {
        double seglen = std::abs(seg.to - seg.from);
        if (t <= acc + seglen + 1e-15) {
          double local = std::clamp(t - acc, 0.0, seglen);
          double off = seg.from + (seg.to >= seg.from ? local : -local);
          return Point::graph(seg.edge, off);
        }
        acc += seglen;
      }
      return end_;
    }
  }
  return end_;
}

Geodesic SpaceModel::graph_geodesic(const Point& p, const Point& q) const {
  const auto& g = *graph_;
  const GraphEdge& ep = g.edges[p.edge];
  const GraphEdge& eq = g.edges[q.edge];

  // Candidate routes: direct along the shared edge, or via an endpoint pair.
  struct Route {
    double len;
    int order;  // deterministic preference among exact ties
    int a, b;   // exit vertex of p's edge / entry vertex of q's edge, -1 = direct
  };
  std::vector<Route> routes;
  if (p.edge == q.edge) routes.push_back({std::abs(p.offset - q.offset), 0, -1, -1});
  const double pu = p.offset, pv = ep.length - p.offset;
  const double qu = q.offset, qv = eq.length - q.offset;
  routes.push_back({pu + g.dist[ep.u][eq.u] + qu, 1, ep.u, eq.u});
  routes.push_back({pu + g.dist[ep.u][eq.v] + qv, 2, ep.u, eq.v});
  routes.push_back({pv + g.dist[ep.v][eq.u] + qu, 3, ep.v, eq.u});
  routes.push_back({pv + g.dist[ep.v][eq.v] + qv, 4, ep.v, eq.v});
  const Route* best = &routes[0];
  for (const auto& r : routes)
    if (r.len < best->len - 1e-15) best = &r;

  Geodesic geo;
  geo.model_ = Model::Graph;
  geo.start_ = p;
  geo.end_ = q;
  geo.length_ = best->len;
  if (best->a < 0) {
    geo.segments_.push_back({p.edge, p.offset, q.offset});
    return geo;
  }
  // Segment from p to its exit vertex.
  geo.segments_.push_back({p.edge, p.offset, best->a == ep.u ? 0.0 : ep.length});
  // Vertex path a -> b via canonical first-edge pointers.
  int v = best->a;
  while (v != best->b) {
    int e = g.first_edge[v][best->b];
    const GraphEdge& ge = g.edges[e];
    int w = (ge.u == v) ? ge.v : ge.u;
    geo.segments_.push_back({e, ge.u == v ? 0.0 : ge.length, ge.u == v ? ge.length : 0.0});
    v = w;
  }
  // Segment from entry vertex into q's edge.
  geo.segments_.push_back({q.edge, best->b == eq.u ? 0.0 : eq.length, q.offset});
  // Drop zero-length pieces.
  std::erase_if(geo.segments_, [](const Geodesic::Segment& s) { return std::abs(s.to - s.from) <= 1e-15; });
  if (geo.segments_.empty()) geo.segments_.push_back({p.edge, p.offset, q.offset});
  return geo;
}

Geodesic SpaceModel::geodesic(const Point& p, const Point& q) const {
  require(p);
  require(q);
  if (points_equal(p, q)) throw degenerate_geodesic();
  Geodesic geo;
  geo.model_ = model_;
  geo.start_ = p;
  geo.end_ = q;
  switch (model_) {
    case Model::Plane:
      geo.length_ = hypot2(p.x - q.x, p.y - q.y);
      return geo;
    case Model::Disk:
      geo.length_ = disk_distance(as_complex(p), as_complex(q));
      return geo;
    case Model::Graph:
      return graph_geodesic(p, q);
  }
  return geo;
}

Point SpaceModel::midpoint(const Point& p, const Point& q) const {
  if (points_equal(p, q)) return p;
  Geodesic g = geodesic(p, q);
  return g.eval(g.length() / 2.0);
}

double SpaceModel::ball_measure(const Point& center, double radius) const {
  require(center);
  switch (model_) {
    case Model::Plane:
      return M_PI * radius * radius;
    case Model::Disk: {
      double sh = std::sinh(radius / 2.0);
      return 4.0 * M_PI * sh * sh;
    }
    case Model::Graph: {
      const auto& g = *graph_;
      double total = 0.0;
      for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        const GraphEdge& ge = g.edges[e];
        double du = graph_distance(center, Point::graph(e, 0.0));
        double dv = graph_distance(center, Point::graph(e, ge.length));
        std::vector<std::pair<double, double>> iv;
        if (center.edge == e)
          iv.emplace_back(center.offset - radius, center.offset + radius);
        if (radius - du > 0) iv.emplace_back(0.0, radius - du);
        if (radius - dv > 0) iv.emplace_back(ge.length - (radius - dv), ge.length);
        for (auto& [lo, hi] : iv) {
          lo = std::max(lo, 0.0);
          hi = std::min(hi, ge.length);
        }
        std::erase_if(iv, [](const auto& r) { return r.second <= r.first; });
        std::sort(iv.begin(), iv.end());
        double cursor = -1e300;
        for (auto& [lo, hi] : iv) {
          double a = std::max(lo, cursor);
          if (hi > a) total += hi - a;
          cursor = std::max(cursor, hi);
        }
      }
      return total;
    }
  }
  return 0.0;
}

SampleSet SpaceModel::sample_ball(const Point& center, double radius, int n,
                                  std::uint64_t seed) const {
  require(center);
  if (!(radius > 0)) throw std::invalid_argument("sample_ball radius must be positive");
  if (n < 1) throw std::invalid_argument("sample_ball needs n >= 1");
  Rng rng(seed);
  SampleSet out;
  out.points.reserve(n);
  switch (model_) {
    case Model::Plane: {
      for (int i = 0; i < n; ++i) {
        double r = radius * std::sqrt(rng.uniform());
        double a = 2.0 * M_PI * rng.uniform();
        out.points.push_back(Point::plane(center.x + r * std::cos(a), center.y + r * std::sin(a)));
      }
      return out;
    }
    case Model::Disk: {
      // Uniform w.r.t. hyperbolic area: area of B(0,s) is 4*pi*sinh^2(s/2).
      cplx c = as_complex(center);
      double sh = std::sinh(radius / 2.0);
      for (int i = 0; i < n; ++i) {
        double s = 2.0 * std::asinh(std::sqrt(rng.uniform()) * sh);
        double a = 2.0 * M_PI * rng.uniform();
        double er = std::tanh(s / 2.0);
        cplx w(er * std::cos(a), er * std::sin(a));
        cplx z = from_origin(c, w);
        // Guard the open-disk invariant against rounding at extreme radii.
        double az = std::abs(z);
        if (az >= 1.0 - kDiskMargin) z *= (1.0 - 2 * kDiskMargin) / az;
        out.points.push_back(Point::disk(z.real(), z.imag()));
      }
      return out;
    }
    case Model::Graph: {
      // Collect the ball's edge segments, then sample uniform by length.
      const auto& g = *graph_;
      struct Seg {
        int edge;
        double lo, hi;
      };
      std::vector<Seg> segs;
      double total = 0.0;
      double ecc = 0.0;  // distance to the farthest point of the graph
      for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        const GraphEdge& ge = g.edges[e];
        double du = graph_distance(center, Point::graph(e, 0.0));
        double dv = graph_distance(center, Point::graph(e, ge.length));
        // Farthest point on this edge (interior crossing of the two ramps).
        ecc = std::max(ecc, std::abs(du - dv) <= ge.length
                                ? (du + dv + ge.length) / 2.0
                                : std::min(du, dv) + ge.length);
        // d(center,(e,t)) = min(|t-c| if own edge, du + t, dv + len - t);
        // collect up to three sub-intervals where it is <= radius and merge.
        std::vector<std::pair<double, double>> iv;
        if (center.edge == e)
          iv.emplace_back(center.offset - radius, center.offset + radius);
        if (radius - du > 0) iv.emplace_back(0.0, radius - du);
        if (radius - dv > 0) iv.emplace_back(ge.length - (radius - dv), ge.length);
        for (auto& [lo, hi] : iv) {
          lo = std::max(lo, 0.0);
          hi = std::min(hi, ge.length);
        }
        std::erase_if(iv, [](const auto& r) { return r.second <= r.first; });
        std::sort(iv.begin(), iv.end());
        for (const auto& [lo, hi] : iv) {
          if (!segs.empty() && segs.back().edge == e && lo <= segs.back().hi + 1e-15) {
            segs.back().hi = std::max(segs.back().hi, hi);
          } else {
            segs.push_back({e, lo, hi});
          }
        }
      }
      for (const auto& s : segs) total += s.hi - s.lo;
      out.clipped = radius > ecc;
      if (segs.empty() || total <= 0) {
        out.points.assign(n, center);
        return out;
      }
      for (int i = 0; i < n; ++i) {
        double t = rng.uniform() * total;
        for (const auto& s : segs) {
          double len = s.hi - s.lo;
          if (t <= len || &s == &segs.back()) {
            out.points.push_back(Point::graph(s.edge, std::clamp(s.lo + t, s.lo, s.hi)));
            break;
          }
          t -= len;
        }
      }
      return out;
    }
  }
  return out;
}

}  // namespace fundom
