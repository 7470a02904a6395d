#ifndef FUNDOM_GEOMETRY_HPP
#define FUNDOM_GEOMETRY_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fundom {

// Shared absolute tolerance for point equality and all strict/non-strict
// distance comparisons downstream.
inline constexpr double kPointTol = 1e-9;
// Poincare disk points must stay strictly inside the unit circle.
inline constexpr double kDiskMargin = 1e-12;

enum class Model { Plane, Disk, Graph };

const char* model_name(Model m);

// A location in one of the three space models. Plane/disk use (x, y);
// graph points are (edge id, arclength offset from the edge's first vertex),
// with points at shared vertices comparing equal.
struct Point {
  Model model{Model::Plane};
  double x{0.0}, y{0.0};
  int edge{-1};
  double offset{0.0};

  static Point plane(double x, double y) { return Point{Model::Plane, x, y, -1, 0.0}; }
  static Point disk(double u, double v) { return Point{Model::Disk, u, v, -1, 0.0}; }
  static Point graph(int edge, double offset) { return Point{Model::Graph, 0, 0, edge, offset}; }
};

struct GraphEdge {
  int u{0}, v{0};
  double length{1.0};
};

struct Window {
  Point center;
  double radius{1.0};
};

class SpaceModel;

// Constant-speed parametrization of a shortest path: eval(t) is at distance
// t from start along the path, t in [0, length].
class Geodesic {
 public:
  Point start() const { return start_; }
  Point end() const { return end_; }
  double length() const { return length_; }
  Point eval(double t) const;

 private:
  friend class SpaceModel;
  Model model_{Model::Plane};
  Point start_, end_;
  double length_{0.0};
  // Graph path as (edge, from_offset, to_offset) segments, walked in order.
  struct Segment {
    int edge;
    double from, to;
  };
  std::vector<Segment> segments_;
};

struct SampleSet {
  std::vector<Point> points;
  bool clipped{false};  // graph ball truncated by graph extent
};

class model_mismatch : public std::runtime_error {
 public:
  explicit model_mismatch(const std::string& what) : std::runtime_error(what) {}
};

class degenerate_geodesic : public std::runtime_error {
 public:
  degenerate_geodesic() : std::runtime_error("geodesic endpoints coincide") {}
};

// A proper geodesic metric space: Euclidean plane, Poincare disk (curvature
// -1), or a finite connected metric graph with positive edge lengths.
class SpaceModel {
 public:
  static SpaceModel plane();
  static SpaceModel disk();
  static SpaceModel graph(int vertex_count, std::vector<GraphEdge> edges);

  Model model() const { return model_; }

  bool valid(const Point& p) const;
  void require(const Point& p) const;

  double distance(const Point& p, const Point& q) const;
  bool points_equal(const Point& p, const Point& q) const {
    return distance(p, q) <= kPointTol;
  }

  Geodesic geodesic(const Point& p, const Point& q) const;
  Point midpoint(const Point& p, const Point& q) const;

  // n deterministic samples from the metric ball B(center, radius); uniform
  // w.r.t. area (plane), hyperbolic area (disk), or length measure (graph).
  SampleSet sample_ball(const Point& center, double radius, int n, std::uint64_t seed) const;

  // Area (plane), hyperbolic area (disk), or covered edge length (graph) of
  // the metric ball, for scaling sample streams.
  double ball_measure(const Point& center, double radius) const;

  // Graph accessors (throw for non-graph models).
  int vertex_count() const;
  const std::vector<GraphEdge>& edges() const;
  Point vertex_point(int v) const;
  double vertex_distance(int a, int b) const;
  // Total edge length of the graph.
  double total_length() const;

 private:
  SpaceModel() = default;
  struct GraphData;
  Model model_{Model::Plane};
  std::shared_ptr<const GraphData> graph_;

  double graph_distance(const Point& p, const Point& q) const;
  Geodesic graph_geodesic(const Point& p, const Point& q) const;
};

// Euclidean helpers shared by plane computations.
double hypot2(double dx, double dy);

}  // namespace fundom

#endif  // FUNDOM_GEOMETRY_HPP
