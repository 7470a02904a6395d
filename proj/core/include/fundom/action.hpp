#ifndef FUNDOM_ACTION_HPP
#define FUNDOM_ACTION_HPP

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "fundom/geometry.hpp"

namespace fundom {

// 2x2 real matrix, row major.
struct Mat2 {
  double a{1}, b{0}, c{0}, d{1};
  Mat2 mul(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  std::array<double, 2> apply(double x, double y) const { return {a * x + b * y, c * x + d * y}; }
  double det() const { return a * d - b * c; }
  Mat2 inverse() const {
    double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  bool orthogonal(double tol = 1e-9) const;
};

// A structure-preserving map of one space model:
//  - plane: invertible affine map x -> A x + t (isometric iff A is orthogonal;
//    non-isometric maps are accepted for the properness counterexamples and
//    flagged, every module requiring isometries checks the flag);
//  - disk: Moebius map z -> (az+b)/(cz+d), optionally precomposed with
//    conjugation for orientation-reversing maps;
//  - graph: automorphism given by a vertex permutation preserving adjacency
//    and edge lengths (verified exactly at construction).
class Isometry {
 public:
  Isometry() = default;  // plane identity
  static Isometry plane_map(const Mat2& linear, double tx, double ty);
  static Isometry disk_mobius(std::complex<double> a, std::complex<double> b,
                              std::complex<double> c, std::complex<double> d,
                              bool conjugate = false);
  static Isometry graph_automorphism(const SpaceModel& space, std::vector<int> vertex_perm);
  static Isometry identity(const SpaceModel& space);

  Model model() const { return model_; }
  bool isometric() const { return isometric_; }

  Point apply(const SpaceModel& space, const Point& p) const;
  Isometry compose(const Isometry& inner) const;  // this after inner
  Isometry inverse() const;

  // Plane payload access (for exact enumeration and overlap tests).
  const Mat2& linear() const { return lin_; }
  double tx() const { return t_[0]; }
  double ty() const { return t_[1]; }

  // Spot-check distance preservation on random pairs; isometric() reflects
  // the result for plane maps. Graph maps are verified exactly instead.
  void verify_isometric(const SpaceModel& space, int pairs, std::uint64_t seed);

 private:
  Model model_{Model::Plane};
  bool isometric_{true};
  // Plane
  Mat2 lin_;
  std::array<double, 2> t_{0, 0};
  // Disk
  std::complex<double> ma_{1}, mb_{0}, mc_{0}, md_{1};
  bool conj_{false};
  // Graph
  std::vector<int> vperm_;
  std::vector<int> eperm_;       // induced edge map
  std::vector<bool> eflip_;      // image traversed against its orientation
  friend struct IsometryOps;
};

// A group element: the generator word that produced it (1-based indices,
// negative for inverses) and the cached composed map.
struct GroupElement {
  std::vector<int> word;
  Isometry map;
  bool is_identity_word() const { return word.empty(); }
};

enum class Guarantee { Exact, HeuristicDepth };

// Result of minimizing |A u + b| over the disk |u| <= r (used for overlap
// tests and witness construction under non-isometric plane maps).
struct TrustRegionResult {
  std::array<double, 2> u;
  double residual;
};
TrustRegionResult min_affine_residual(const Mat2& A, std::array<double, 2> b, double radius);

class ActionEnumerator;

struct OrbitEntry {
  GroupElement element;
  Point image;
  double displacement;
};

struct OrbitBall {
  std::vector<OrbitEntry> entries;
  bool complete{false};
};

// A group acting on a space: generating maps (closed under formal inverses),
// a base point, and an enumeration contract. Exact enumeration is available
// for plane crystallographic groups (point group + translation lattice) and
// finite graph actions; everything else runs a pruned breadth-first word
// search up to the configured depth and reports complete=false.
class ActionSystem {
 public:
  ActionSystem(SpaceModel space, std::vector<Isometry> generators, Point base_point,
               Guarantee guarantee, int heuristic_depth = 12);

  const SpaceModel& space() const { return space_; }
  const Point& base_point() const { return base_; }
  // Generators with formal inverses appended (indices 1..k, -1..-k).
  const std::vector<Isometry>& generators() const { return gens_; }
  int generator_count() const { return static_cast<int>(gens_.size()) / 2; }
  Guarantee guarantee() const { return guarantee_; }
  int heuristic_depth() const { return depth_; }
  bool complete_enumeration() const;
  bool isometric() const { return isometric_; }
  // Exact enumerators know the whole group is trivial/finite.
  std::optional<std::size_t> known_order() const;

  Point apply(const GroupElement& g, const Point& p) const { return g.map.apply(space_, p); }
  GroupElement identity_element() const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement word_element(const std::vector<int>& word) const;

  // All distinct group elements g with d(g x, y) <= r + tol, deduplicated by
  // action on a 3-point probe set. The workhorse behind the queries below.
  std::vector<GroupElement> mapping_near(const Point& x, const Point& y, double r) const;

  OrbitBall orbit_in_ball(const Point& x, double radius) const;
  std::vector<GroupElement> transporter(const Window& a, const Window& b) const;
  std::vector<GroupElement> stabilizer(const Point& x, double r_search) const;

  // Every materialized element; available for finite-closure and word-search
  // enumeration (throws for lattice-backed exact enumeration).
  std::vector<GroupElement> enumerated_elements() const;

  // Displacement of the largest generator at the base point.
  double max_generator_displacement() const { return max_gen_disp_; }

 private:
  SpaceModel space_;
  std::vector<Isometry> gens_;
  Point base_;
  Guarantee guarantee_;
  int depth_;
  bool isometric_{true};
  double max_gen_disp_{0};
  std::shared_ptr<const ActionEnumerator> enumerator_;
};

}  // namespace fundom

#endif  // FUNDOM_ACTION_HPP
