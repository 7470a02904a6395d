#ifndef FUNDOM_DOMAINS_HPP
#define FUNDOM_DOMAINS_HPP

#include <functional>
#include <string>

#include "fundom/netting.hpp"
#include "fundom/voronoi.hpp"

namespace fundom {

// Closed Dirichlet tri-state membership of y for the tile centered at x:
// margin against the nearest orbit point of x other than x itself.
TileMembership dirichlet_membership(const ActionSystem& action, const Point& x, const Point& y);

struct FundamentalSetReport {
  int samples{0};
  int covered{0};
  double coverage{0};
  std::vector<int> ball_counts;  // transporter counts per probe ball
  bool complete{true};
};

// Sampled covering and local-finiteness verification for a closed-set oracle.
FundamentalSetReport verify_fundamental_set(const ActionSystem& action,
                                            const std::function<bool(const Point&)>& oracle,
                                            const Window& window, int samples,
                                            std::uint64_t seed);

// Incidence graph of the closed tile cover: vertices are net points, edges
// join tiles with touching closures (detected by probing near bisector
// midpoints and closed under the enumerated action).
struct IncidenceGraph {
  int n{0};
  std::vector<std::pair<int, int>> edges;  // i < j
  // Canonical (rep-anchored) form of each edge; G-equivalent edges share it.
  std::vector<std::pair<int, int>> edge_canonical;
  std::vector<std::vector<int>> adjacency;  // incident edge ids per vertex
  std::vector<int> orbit;                   // vertex -> orbit id
  std::vector<int> rep_index;               // orbit -> representative vertex
  std::vector<GroupElement> from_rep;       // vertex -> element mapping rep to it
  int root_hint{0};                         // orbit near the window center
  bool connected{false};
  bool underprobed{false};

  int other_end(int edge_id, int v) const {
    const auto& e = edges[edge_id];
    return e.first == v ? e.second : e.first;
  }
};

IncidenceGraph incidence_graph(const ActionSystem& action, const Tessellation& tess,
                               const Window& window, int probes_per_pair, std::uint64_t seed,
                               double tau_adj = 1e-3);

// Combinatorial constructor for tests and simplicial inputs: orbits and
// canonical edge keys derived from explicit vertex maps (one per known group
// element, including the identity).
IncidenceGraph make_incidence_graph(int n, const std::vector<std::pair<int, int>>& edges,
                                    const std::vector<std::vector<int>>& element_vertex_maps);

// Strict fundamental set for the action on the vertices of the barycentric
// subdivision, computed by lifting a breadth-first maximal subtree of the
// quotient graph. S is the selected set of original vertices, one per orbit.
struct TreeLift {
  int vertex_orbits{0};
  int edge_orbits{0};
  std::vector<std::pair<int, int>> quotient_edges;  // vertex-orbit node, edge-orbit node
  std::vector<std::pair<int, int>> tree_edges;      // maximal subtree of the quotient
  std::vector<int> lifted_vertex;                   // vertex-orbit -> Gamma vertex
  std::vector<std::pair<int, int>> lifted_edges;    // edge-orbit -> concrete Gamma edge
  std::vector<int> S;
  bool strict{true};  // every orbit met exactly once (checked exhaustively)
};

class lift_failure : public std::runtime_error {
 public:
  explicit lift_failure(const std::string& what) : std::runtime_error(what) {}
};

TreeLift spanning_tree_lift(const IncidenceGraph& graph);

struct DomainReport {
  int samples{0};
  int disjointness_violations{0};
  int missed_samples{0};
  double coverage{0};
  std::vector<int> ball_counts;
  bool f_connected{false};
  bool r_subset_f{true};
  double closure_density{1.0};  // plane/disk: F-samples reaching Interior within 1e-3
  int net_size{0};
  int orbit_count{0};
  int s_size{0};
  std::vector<std::string> caveats;
};

struct FundamentalDomain {
  Net net;
  Tessellation tess;
  IncidenceGraph graph;
  TreeLift lift;
  std::vector<int> S;
  std::vector<char> in_S;  // indicator over net indices
  DomainReport report;

  // Open fundamental region / closed fundamental domain oracles.
  bool in_R(const Point& y) const;
  bool in_F(const Point& y) const;
};

struct DomainOptions {
  NettingOptions netting;
  int report_samples{10000};
  int probes_per_pair{8};
  int probe_balls{3};
  int ball_samples{200};
};

FundamentalDomain build_fundamental_domain(const ActionSystem& action, const Window& window,
                                           std::uint64_t seed, const DomainOptions& opts = {});

}  // namespace fundom

#endif  // FUNDOM_DOMAINS_HPP
