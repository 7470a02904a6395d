#include "fundom/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "fundom/rng.hpp"

namespace fundom {

using cplx = std::complex<double>;

bool Mat2::orthogonal(double tol) const {
  // A^T A = I entrywise.
  double aa = a * a + c * c, bb = b * b + d * d, ab = a * b + c * d;
  return std::abs(aa - 1) <= tol && std::abs(bb - 1) <= tol && std::abs(ab) <= tol;
}

// ---------------------------------------------------------------------------
// Isometry
// ---------------------------------------------------------------------------

Isometry Isometry::plane_map(const Mat2& linear, double tx, double ty) {
  if (std::abs(linear.det()) < 1e-12)
    throw std::invalid_argument("plane map must be invertible");
  Isometry g;
  g.model_ = Model::Plane;
  g.lin_ = linear;
  g.t_ = {tx, ty};
  g.isometric_ = linear.orthogonal();
  return g;
}

Isometry Isometry::disk_mobius(cplx a, cplx b, cplx c, cplx d, bool conjugate) {
  cplx det = a * d - b * c;
  if (std::abs(det) < 1e-14) throw std::invalid_argument("Moebius map must be invertible");
  cplx s = std::sqrt(det);
  Isometry g;
  g.model_ = Model::Disk;
  g.ma_ = a / s;
  g.mb_ = b / s;
  g.mc_ = c / s;
  g.md_ = d / s;
  g.conj_ = conjugate;
  g.isometric_ = true;  // spot-checked by verify_isometric
  return g;
}

Isometry Isometry::graph_automorphism(const SpaceModel& space, std::vector<int> vertex_perm) {
  if (space.model() != Model::Graph) throw model_mismatch("graph automorphism needs graph model");
  int nv = space.vertex_count();
  if (static_cast<int>(vertex_perm.size()) != nv)
    throw std::invalid_argument("vertex permutation has wrong size");
  std::vector<int> seen(nv, 0);
  for (int v : vertex_perm) {
    if (v < 0 || v >= nv || seen[v]++) throw std::invalid_argument("not a permutation");
  }
  const auto& edges = space.edges();
  Isometry g;
  g.model_ = Model::Graph;
  g.vperm_ = std::move(vertex_perm);
  g.eperm_.assign(edges.size(), -1);
  g.eflip_.assign(edges.size(), false);
  // Each edge must map to an edge of equal length between the image vertices;
  // ambiguities (parallel equal-length edges) resolve to the lowest id.
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    int iu = g.vperm_[edges[e].u], iv = g.vperm_[edges[e].v];
    for (int f = 0; f < static_cast<int>(edges.size()); ++f) {
      if (std::abs(edges[f].length - edges[e].length) > 1e-12) continue;
      if (edges[f].u == iu && edges[f].v == iv) {
        g.eperm_[e] = f;
        g.eflip_[e] = false;
        break;
      }
      if (edges[f].u == iv && edges[f].v == iu) {
        g.eperm_[e] = f;
        g.eflip_[e] = true;
        break;
      }
    }
    if (g.eperm_[e] < 0)
      throw std::invalid_argument("vertex permutation does not preserve the edge structure");
  }
  g.isometric_ = true;
  return g;
}

Isometry Isometry::identity(const SpaceModel& space) {
  switch (space.model()) {
    case Model::Plane:
      return plane_map(Mat2{}, 0, 0);
    case Model::Disk:
      return disk_mobius(1, 0, 0, 1);
    case Model::Graph: {
      std::vector<int> id(space.vertex_count());
      for (int v = 0; v < space.vertex_count(); ++v) id[v] = v;
      return graph_automorphism(space, std::move(id));
    }
  }
  throw std::logic_error("unreachable");
}

Point Isometry::apply(const SpaceModel& space, const Point& p) const {
  if (p.model != model_) throw model_mismatch("map applied to point of another model");
  switch (model_) {
    case Model::Plane: {
      auto v = lin_.apply(p.x, p.y);
      return Point::plane(v[0] + t_[0], v[1] + t_[1]);
    }
    case Model::Disk: {
      cplx z(p.x, p.y);
      if (conj_) z = std::conj(z);
      cplx w = (ma_ * z + mb_) / (mc_ * z + md_);
      double aw = std::abs(w);
      if (aw >= 1.0 - kDiskMargin) w *= (1.0 - 2 * kDiskMargin) / aw;
      return Point::disk(w.real(), w.imag());
    }
    case Model::Graph: {
      const auto& edges = space.edges();
      int f = eperm_[p.edge];
      double off = eflip_[p.edge] ? edges[f].length - p.offset : p.offset;
      return Point::graph(f, off);
    }
  }
  throw std::logic_error("unreachable");
}

Isometry Isometry::compose(const Isometry& inner) const {
  if (inner.model_ != model_) throw model_mismatch("composing maps of different models");
  Isometry g;
  g.model_ = model_;
  g.isometric_ = isometric_ && inner.isometric_;
  switch (model_) {
    case Model::Plane: {
      g.lin_ = lin_.mul(inner.lin_);
      auto v = lin_.apply(inner.t_[0], inner.t_[1]);
      g.t_ = {v[0] + t_[0], v[1] + t_[1]};
      return g;
    }
    case Model::Disk: {
      // this(z) = M sigma(z), inner(z) = N tau(z);
      // this(inner(z)) = (M sigma(N)) (sigma tau)(z).
      cplx na = inner.ma_, nb = inner.mb_, nc = inner.mc_, nd = inner.md_;
      if (conj_) {
        na = std::conj(na);
        nb = std::conj(nb);
        nc = std::conj(nc);
        nd = std::conj(nd);
      }
      g.ma_ = ma_ * na + mb_ * nc;
      g.mb_ = ma_ * nb + mb_ * nd;
      g.mc_ = mc_ * na + md_ * nc;
      g.md_ = mc_ * nb + md_ * nd;
      g.conj_ = conj_ != inner.conj_;
      return g;
    }
    case Model::Graph: {
      g.vperm_.resize(vperm_.size());
      for (std::size_t v = 0; v < vperm_.size(); ++v) g.vperm_[v] = vperm_[inner.vperm_[v]];
      g.eperm_.resize(eperm_.size());
      g.eflip_.resize(eperm_.size());
      for (std::size_t e = 0; e < eperm_.size(); ++e) {
        int mid = inner.eperm_[e];
        g.eperm_[e] = eperm_[mid];
        g.eflip_[e] = inner.eflip_[e] != eflip_[mid];
      }
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

Isometry Isometry::inverse() const {
  Isometry g;
  g.model_ = model_;
  g.isometric_ = isometric_;
  switch (model_) {
    case Model::Plane: {
      g.lin_ = lin_.inverse();
      auto v = g.lin_.apply(t_[0], t_[1]);
      g.t_ = {-v[0], -v[1]};
      return g;
    }
    case Model::Disk: {
      if (!conj_) {
        g.ma_ = md_;
        g.mb_ = -mb_;
        g.mc_ = -mc_;
        g.md_ = ma_;
        g.conj_ = false;
      } else {
        // (M conj)^-1 = conj(M^-1) conj.
        g.ma_ = std::conj(md_);
        g.mb_ = std::conj(-mb_);
        g.mc_ = std::conj(-mc_);
        g.md_ = std::conj(ma_);
        g.conj_ = true;
      }
      return g;
    }
    case Model::Graph: {
      g.vperm_.resize(vperm_.size());
      for (std::size_t v = 0; v < vperm_.size(); ++v) g.vperm_[vperm_[v]] = static_cast<int>(v);
      g.eperm_.resize(eperm_.size());
      g.eflip_.resize(eperm_.size());
      for (std::size_t e = 0; e < eperm_.size(); ++e) {
        g.eperm_[eperm_[e]] = static_cast<int>(e);
        g.eflip_[eperm_[e]] = eflip_[e];
      }
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

void Isometry::verify_isometric(const SpaceModel& space, int pairs, std::uint64_t seed) {
  if (model_ == Model::Graph) return;  // verified exactly at construction
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    Point p, q;
    if (model_ == Model::Plane) {
      p = Point::plane(rng.uniform(-3, 3), rng.uniform(-3, 3));
      q = Point::plane(rng.uniform(-3, 3), rng.uniform(-3, 3));
    } else {
      double r1 = 0.9 * std::sqrt(rng.uniform()), a1 = 2 * M_PI * rng.uniform();
      double r2 = 0.9 * std::sqrt(rng.uniform()), a2 = 2 * M_PI * rng.uniform();
      p = Point::disk(r1 * std::cos(a1), r1 * std::sin(a1));
      q = Point::disk(r2 * std::cos(a2), r2 * std::sin(a2));
    }
    Point gp = apply(space, p), gq = apply(space, q);
    if (!space.valid(gp) || !space.valid(gq))
      throw std::invalid_argument("map does not preserve the space");
    worst = std::max(worst, std::abs(space.distance(gp, gq) - space.distance(p, q)));
  }
  isometric_ = worst <= kPointTol && (model_ != Model::Plane || lin_.orthogonal());
}

// ---------------------------------------------------------------------------
// Trust-region helper: min over |u| <= r of |A u + b| (2x2).
// ---------------------------------------------------------------------------

TrustRegionResult min_affine_residual(const Mat2& A, std::array<double, 2> b, double radius) {
  auto norm = [](double x, double y) { return std::sqrt(x * x + y * y); };
  auto residual_at = [&](double ux, double uy) {
    auto v = A.apply(ux, uy);
    return norm(v[0] + b[0], v[1] + b[1]);
  };
  TrustRegionResult best{{0, 0}, residual_at(0, 0)};
  if (std::abs(A.det()) > 1e-14) {
    Mat2 inv = A.inverse();
    auto u = inv.apply(-b[0], -b[1]);
    if (norm(u[0], u[1]) <= radius) return {{u[0], u[1]}, 0.0};
  }
  // Boundary minimum via the secular equation for (A^T A + mu I) u = -A^T b.
  double m11 = A.a * A.a + A.c * A.c;
  double m12 = A.a * A.b + A.c * A.d;
  double m22 = A.b * A.b + A.d * A.d;
  double g1 = A.a * b[0] + A.c * b[1];
  double g2 = A.b * b[0] + A.d * b[1];
  double tr = m11 + m22, dt = m11 * m22 - m12 * m12;
  double disc = std::sqrt(std::max(0.0, tr * tr / 4 - dt));
  double lmin = tr / 2 - disc;
  auto u_of_mu = [&](double mu) {
    double a11 = m11 + mu, a22 = m22 + mu;
    double det = a11 * a22 - m12 * m12;
    return std::array<double, 2>{(-g1 * a22 + g2 * m12) / det, (g1 * m12 - g2 * a11) / det};
  };
  double glen = norm(g1, g2);
  if (glen > 1e-13) {
    double lo = std::max(0.0, -lmin) + 1e-15;
    double hi = std::max(lo * 2 + 1e-12, glen / radius + tr + 1.0);
    for (int i = 0; i < 200; ++i) {
      auto u = u_of_mu(hi);
      if (norm(u[0], u[1]) < radius) break;
      hi *= 2;
    }
    for (int i = 0; i < 120; ++i) {
      double mid = 0.5 * (lo + hi);
      auto u = u_of_mu(mid);
      (norm(u[0], u[1]) > radius ? lo : hi) = mid;
    }
    auto u = u_of_mu(hi);
    double n = norm(u[0], u[1]);
    if (n > 0) {
      u[0] *= radius / n;
      u[1] *= radius / n;
    }
    double res = residual_at(u[0], u[1]);
    if (res < best.residual) best = {{u[0], u[1]}, res};
  } else {
    // Hard case: gradient vanishes; take the small-eigenvalue direction.
    double ex, ey;
    if (std::abs(m12) > 1e-15) {
      ex = lmin - m22;
      ey = m12;
    } else if (m11 <= m22) {
      ex = 1;
      ey = 0;
    } else {
      ex = 0;
      ey = 1;
    }
    double n = norm(ex, ey);
    for (double s : {radius / n, -radius / n}) {
      double res = residual_at(ex * s, ey * s);
      if (res < best.residual) best = {{ex * s, ey * s}, res};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Enumerators
// ---------------------------------------------------------------------------

namespace {

std::vector<int> repeat_word(const std::vector<int>& w, int times) {
  std::vector<int> out;
  if (times == 0) return out;
  std::vector<int> unit;
  if (times < 0) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) unit.push_back(-*it);
    times = -times;
  } else {
    unit = w;
  }
  out.reserve(unit.size() * static_cast<std::size_t>(times));
  for (int i = 0; i < times; ++i) out.insert(out.end(), unit.begin(), unit.end());
  return out;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

class ActionEnumerator {
 public:
  virtual ~ActionEnumerator() = default;
  virtual bool complete() const = 0;
  virtual std::optional<std::size_t> order() const { return std::nullopt; }
  // All distinct g with d(g x, y) <= r + kPointTol.
  virtual std::vector<GroupElement> mapping_near(const ActionSystem& sys, const Point& x,
                                                 const Point& y, double r) const = 0;
  // Every materialized element (finite closure / word-limited search only).
  virtual std::vector<GroupElement> all_elements(const ActionSystem& sys) const {
    throw std::logic_error("all_elements unsupported by this enumerator");
  }
};

namespace {

// --- Exact enumerator for plane crystallographic groups --------------------
//
// Decomposes the group as a finite union of cosets Lambda.(O, t_O), where
// Lambda is the translation lattice and O runs over the finite point group.
// Both are discovered from bounded generator words and then verified
// (normality, membership of every discovered translation), after which ball
// queries reduce to exact lattice-point enumeration.
class CrystallographicEnumerator : public ActionEnumerator {
 public:
  CrystallographicEnumerator(const SpaceModel& space, const std::vector<Isometry>& gens) {
    struct Node {
      Isometry map;
      std::vector<int> word;
    };
    // Closure of the orthogonal parts caps the number of cosets.
    // Breadth-first products of generators up to a bounded word length.
    std::vector<Node> frontier{{Isometry::identity(space), {}}};
    std::vector<Node> elements = frontier;
    auto same_map = [](const Isometry& g, const Isometry& h) {
      const Mat2 &a = g.linear(), &b = h.linear();
      return std::abs(a.a - b.a) + std::abs(a.b - b.b) + std::abs(a.c - b.c) +
                     std::abs(a.d - b.d) <=
                 4e-9 &&
             std::abs(g.tx() - h.tx()) + std::abs(g.ty() - h.ty()) <= 2e-9;
    };
    const int kWordLen = 6;
    const std::size_t kCap = 4000;
    int ngens = static_cast<int>(gens.size()) / 2;
    for (int len = 1; len <= kWordLen && elements.size() < kCap; ++len) {
      std::vector<Node> next;
      for (const auto& node : frontier) {
        for (int i = 0; i < 2 * ngens; ++i) {
          int letter = (i < ngens) ? i + 1 : -(i - ngens + 1);
          Isometry m = gens[i].compose(node.map);
          // Keep the exploration bounded: only short translations matter for
          // lattice discovery and coset representatives.
          if (std::abs(m.tx()) > 64 || std::abs(m.ty()) > 64) continue;
          bool known = false;
          for (const auto& e : elements)
            if (same_map(e.map, m)) {
              known = true;
              break;
            }
          if (known) continue;
          Node nn{m, concat({letter}, node.word)};
          elements.push_back(nn);
          next.push_back(std::move(nn));
          if (elements.size() >= kCap) break;
        }
        if (elements.size() >= kCap) break;
      }
      frontier = std::move(next);
    }

    // Point group = distinct orthogonal parts; keep the shortest coset word.
    auto same_lin = [](const Mat2& a, const Mat2& b) {
      return std::abs(a.a - b.a) + std::abs(a.b - b.b) + std::abs(a.c - b.c) +
                 std::abs(a.d - b.d) <=
             4e-9;
    };
    for (const auto& e : elements) {
      bool found = false;
      for (auto& c : cosets_)
        if (same_lin(c.map.linear(), e.map.linear())) {
          found = true;
          break;
        }
      if (!found) cosets_.push_back({e.map, e.word});
      if (cosets_.size() > 64)
        throw std::invalid_argument(
            "point group closure exceeds 64 elements; not a plane crystallographic group");
    }
    // The orthogonal parts must form a group or the coset decomposition is
    // incomplete (would need longer discovery words).
    for (const auto& ci : cosets_) {
      for (const auto& cj : cosets_) {
        Mat2 prod = ci.map.linear().mul(cj.map.linear());
        bool found = false;
        for (const auto& ck : cosets_)
          if (same_lin(ck.map.linear(), prod)) {
            found = true;
            break;
          }
        if (!found)
          throw std::invalid_argument(
              "point group not closed within discovery depth; cannot certify exact enumeration");
      }
    }

    // Translation lattice from the pure translations among the elements.
    for (const auto& e : elements) {
      if (!same_lin(e.map.linear(), Mat2{})) continue;
      if (std::abs(e.map.tx()) + std::abs(e.map.ty()) <= 1e-9) continue;
      add_lattice_vector({e.map.tx(), e.map.ty()}, e.word);
    }
    // Normality: O b must stay in the lattice for every point-group element.
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (const auto& c : cosets_) {
        for (std::size_t i = 0; i < basis_.size(); ++i) {
          auto v = c.map.linear().apply(basis_[i].x, basis_[i].y);
          if (!in_lattice(v[0], v[1])) {
            std::vector<int> w =
                concat(concat(c.word, basis_[i].word), repeat_word(c.word, -1));
            add_lattice_vector({v[0], v[1]}, w);
            changed = true;
          }
        }
      }
      if (!changed) break;
      if (pass == 7) throw std::invalid_argument("translation lattice failed to stabilize");
    }
    // Reduce coset translations modulo the lattice to keep query boxes small.
    for (auto& c : cosets_) reduce_coset(c);
    order_ = basis_.empty() ? std::optional<std::size_t>(cosets_.size()) : std::nullopt;
  }

  bool complete() const override { return true; }
  std::optional<std::size_t> order() const override { return order_; }

  std::vector<GroupElement> mapping_near(const ActionSystem& sys, const Point& x, const Point& y,
                                         double r) const override {
    std::vector<GroupElement> out;
    const double rr = r + kPointTol;
    for (const auto& c : cosets_) {
      auto ox = c.map.linear().apply(x.x, x.y);
      double mx = y.x - (ox[0] + c.map.tx());
      double my = y.y - (ox[1] + c.map.ty());
      // Lattice points within rr of (mx, my).
      if (basis_.empty()) {
        if (hypot2(mx, my) <= rr) out.push_back(make_element(sys, c, 0, 0));
        continue;
      }
      if (basis_.size() == 1) {
        const auto& b = basis_[0];
        double den = b.x * b.x + b.y * b.y;
        double k0 = (mx * b.x + my * b.y) / den;
        int span = static_cast<int>(std::ceil(rr / std::sqrt(den))) + 1;
        for (int k = static_cast<int>(std::floor(k0)) - span;
             k <= static_cast<int>(std::ceil(k0)) + span; ++k) {
          if (hypot2(k * b.x - mx, k * b.y - my) <= rr)
            out.push_back(make_element(sys, c, k, 0));
        }
        continue;
      }
      const auto& b1 = basis_[0];
      const auto& b2 = basis_[1];
      double det = b1.x * b2.y - b1.y * b2.x;
      double c1 = (mx * b2.y - my * b2.x) / det;
      double c2 = (my * b1.x - mx * b1.y) / det;
      double h1 = rr * hypot2(b2.y / det, b2.x / det) + 1;
      double h2 = rr * hypot2(b1.y / det, b1.x / det) + 1;
      for (int i = static_cast<int>(std::floor(c1 - h1)); i <= std::ceil(c1 + h1); ++i) {
        for (int j = static_cast<int>(std::floor(c2 - h2)); j <= std::ceil(c2 + h2); ++j) {
          if (hypot2(i * b1.x + j * b2.x - mx, i * b1.y + j * b2.y - my) <= rr)
            out.push_back(make_element(sys, c, i, j));
        }
      }
    }
    return out;
  }

 private:
  struct Coset {
    Isometry map;  // (O, t0)
    std::vector<int> word;
  };
  struct Basis {
    double x, y;
    std::vector<int> word;
  };
  std::vector<Coset> cosets_;
  std::vector<Basis> basis_;  // 0, 1, or 2 reduced vectors
  std::optional<std::size_t> order_;

  bool in_lattice(double x, double y) const {
    double rx = x, ry = y;
    reduce(rx, ry, nullptr, nullptr);
    return hypot2(rx, ry) <= 1e-9;
  }

  // Reduce (x,y) modulo the lattice; optionally report the coefficients.
  void reduce(double& x, double& y, int* k1, int* k2) const {
    if (k1) *k1 = 0;
    if (k2) *k2 = 0;
    if (basis_.empty()) return;
    if (basis_.size() == 1) {
      const auto& b = basis_[0];
      double den = b.x * b.x + b.y * b.y;
      int k = static_cast<int>(std::lround((x * b.x + y * b.y) / den));
      x -= k * b.x;
      y -= k * b.y;
      if (k1) *k1 = k;
      return;
    }
    const auto& b1 = basis_[0];
    const auto& b2 = basis_[1];
    double det = b1.x * b2.y - b1.y * b2.x;
    int i = static_cast<int>(std::lround((x * b2.y - y * b2.x) / det));
    int j = static_cast<int>(std::lround((y * b1.x - x * b1.y) / det));
    x -= i * b1.x + j * b2.x;
    y -= i * b1.y + j * b2.y;
    if (k1) *k1 = i;
    if (k2) *k2 = j;
  }

  void add_lattice_vector(std::pair<double, double> v, std::vector<int> word) {
    double x = v.first, y = v.second;
    int k1 = 0, k2 = 0;
    reduce(x, y, &k1, &k2);
    if (hypot2(x, y) <= 1e-9) return;
    std::vector<int> w = word;
    if (!basis_.empty() && k1 != 0) w = concat(w, repeat_word(basis_[0].word, -k1));
    if (basis_.size() > 1 && k2 != 0) w = concat(w, repeat_word(basis_[1].word, -k2));
    basis_.push_back({x, y, std::move(w)});
    if (basis_.size() > 2) shrink_basis();
    lagrange_reduce();
  }

  // Keep the two shortest independent vectors.
  void shrink_basis() {
    std::sort(basis_.begin(), basis_.end(),
              [](const Basis& a, const Basis& b) { return hypot2(a.x, a.y) < hypot2(b.x, b.y); });
    std::vector<Basis> keep;
    keep.push_back(basis_[0]);
    for (std::size_t i = 1; i < basis_.size() && keep.size() < 2; ++i) {
      double det = keep[0].x * basis_[i].y - keep[0].y * basis_[i].x;
      if (std::abs(det) > 1e-9) keep.push_back(basis_[i]);
    }
    // Any leftover vector must be a combination; if it is not representable,
    // the stabilization loop will re-add it.
    std::vector<Basis> rest(basis_.begin(), basis_.end());
    basis_ = keep;
    for (const auto& v : rest) {
      double x = v.x, y = v.y;
      reduce(x, y, nullptr, nullptr);
      if (hypot2(x, y) > 1e-9) {
        // Finer lattice than the current basis spans: rebuild via Gauss-like
        // swap (replace the longer basis vector and retry).
        basis_.pop_back();
        basis_.push_back(v);
        lagrange_reduce();
        x = v.x;
        y = v.y;
      }
    }
  }

  void lagrange_reduce() {
    if (basis_.size() < 2) return;
    for (int it = 0; it < 64; ++it) {
      if (hypot2(basis_[0].x, basis_[0].y) > hypot2(basis_[1].x, basis_[1].y))
        std::swap(basis_[0], basis_[1]);
      const auto& b1 = basis_[0];
      auto& b2 = basis_[1];
      double den = b1.x * b1.x + b1.y * b1.y;
      int k = static_cast<int>(std::lround((b2.x * b1.x + b2.y * b1.y) / den));
      if (k == 0) break;
      b2.x -= k * b1.x;
      b2.y -= k * b1.y;
      b2.word = concat(b2.word, repeat_word(b1.word, -k));
    }
  }

  void reduce_coset(Coset& c) {
    double x = c.map.tx(), y = c.map.ty();
    int k1 = 0, k2 = 0;
    reduce(x, y, &k1, &k2);
    if (k1 == 0 && k2 == 0) return;
    std::vector<int> w;
    if (k1 != 0) w = concat(w, repeat_word(basis_[0].word, -k1));
    if (basis_.size() > 1 && k2 != 0) w = concat(w, repeat_word(basis_[1].word, -k2));
    c.word = concat(w, c.word);
    c.map = Isometry::plane_map(c.map.linear(), x, y);
  }

  GroupElement make_element(const ActionSystem& sys, const Coset& c, int i, int j) const {
    double tx = c.map.tx(), ty = c.map.ty();
    std::vector<int> w = c.word;
    if (!basis_.empty() && i != 0) {
      tx += i * basis_[0].x;
      ty += i * basis_[0].y;
      w = concat(repeat_word(basis_[0].word, i), w);
    }
    if (basis_.size() > 1 && j != 0) {
      tx += j * basis_[1].x;
      ty += j * basis_[1].y;
      w = concat(repeat_word(basis_[1].word, j), w);
    }
    (void)sys;
    return GroupElement{std::move(w), Isometry::plane_map(c.map.linear(), tx, ty)};
  }
};

// --- Exact enumerator for finite groups (graph automorphisms) --------------
class FiniteClosureEnumerator : public ActionEnumerator {
 public:
  FiniteClosureEnumerator(const SpaceModel& space, const std::vector<Isometry>& gens,
                          const std::vector<Point>& probes) {
    std::vector<GroupElement> frontier{{std::vector<int>{}, Isometry::identity(space)}};
    elements_ = frontier;
    int ngens = static_cast<int>(gens.size()) / 2;
    const std::size_t kCap = 20000;
    while (!frontier.empty()) {
      std::vector<GroupElement> next;
      for (const auto& node : frontier) {
        for (int i = 0; i < 2 * ngens; ++i) {
          int letter = (i < ngens) ? i + 1 : -(i - ngens + 1);
          Isometry m = gens[i].compose(node.map);
          bool known = false;
          for (const auto& e : elements_)
            if (same_action(space, e.map, m, probes)) {
              known = true;
              break;
            }
          if (known) continue;
          GroupElement g{concat({letter}, node.word), m};
          elements_.push_back(g);
          next.push_back(std::move(g));
          if (elements_.size() > kCap)
            throw std::invalid_argument(
                "group closure exceeded cap; exact enumeration needs a finite action");
        }
      }
      frontier = std::move(next);
    }
  }

  static bool same_action(const SpaceModel& space, const Isometry& g, const Isometry& h,
                          const std::vector<Point>& probes) {
    for (const auto& p : probes)
      if (space.distance(g.apply(space, p), h.apply(space, p)) > kPointTol) return false;
    return true;
  }

  bool complete() const override { return true; }
  std::optional<std::size_t> order() const override { return elements_.size(); }

  std::vector<GroupElement> mapping_near(const ActionSystem& sys, const Point& x, const Point& y,
                                         double r) const override {
    std::vector<GroupElement> out;
    for (const auto& e : elements_)
      if (sys.space().distance(e.map.apply(sys.space(), x), y) <= r + kPointTol)
        out.push_back(e);
    return out;
  }

  std::vector<GroupElement> all_elements(const ActionSystem&) const override { return elements_; }

 private:
  std::vector<GroupElement> elements_;
};

// --- Heuristic breadth-first word search ------------------------------------
//
// Explores reduced words up to the configured depth, deduplicating by action
// on the probe set. Two prunes: the displacement rule (a word is abandoned
// when d(w o, o) > R + D (L - |w|), D = max generator displacement, sound by
// the triangle inequality) and an adaptive effective depth derived from the
// observed per-letter displacement growth. Both leave complete() = false.
class WordSearchEnumerator : public ActionEnumerator {
 public:
  WordSearchEnumerator(SpaceModel space, const std::vector<Isometry>& gens,
                       const Point& base, int depth, bool isometric,
                       const std::vector<Point>& probes)
      : space_(std::move(space)), gens_(gens), base_(base), depth_(depth), isometric_(isometric),
        probes_(probes) {
    int ngens = static_cast<int>(gens_.size()) / 2;
    max_disp_ = 0;
    for (const auto& g : gens_) max_disp_ = std::max(max_disp_, displacement(g));
    // Estimated per-letter growth from reduced two-letter words; disabled
    // (<= 0) when any product shrinks displacement, e.g. torsion elements.
    growth_ = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2 * ngens; ++i) {
      for (int j = 0; j < 2 * ngens; ++j) {
        if (reduces(i, j, ngens)) continue;
        double d2 = displacement(gens_[i].compose(gens_[j]));
        growth_ = std::min(growth_, d2 - displacement(gens_[j]));
      }
    }
    if (!std::isfinite(growth_)) growth_ = 0;
  }

  bool complete() const override { return false; }

  std::vector<GroupElement> mapping_near(const ActionSystem& sys, const Point& x, const Point& y,
                                         double r) const override {
    // Transfer the target radius to a displacement bound at the base point.
    double rbase = isometric_
                       ? r + space_.distance(base_, x) + space_.distance(base_, y)
                       : std::numeric_limits<double>::infinity();
    auto all = search(rbase);
    std::vector<GroupElement> out;
    for (const auto& e : all)
      if (space_.distance(e.map.apply(space_, x), y) <= r + kPointTol) out.push_back(e);
    (void)sys;
    return out;
  }

  std::vector<GroupElement> all_elements(const ActionSystem&) const override {
    return search(std::numeric_limits<double>::infinity());
  }

 private:
  SpaceModel space_;
  std::vector<Isometry> gens_;
  Point base_;
  int depth_;
  bool isometric_;
  std::vector<Point> probes_;
  double max_disp_{0};
  double growth_{0};

  static bool reduces(int i, int j, int ngens) {
    // letter(i) cancels letter(j)? i < ngens is generator i+1, else inverse.
    int a = (i < ngens) ? i + 1 : -(i - ngens + 1);
    int b = (j < ngens) ? j + 1 : -(j - ngens + 1);
    return a == -b;
  }

  double displacement(const Isometry& g) const {
    return space_.distance(g.apply(space_, base_), base_);
  }

  // Dedup key: probe images quantized to a 1e-6 grid and hashed. Distinct
  // words producing the same element land on identical doubles up to last-ulp
  // rounding, far below the grid, so equal elements collide reliably.
  std::uint64_t key_of(const Isometry& m) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](long long v) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    };
    for (const auto& p : probes_) {
      Point ip = m.apply(space_, p);
      if (space_.model() == Model::Graph) {
        mix(ip.edge);
        mix(std::llround(ip.offset * 1e6));
      } else {
        mix(std::llround(ip.x * 1e6));
        mix(std::llround(ip.y * 1e6));
      }
    }
    return h;
  }

  bool same_action(const Isometry& a, const Isometry& b) const {
    for (const auto& p : probes_)
      if (space_.distance(a.apply(space_, p), b.apply(space_, p)) > kPointTol) return false;
    return true;
  }

  std::vector<GroupElement> search(double rbase) const {
    int ngens = static_cast<int>(gens_.size()) / 2;
    int depth = depth_;
    if (isometric_ && growth_ > 1e-9 && std::isfinite(rbase))
      depth = std::min(depth, static_cast<int>(std::ceil(rbase / growth_)) + 2);
    std::vector<GroupElement> elements{{std::vector<int>{}, Isometry::identity(space_)}};
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
    seen[key_of(elements[0].map)].push_back(0);
    std::vector<std::size_t> frontier{0};
    for (int len = 1; len <= depth && !frontier.empty(); ++len) {
      std::vector<std::size_t> next;
      for (std::size_t idx : frontier) {
        GroupElement node = elements[idx];
        int last = node.word.empty() ? 0 : node.word.front();
        for (int i = 0; i < 2 * ngens; ++i) {
          int letter = (i < ngens) ? i + 1 : -(i - ngens + 1);
          if (letter == -last) continue;  // immediate backtrack
          Isometry m = gens_[i].compose(node.map);
          if (isometric_ && std::isfinite(rbase)) {
            double disp = displacement(m);
            if (disp > rbase + max_disp_ * (depth - len) + kPointTol) continue;
          }
          auto& bucket = seen[key_of(m)];
          bool known = false;
          for (std::size_t k : bucket)
            if (same_action(elements[k].map, m)) {
              known = true;
              break;
            }
          if (known) continue;
          elements.push_back(GroupElement{concat({letter}, node.word), m});
          bucket.push_back(elements.size() - 1);
          next.push_back(elements.size() - 1);
        }
      }
      frontier = std::move(next);
    }
    return elements;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// ActionSystem
// ---------------------------------------------------------------------------

namespace {

std::vector<Point> make_probes(const SpaceModel& space, const Point& base) {
  // Base point plus two perturbations; dedup by action on these three.
  SampleSet s = space.sample_ball(base, space.model() == Model::Disk ? 0.4 : 0.7, 2, 20240001);
  std::vector<Point> probes{base};
  probes.insert(probes.end(), s.points.begin(), s.points.end());
  return probes;
}

}  // namespace

ActionSystem::ActionSystem(SpaceModel space, std::vector<Isometry> generators, Point base_point,
                           Guarantee guarantee, int heuristic_depth)
    : space_(std::move(space)), base_(base_point), guarantee_(guarantee),
      depth_(heuristic_depth) {
  space_.require(base_);
  if (generators.empty()) guarantee_ = Guarantee::Exact;  // trivial group
  std::uint64_t seed = 771;
  for (auto& g : generators) {
    if (g.model() != space_.model()) throw model_mismatch("generator model mismatch");
    g.verify_isometric(space_, 100, seed++);
    isometric_ = isometric_ && g.isometric();
  }
  gens_ = generators;
  for (const auto& g : generators) gens_.push_back(g.inverse());
  for (const auto& g : gens_)
    max_gen_disp_ = std::max(max_gen_disp_, space_.distance(g.apply(space_, base_), base_));

  auto probes = make_probes(space_, base_);
  if (guarantee_ == Guarantee::Exact) {
    switch (space_.model()) {
      case Model::Plane:
        if (!isometric_)
          throw std::invalid_argument("exact enumeration requires isometric generators");
        if (generators.empty()) {
          enumerator_ = std::make_shared<FiniteClosureEnumerator>(space_, gens_, probes);
        } else {
          enumerator_ = std::make_shared<CrystallographicEnumerator>(space_, gens_);
        }
        break;
      case Model::Graph:
        enumerator_ = std::make_shared<FiniteClosureEnumerator>(space_, gens_, probes);
        break;
      case Model::Disk:
        if (generators.empty()) {
          enumerator_ = std::make_shared<FiniteClosureEnumerator>(space_, gens_, probes);
        } else {
          throw std::invalid_argument(
              "exact enumeration is not available for disk actions; use HeuristicDepth");
        }
        break;
    }
  } else {
    enumerator_ = std::make_shared<WordSearchEnumerator>(space_, gens_, base_, depth_, isometric_,
                                                         probes);
  }
}

bool ActionSystem::complete_enumeration() const { return enumerator_->complete(); }

std::optional<std::size_t> ActionSystem::known_order() const { return enumerator_->order(); }

GroupElement ActionSystem::identity_element() const {
  return {std::vector<int>{}, Isometry::identity(space_)};
}

GroupElement ActionSystem::inverse(const GroupElement& g) const {
  GroupElement inv;
  inv.word.reserve(g.word.size());
  for (auto it = g.word.rbegin(); it != g.word.rend(); ++it) inv.word.push_back(-*it);
  inv.map = g.map.inverse();
  return inv;
}

GroupElement ActionSystem::word_element(const std::vector<int>& word) const {
  int ngens = generator_count();
  Isometry m = Isometry::identity(space_);
  // Word reads as a group product: leftmost letter acts last.
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    int letter = *it;
    if (letter == 0 || std::abs(letter) > ngens) throw std::invalid_argument("bad word letter");
    const Isometry& g = letter > 0 ? gens_[letter - 1] : gens_[ngens + (-letter) - 1];
    m = g.compose(m);
  }
  return {word, m};
}

std::vector<GroupElement> ActionSystem::mapping_near(const Point& x, const Point& y,
                                                     double r) const {
  space_.require(x);
  space_.require(y);
  auto out = enumerator_->mapping_near(*this, x, y, r);
  // Deterministic order: by displacement of x, then word length, then word.
  std::sort(out.begin(), out.end(), [&](const GroupElement& a, const GroupElement& b) {
    double da = space_.distance(a.map.apply(space_, x), y);
    double db = space_.distance(b.map.apply(space_, x), y);
    if (std::abs(da - db) > 1e-12) return da < db;
    if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
    return a.word < b.word;
  });
  return out;
}

OrbitBall ActionSystem::orbit_in_ball(const Point& x, double radius) const {
  if (!(radius > 0)) throw std::invalid_argument("orbit_in_ball needs positive radius");
  OrbitBall ball;
  ball.complete = complete_enumeration();
  auto gs = mapping_near(x, x, radius);
  for (auto& g : gs) {
    Point img = g.map.apply(space_, x);
    bool dup = false;
    for (const auto& e : ball.entries)
      if (space_.distance(e.image, img) <= kPointTol) {
        dup = true;
        break;
      }
    if (dup) continue;  // deduplicate by image: stabilizer collapses
    double disp = space_.distance(img, x);
    ball.entries.push_back({std::move(g), img, disp});
  }
  return ball;
}

std::vector<GroupElement> ActionSystem::transporter(const Window& a, const Window& b) const {
  space_.require(a.center);
  space_.require(b.center);
  if (isometric_) {
    // g Ball(cA, rA) = Ball(g cA, rA) meets Ball(cB, rB) iff centers are
    // within rA + rB.
    return mapping_near(a.center, b.center, a.radius + b.radius);
  }
  // Non-isometric plane maps: test the image ellipse against the target ball.
  std::vector<GroupElement> out;
  for (auto& g : enumerator_->all_elements(*this)) {
    auto gc = g.map.apply(space_, a.center);
    TrustRegionResult tr = min_affine_residual(
        g.map.linear(), {gc.x - b.center.x, gc.y - b.center.y}, a.radius);
    if (tr.residual <= b.radius + kPointTol) out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const GroupElement& a2, const GroupElement& b2) {
    if (a2.word.size() != b2.word.size()) return a2.word.size() < b2.word.size();
    return a2.word < b2.word;
  });
  return out;
}

std::vector<GroupElement> ActionSystem::enumerated_elements() const {
  return enumerator_->all_elements(*this);
}

std::vector<GroupElement> ActionSystem::stabilizer(const Point& x, double r_search) const {
  if (!(r_search > 0)) throw std::invalid_argument("stabilizer needs positive search radius");
  auto gs = mapping_near(x, x, r_search);
  std::vector<GroupElement> out;
  for (auto& g : gs)
    if (space_.distance(g.map.apply(space_, x), x) <= kPointTol) out.push_back(std::move(g));
  return out;
}

}  // namespace fundom
