#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hmflow/error.hpp"
#include "hmflow/hyperbolic.hpp"

namespace hmflow {

// ---------------------------------------------------------------- surfaces

struct MarkedBorderedSurface {
  int genus = 0;
  std::vector<int> boundary_marked;  // n_i, one entry per boundary component
  int punctures = 0;

  int boundary_components() const { return int(boundary_marked.size()); }
  int euler() const { return 2 - 2 * genus - boundary_components() - punctures; }
};

struct SurfaceReport {
  bool valid = false;
  bool out_of_scope = false;
  int euler = 0;
  int coordinate_count = 0;  // 6g - 6 + 3|P| + sum(n_i + 3)
  std::vector<std::string> violations;
};

inline SurfaceReport validate_surface(const MarkedBorderedSurface& s)
{
  SurfaceReport r;
  r.euler = s.euler();
  int marked = s.punctures;
  r.coordinate_count = 6 * s.genus - 6 + 3 * s.punctures;
  for (int n : s.boundary_marked) {
    r.coordinate_count += n + 3;
    marked += n;
  }
  if (s.genus < 0) r.violations.push_back("genus must be >= 0");
  if (s.punctures < 0) r.violations.push_back("puncture count must be >= 0");
  for (std::size_t i = 0; i < s.boundary_marked.size(); ++i)
    if (s.boundary_marked[i] < 1)
      r.violations.push_back("boundary component " + std::to_string(i) + " has no marked point");
  if (marked < 1) r.violations.push_back("marked set is empty");
  if (r.euler >= 0)
    r.violations.push_back("Euler characteristic of the punctured surface is " + std::to_string(r.euler) +
                           ", must be negative");
  r.out_of_scope = s.genus == 0 && s.boundary_components() == 1 && s.punctures == 0;
  r.valid = r.violations.empty();
  return r;
}

// ----------------------------------------------------------- triangulations

/// Side i of a triangle joins corner i to corner i+1 (counterclockwise).
struct SideRef {
  int tri = -1;
  int side = -1;
  bool valid() const { return tri >= 0; }
  friend bool operator==(const SideRef&, const SideRef&) = default;
  friend auto operator<=>(const SideRef&, const SideRef&) = default;
};

using CornerRef = SideRef;

/// Ideal triangulation given by edge labels on triangle sides. Interior edges
/// carry their label on two sides (glued with opposite orientation); boundary
/// arcs carry it on one.
class IdealTriangulation {
 public:
  IdealTriangulation() = default;

  IdealTriangulation(std::vector<std::array<int, 3>> sides, std::vector<std::string> names = {},
                     std::vector<int> preferred_tree = {})
      : sides_(std::move(sides)), names_(std::move(names)), preferred_tree_(std::move(preferred_tree))
  {
    int max_edge = -1;
    for (const auto& t : sides_)
      for (int e : t) {
        if (e < 0) throw Error(Stage::surface, "negative edge label");
        max_edge = std::max(max_edge, e);
      }
    num_edges_ = max_edge + 1;
    std::vector<std::vector<SideRef>> occ(num_edges_);
    for (int t = 0; t < num_triangles(); ++t)
      for (int i = 0; i < 3; ++i) occ[sides_[t][i]].push_back({t, i});
    glue_.assign(sides_.size(), {SideRef{}, SideRef{}, SideRef{}});
    edge_sides_.resize(num_edges_);
    for (int e = 0; e < num_edges_; ++e) {
      if (occ[e].empty() || occ[e].size() > 2)
        throw Error(Stage::surface, "edge " + edge_name(e) + " must lie on one or two triangle sides");
      edge_sides_[e] = occ[e];
      if (occ[e].size() == 2) {
        glue_[occ[e][0].tri][occ[e][0].side] = occ[e][1];
        glue_[occ[e][1].tri][occ[e][1].side] = occ[e][0];
      }
    }
    if (int(names_.size()) < num_edges_)
      for (int e = int(names_.size()); e < num_edges_; ++e) names_.push_back("e" + std::to_string(e));
    check_connected();
  }

  int num_triangles() const { return int(sides_.size()); }
  int num_edges() const { return num_edges_; }
  int edge(int t, int i) const { return sides_[t][i]; }
  int edge(SideRef s) const { return sides_[s.tri][s.side]; }
  const std::array<int, 3>& triangle(int t) const { return sides_[t]; }
  SideRef neighbor(int t, int i) const { return glue_[t][i]; }
  SideRef neighbor(SideRef s) const { return glue_[s.tri][s.side]; }
  bool is_boundary(int e) const { return edge_sides_[e].size() == 1; }
  const std::vector<SideRef>& sides_of(int e) const { return edge_sides_[e]; }
  std::string edge_name(int e) const { return e < int(names_.size()) ? names_[e] : "e" + std::to_string(e); }
  const std::vector<int>& preferred_tree() const { return preferred_tree_; }

  std::vector<int> interior_edges() const
  {
    std::vector<int> out;
    for (int e = 0; e < num_edges_; ++e)
      if (!is_boundary(e)) out.push_back(e);
    return out;
  }
  std::vector<int> boundary_arcs() const
  {
    std::vector<int> out;
    for (int e = 0; e < num_edges_; ++e)
      if (is_boundary(e)) out.push_back(e);
    return out;
  }

 private:
  void check_connected() const
  {
    if (sides_.empty()) throw Error(Stage::surface, "triangulation has no triangles");
    std::vector<bool> seen(sides_.size(), false);
    std::deque<int> q{0};
    seen[0] = true;
    while (!q.empty()) {
      const int t = q.front();
      q.pop_front();
      for (int i = 0; i < 3; ++i) {
        const auto n = glue_[t][i];
        if (n.valid() && !seen[n.tri]) {
          seen[n.tri] = true;
          q.push_back(n.tri);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw Error(Stage::surface, "triangulation is not connected");
  }

  std::vector<std::array<int, 3>> sides_;
  std::vector<std::string> names_;
  std::vector<int> preferred_tree_;
  std::vector<std::array<SideRef, 3>> glue_;
  std::vector<std::vector<SideRef>> edge_sides_;
  int num_edges_ = 0;
};

/// One end of the surface: an interior puncture or a boundary component.
/// corners lists the fan walk; marked_starts indexes the corners at which a
/// new marked point begins (one entry for a puncture).
struct EndInfo {
  bool boundary = false;
  std::vector<CornerRef> corners;
  std::vector<SideRef> crossed;  // side crossed after each corner (invalid: boundary jump)
  std::vector<int> marked_starts;
  std::vector<int> arcs;  // boundary arcs in walk order

  int marked_count() const { return int(marked_starts.size()); }
};

namespace detail {

// Next corner of the fan walk: cross side i+2 of the corner, or jump along a
// boundary arc to the next marked point.
inline std::pair<CornerRef, SideRef> fan_next(const IdealTriangulation& tri, CornerRef c)
{
  const int k = (c.side + 2) % 3;
  const SideRef n = tri.neighbor(c.tri, k);
  if (!n.valid()) return {{c.tri, k}, SideRef{}};
  return {{n.tri, n.side}, {c.tri, k}};
}

}  // namespace detail

inline std::vector<EndInfo> ends(const IdealTriangulation& tri)
{
  std::set<CornerRef> seen;
  std::vector<EndInfo> out;
  for (int t = 0; t < tri.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      if (seen.count({t, i})) continue;
      // walk once to learn whether this is a boundary cycle, then restart at a marked-point start
      std::vector<CornerRef> cyc;
      std::vector<SideRef> crossed;
      CornerRef c{t, i};
      do {
        cyc.push_back(c);
        auto [nc, s] = detail::fan_next(tri, c);
        crossed.push_back(s);
        c = nc;
        if (cyc.size() > 3u * tri.num_triangles() + 3) throw Error(Stage::surface, "fan walk does not close");
      } while (!(c == CornerRef{t, i}));
      EndInfo e;
      std::size_t start = 0;
      for (std::size_t j = 0; j < cyc.size(); ++j)
        if (!crossed[j].valid()) {
          e.boundary = true;
          start = (j + 1) % cyc.size();
          break;
        }
      for (std::size_t j = 0; j < cyc.size(); ++j) {
        const std::size_t jj = (start + j) % cyc.size();
        e.corners.push_back(cyc[jj]);
        e.crossed.push_back(crossed[jj]);
        seen.insert(cyc[jj]);
      }
      if (!e.boundary) {
        e.marked_starts.push_back(0);
      } else {
        for (std::size_t j = 0; j < e.corners.size(); ++j) {
          if (j == 0 || !e.crossed[j - 1].valid()) e.marked_starts.push_back(int(j));
          if (!e.crossed[j].valid()) e.arcs.push_back(tri.edge(e.corners[j].tri, (e.corners[j].side + 2) % 3));
        }
      }
      out.push_back(std::move(e));
    }
  return out;
}

inline MarkedBorderedSurface topology(const IdealTriangulation& tri)
{
  const auto es = ends(tri);
  int vertices = 0;
  MarkedBorderedSurface s;
  for (const auto& e : es) {
    vertices += e.marked_count();
    if (e.boundary)
      s.boundary_marked.push_back(e.marked_count());
    else
      ++s.punctures;
  }
  // marked points as vertices: V - E + F = chi(S) = 2 - 2g - k
  const int chi = vertices - tri.num_edges() + tri.num_triangles();
  s.genus = (2 - s.boundary_components() - chi) / 2;
  return s;
}

inline IdealTriangulation once_punctured_torus()
{
  // square with diagonal c; a: bottom/top, b: right/left
  return IdealTriangulation({{0, 1, 2}, {2, 0, 1}}, {"a", "b", "c"}, {2});
}

/// Torus with one boundary component carrying n marked points; n = 1 is the
/// blow-up of a corner of the punctured torus.
inline IdealTriangulation one_holed_torus(int n = 1)
{
  if (n < 1) throw Error(Stage::surface, "boundary needs at least one marked point");
  // 0:a 1:b 2:c 3:d 4:boundary arc
  std::vector<std::array<int, 3>> sides{{0, 4, 3}, {3, 1, 2}, {2, 0, 1}};
  std::vector<std::string> names{"a", "b", "c", "d", "beta0"};
  std::vector<int> tree{3, 2};
  int arc = 4;
  for (int j = 1; j < n; ++j) {
    const int l = int(names.size());
    names.push_back("beta" + std::to_string(2 * j - 1));
    names.push_back("beta" + std::to_string(2 * j));
    tree.push_back(arc);
    sides.push_back({arc, l, l + 1});
    names[arc] = "f" + std::to_string(j);
    arc = l + 1;
  }
  return IdealTriangulation(std::move(sides), std::move(names), std::move(tree));
}

// ------------------------------------------------------------- coordinates

/// Fock-Goncharov coordinates indexed by edge id; entries on boundary arcs are unused.
struct FGCoords {
  std::vector<cplx> z;
};

inline FGCoords fuchsian_shadow(const FGCoords& c)
{
  FGCoords out = c;
  for (auto& v : out.z) v = std::abs(v);
  return out;
}

/// +k is generator k-1, -k its inverse.
using Word = std::vector<int>;

inline Word inverse_word(const Word& w)
{
  Word out(w.rbegin(), w.rend());
  for (auto& x : out) x = -x;
  return out;
}

inline Word concat(const Word& a, const Word& b)
{
  Word out = a;
  for (int x : b) {
    if (!out.empty() && out.back() == -x)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

inline std::string word_string(const Word& w, const std::vector<std::string>& names = {})
{
  if (w.empty()) return "1";
  std::string s;
  for (int x : w) {
    const int g = std::abs(x) - 1;
    s += g < int(names.size()) ? names[g] : "g" + std::to_string(g);
    if (x < 0) s += "^-1";
    s += ' ';
  }
  s.pop_back();
  return s;
}

struct DevelopedTriangulation {
  IdealTriangulation tri;
  FGCoords coords;
  std::vector<std::array<BoundaryPoint, 3>> corners;  // fundamental region
  std::vector<std::array<BoundaryPoint, 3>> collar;   // third vertex of the lifted neighbour across each side
  std::vector<std::array<bool, 3>> tree;
  std::vector<SideRef> generator_sides;  // generator j is the deck element across this side
};

namespace detail {

inline double min_separation(const BoundaryPoint& s, std::initializer_list<BoundaryPoint> others)
{
  double m = 1.0;
  for (const auto& o : others) m = std::min(m, chordal_distance(s, o));
  return m;
}

// Third vertex S across side i of a triangle with corners c, so that
// cross_ratio(Q, R, P, S) = z with P = c_i, Q = c_{i+1}, R = c_{i+2}.
inline BoundaryPoint place_across(const std::array<BoundaryPoint, 3>& c, int i, cplx z)
{
  const auto& P = c[i];
  const auto& Q = c[(i + 1) % 3];
  const auto& R = c[(i + 2) % 3];
  return to_standard_triple(Q, R, P).inverse().apply(BoundaryPoint(z));
}

inline std::string side_name(const IdealTriangulation& tri, SideRef s)
{
  return tri.edge_name(tri.edge(s)) + " (triangle " + std::to_string(s.tri) + ", side " + std::to_string(s.side) + ")";
}

}  // namespace detail

inline constexpr double kCoincidenceTolerance = 1e-12;

/// Lays out the fundamental region from the base triangle (inf, -1, 0) along a
/// spanning tree of the dual graph, then the one-triangle collar. rotate, when
/// given, is applied to every newly placed vertex (used for bending).
inline DevelopedTriangulation develop(const IdealTriangulation& tri, const FGCoords& z,
                                      const std::vector<double>* bend_angles = nullptr)
{
  if (int(z.z.size()) < tri.num_edges()) throw Error(Stage::surface, "coordinate vector shorter than edge count");
  for (int e : tri.interior_edges())
    if (std::abs(z.z[e]) == 0.0 || !std::isfinite(std::abs(z.z[e])))
      throw Error(Stage::surface, "coordinate of edge " + tri.edge_name(e) + " must be finite and nonzero");

  DevelopedTriangulation dev;
  dev.tri = tri;
  dev.coords = z;
  const int F = tri.num_triangles();
  dev.corners.assign(F, {});
  dev.collar.assign(F, {});
  dev.tree.assign(F, {false, false, false});
  std::vector<bool> placed(F, false);

  auto new_vertex = [&](const std::array<BoundaryPoint, 3>& c, int t, int i) {
    const int e = tri.edge(t, i);
    BoundaryPoint S = detail::place_across(c, i, z.z[e]);
    if (bend_angles) {
      const double th = (*bend_angles)[e];
      if (th != 0.0) S = elliptic_about_axis(Geodesic{c[i], c[(i + 1) % 3]}, th).apply(S);
    }
    if (detail::min_separation(S, {c[0], c[1], c[2]}) < kCoincidenceTolerance)
      throw Error(Stage::surface, "coincident vertex placed across edge " + detail::side_name(tri, {t, i}));
    return S;
  };

  dev.corners[0] = {BoundaryPoint::infinity(), BoundaryPoint(-1.0), BoundaryPoint(0.0)};
  placed[0] = true;
  std::deque<int> q{0};
  const auto& pref = tri.preferred_tree();
  auto rank = [&](int t, int i) {
    const int e = tri.edge(t, i);
    const auto it = std::find(pref.begin(), pref.end(), e);
    return it == pref.end() ? int(pref.size()) + i : int(it - pref.begin());
  };
  while (!q.empty()) {
    const int t = q.front();
    q.pop_front();
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return rank(t, x) < rank(t, y); });
    for (int i : order) {
      const SideRef n = tri.neighbor(t, i);
      if (!n.valid() || placed[n.tri]) continue;
      const auto& c = dev.corners[t];
      auto& d = dev.corners[n.tri];
      d[n.side] = c[(i + 1) % 3];
      d[(n.side + 1) % 3] = c[i];
      d[(n.side + 2) % 3] = new_vertex(c, t, i);
      placed[n.tri] = true;
      dev.tree[t][i] = dev.tree[n.tri][n.side] = true;
      q.push_back(n.tri);
    }
  }
  for (int t = 0; t < F; ++t)
    for (int i = 0; i < 3; ++i) {
      const SideRef n = tri.neighbor(t, i);
      if (!n.valid()) continue;
      dev.collar[t][i] = dev.tree[t][i] ? dev.corners[n.tri][(n.side + 2) % 3] : new_vertex(dev.corners[t], t, i);
    }
  for (int e : tri.interior_edges()) {
    const SideRef s = tri.sides_of(e)[0];
    if (!dev.tree[s.tri][s.side]) dev.generator_sides.push_back(s);
  }
  return dev;
}

/// Framed representation: generator images, framing values at the corners of
/// the fundamental region, and the deck word across every side.
struct FramedRepresentation {
  std::vector<MobiusMap> generators;
  std::vector<std::array<BoundaryPoint, 3>> framing;
  std::vector<std::array<Word, 3>> side_words;

  MobiusMap image(const Word& w) const
  {
    MobiusMap m = MobiusMap::identity();
    for (int x : w) {
      const auto& g = generators.at(std::abs(x) - 1);
      m = m * (x > 0 ? g : g.inverse());
    }
    return m;
  }

  FramedRepresentation conjugated(const MobiusMap& A) const
  {
    FramedRepresentation out = *this;
    const MobiusMap Ai = A.inverse();
    for (auto& g : out.generators) g = A * g * Ai;
    for (auto& tri : out.framing)
      for (auto& p : tri) p = A.apply(p);
    return out;
  }
};

/// Deck element across each side of the developed region.
inline MobiusMap side_deck(const DevelopedTriangulation& dev, int t, int i)
{
  const SideRef n = dev.tri.neighbor(t, i);
  if (!n.valid()) throw Error(Stage::surface, "no deck element across a boundary arc");
  const auto& c = dev.corners[t];
  const auto& d = dev.corners[n.tri];
  return map_triple({d[n.side], d[(n.side + 1) % 3], d[(n.side + 2) % 3]},
                    {c[(i + 1) % 3], c[i], dev.collar[t][i]});
}

/// Framing equivariance across every glued side plus the pairing of opposite
/// side words; zero for an exact development.
inline double relator_residual(const FramedRepresentation& rep, const IdealTriangulation& tri)
{
  double worst = 0.0;
  for (int t = 0; t < tri.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const SideRef n = tri.neighbor(t, i);
      if (!n.valid()) continue;
      const MobiusMap g = rep.image(rep.side_words[t][i]);
      const auto& c = rep.framing[t];
      const auto& d = rep.framing[n.tri];
      worst = std::max(worst, chordal_distance(g.apply(d[n.side]), c[(i + 1) % 3]));
      worst = std::max(worst, chordal_distance(g.apply(d[(n.side + 1) % 3]), c[i]));
      const MobiusMap back = rep.image(rep.side_words[n.tri][n.side]);
      worst = std::max(worst, matrix_distance(g * back, MobiusMap::identity()));
    }
  return worst;
}

inline FramedRepresentation holonomy(const DevelopedTriangulation& dev)
{
  FramedRepresentation rep;
  rep.framing = dev.corners;
  const int F = dev.tri.num_triangles();
  rep.side_words.assign(F, {});
  for (std::size_t j = 0; j < dev.generator_sides.size(); ++j) {
    const SideRef s = dev.generator_sides[j];
    MobiusMap g;
    try {
      g = side_deck(dev, s.tri, s.side);
    } catch (const Error& e) {
      throw Error(Stage::surface, "ill-conditioned triple matching across " + detail::side_name(dev.tri, s) + ": " + e.what());
    }
    rep.generators.push_back(g);
    const SideRef n = dev.tri.neighbor(s);
    rep.side_words[s.tri][s.side] = {int(j) + 1};
    rep.side_words[n.tri][n.side] = {-(int(j) + 1)};
  }
  return rep;
}

inline std::vector<std::string> generator_names(const DevelopedTriangulation& dev)
{
  std::vector<std::string> out;
  for (const auto& s : dev.generator_sides) out.push_back(dev.tri.edge_name(dev.tri.edge(s)));
  return out;
}

/// Edges whose four framing values are not pairwise distinct.
inline std::vector<int> fg_degenerate_edges(const FramedRepresentation& rep, const IdealTriangulation& tri)
{
  std::vector<int> bad;
  for (int e : tri.interior_edges()) {
    const SideRef s = tri.sides_of(e)[0];
    const SideRef n = tri.neighbor(s);
    const auto& c = rep.framing[s.tri];
    const BoundaryPoint S = rep.image(rep.side_words[s.tri][s.side]).apply(rep.framing[n.tri][(n.side + 2) % 3]);
    const std::array<BoundaryPoint, 4> pts{c[0], c[1], c[2], S};
    bool ok = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) ok &= chordal_distance(pts[a], pts[b]) > kCoincidenceTolerance;
    if (!ok) bad.push_back(e);
  }
  return bad;
}

inline FGCoords fg_from_rep(const FramedRepresentation& rep, const IdealTriangulation& tri)
{
  const auto bad = fg_degenerate_edges(rep, tri);
  if (!bad.empty()) {
    std::string names;
    for (int e : bad) names += " " + tri.edge_name(e);
    throw Error(Stage::surface, "degenerate framing on edges" + names);
  }
  FGCoords out;
  out.z.assign(tri.num_edges(), cplx{1.0, 0.0});
  for (int e : tri.interior_edges()) {
    const SideRef s = tri.sides_of(e)[0];
    const SideRef n = tri.neighbor(s);
    const auto& c = rep.framing[s.tri];
    const int i = s.side;
    const BoundaryPoint S = rep.image(rep.side_words[s.tri][i]).apply(rep.framing[n.tri][(n.side + 2) % 3]);
    out.z[e] = cross_ratio(c[(i + 1) % 3], c[(i + 2) % 3], c[i], S);
  }
  return out;
}

// ---------------------------------------------------------- peripheral data

/// Product of side words along the fan walk of an end, starting at its first corner.
inline Word peripheral_word(const FramedRepresentation& rep, const EndInfo& end)
{
  Word w;
  for (const auto& s : end.crossed)
    if (s.valid()) w = concat(w, rep.side_words[s.tri][s.side]);
  return w;
}

inline MobiusMap peripheral_monodromy(const FramedRepresentation& rep, const IdealTriangulation& tri, int end_id)
{
  const auto es = ends(tri);
  if (end_id < 0 || end_id >= int(es.size())) throw Error(Stage::surface, "no end " + std::to_string(end_id));
  return rep.image(peripheral_word(rep, es[end_id]));
}

/// Framing values of the marked points of an end, in walk order.
inline std::vector<BoundaryPoint> end_framing(const FramedRepresentation& rep, const EndInfo& end)
{
  std::vector<BoundaryPoint> out;
  Word w;
  std::size_t next = 0;
  for (std::size_t j = 0; j < end.corners.size(); ++j) {
    if (next < end.marked_starts.size() && end.marked_starts[next] == int(j)) {
      const auto c = end.corners[j];
      out.push_back(rep.image(w).apply(rep.framing[c.tri][c.side]));
      ++next;
    }
    if (end.crossed[j].valid()) w = concat(w, rep.side_words[end.crossed[j].tri][end.crossed[j].side]);
  }
  return out;
}

/// How an interior puncture is realised: a cusp or a geodesic boundary
/// (cylinder end). Boundary components with marked points are crowns.
enum class EndKind { cusp, cylinder, crown };

inline const char* end_kind_name(EndKind k)
{
  switch (k) {
    case EndKind::cusp: return "cusp";
    case EndKind::cylinder: return "cylinder";
    case EndKind::crown: return "crown";
  }
  return "?";
}

struct TypeReport {
  bool type_preserving = true;
  std::vector<EndKind> kinds;
  std::vector<MobiusType> monodromy_types;
  std::vector<std::string> violations;
};

inline TypeReport type_report(const FramedRepresentation& rep, const IdealTriangulation& tri,
                              const std::vector<EndKind>& puncture_kinds = {}, double tol = kClassifyTolerance)
{
  TypeReport r;
  const auto es = ends(tri);
  int p = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    EndKind kind = EndKind::crown;
    if (!es[k].boundary) {
      kind = p < int(puncture_kinds.size()) ? puncture_kinds[p] : EndKind::cusp;
      ++p;
    }
    const auto type = classify(rep.image(peripheral_word(rep, es[k])), tol);
    r.kinds.push_back(kind);
    r.monodromy_types.push_back(type);
    const std::string label = "end " + std::to_string(k) + " (" + end_kind_name(kind) + ")";
    if (type == MobiusType::identity) {
      r.violations.push_back(label + ": identity peripheral monodromy (apparent singularity)");
    } else if (kind == EndKind::cusp && type != MobiusType::parabolic) {
      r.violations.push_back(label + ": monodromy is " + type_name(type) + ", expected parabolic");
    } else if (kind != EndKind::cusp && type != MobiusType::loxodromic) {
      r.violations.push_back(label + ": monodromy is " + type_name(type) + ", expected loxodromic");
    }
  }
  r.type_preserving = r.violations.empty();
  return r;
}

inline bool is_type_preserving(const FramedRepresentation& rep, const IdealTriangulation& tri,
                               const std::vector<EndKind>& puncture_kinds = {})
{
  return type_report(rep, tri, puncture_kinds).type_preserving;
}

/// Signing: +1 picks the attracting fixed point of a loxodromic peripheral, -1 the repelling one.
struct Signing {
  std::vector<int> sign;  // per interior puncture
};

inline BoundaryPoint signed_fixed_point(const MobiusMap& m, int sign)
{
  const auto type = classify(m);
  if (type == MobiusType::parabolic) return fixed_points(m)[0];
  const Geodesic g = axis(m);
  return sign >= 0 ? g.to : g.from;
}

/// Punctures whose framing value is not the signed fixed point of their monodromy.
inline std::vector<int> signing_mismatches(const FramedRepresentation& rep, const IdealTriangulation& tri,
                                           const Signing& signing, double tol = 1e-8)
{
  std::vector<int> bad;
  int p = 0;
  for (const auto& e : ends(tri)) {
    if (e.boundary) continue;
    const MobiusMap m = rep.image(peripheral_word(rep, e));
    const int s = p < int(signing.sign.size()) ? signing.sign[p] : 1;
    const auto c = e.corners[0];
    if (classify(m) == MobiusType::loxodromic &&
        chordal_distance(signed_fixed_point(m, s), rep.framing[c.tri][c.side]) > tol)
      bad.push_back(p);
    ++p;
  }
  return bad;
}

// --------------------------------------------------------------- degeneracy

inline constexpr double kAxisTolerance = 1e-8;

enum class Degeneracy { nondegenerate, case1, case2, case3 };

inline const char* degeneracy_name(Degeneracy d)
{
  switch (d) {
    case Degeneracy::nondegenerate: return "nondegenerate";
    case Degeneracy::case1: return "degenerate (single framing point)";
    case Degeneracy::case2: return "degenerate (two framing points)";
    case Degeneracy::case3: return "degenerate (boundary arc with coincident ends)";
  }
  return "?";
}

inline Degeneracy classify_degenerate(const FramedRepresentation& rep, const IdealTriangulation& tri,
                                      double tol = kAxisTolerance)
{
  std::vector<BoundaryPoint> clusters;
  for (const auto& t : rep.framing)
    for (const auto& p : t) {
      bool found = false;
      for (const auto& c : clusters) found |= chordal_distance(c, p) <= tol;
      if (!found) clusters.push_back(p);
    }
  const auto es = ends(tri);
  auto fixes = [&](const MobiusMap& m, const BoundaryPoint& p) {
    return chordal_distance(m.apply(p), p) <= tol;
  };
  std::vector<MobiusMap> punct;
  for (const auto& e : es)
    if (!e.boundary) punct.push_back(rep.image(peripheral_word(rep, e)));

  if (clusters.size() == 1) {
    bool all = true;
    for (const auto& m : punct) {
      const auto type = classify(m);
      all &= type == MobiusType::identity || (type == MobiusType::parabolic && fixes(m, clusters[0]));
    }
    if (all) return Degeneracy::case1;
  }
  if (clusters.size() == 2) {
    bool all = true;
    for (const auto& m : punct) all &= fixes(m, clusters[0]) && fixes(m, clusters[1]);
    if (all) return Degeneracy::case2;
  }
  for (int e : tri.boundary_arcs()) {
    const SideRef s = tri.sides_of(e)[0];
    const auto& c = rep.framing[s.tri];
    if (chordal_distance(c[s.side], c[(s.side + 1) % 3]) <= tol) return Degeneracy::case3;
  }
  return Degeneracy::nondegenerate;
}

// ------------------------------------------------------- semisimple search

struct SemisimplePair {
  Word first, second;
};

inline constexpr int kWordLength = 8;
inline constexpr int kPowerSweep = 64;

inline bool geodesics_disjoint(const Geodesic& ga, const Geodesic& gb, double tol = kAxisTolerance)
{
  for (const auto& p : {ga.from, ga.to})
    for (const auto& q : {gb.from, gb.to})
      if (chordal_distance(p, q) <= tol) return false;
  return true;
}

inline bool axes_disjoint(const MobiusMap& a, const MobiusMap& b, double tol = kAxisTolerance)
{
  return geodesics_disjoint(axis(a), axis(b), tol);
}

inline SemisimplePair semisimple_pair(const FramedRepresentation& rep, int max_length = kWordLength,
                                      int max_power = kPowerSweep)
{
  const int ng = int(rep.generators.size());
  if (ng == 0) throw Error(Stage::surface, "representation has no generators");
  // one representative word per distinct axis
  std::vector<std::pair<Word, Geodesic>> semisimple;
  std::vector<std::pair<Word, MobiusMap>> parabolic;
  std::vector<std::pair<Word, MobiusMap>> frontier{{Word{}, MobiusMap::identity()}};
  auto same_axis = [](const Geodesic& a, const Geodesic& b) {
    const double d1 = std::max(chordal_distance(a.from, b.from), chordal_distance(a.to, b.to));
    const double d2 = std::max(chordal_distance(a.from, b.to), chordal_distance(a.to, b.from));
    return std::min(d1, d2) <= kAxisTolerance;
  };
  auto consider = [&](const Word& w, const MobiusMap& m) -> std::optional<SemisimplePair> {
    const auto type = classify(m);
    if (is_semisimple(type)) {
      const Geodesic g = axis(m);
      bool known = false;
      for (const auto& [w2, g2] : semisimple) {
        if (geodesics_disjoint(g, g2)) return SemisimplePair{w2, w};
        known |= same_axis(g, g2);
      }
      if (!known) semisimple.emplace_back(w, g);
    } else if (type == MobiusType::parabolic && parabolic.size() < 64) {
      bool known = false;
      const auto p = fixed_points(m)[0];
      for (const auto& [w2, m2] : parabolic) known |= chordal_distance(fixed_points(m2)[0], p) <= kAxisTolerance;
      if (!known) parabolic.emplace_back(w, m);
    }
    return std::nullopt;
  };
  for (int len = 1; len <= max_length; ++len) {
    std::vector<std::pair<Word, MobiusMap>> next;
    for (const auto& [w, m] : frontier)
      for (int g = 1; g <= ng; ++g)
        for (int s : {g, -g}) {
          if (!w.empty() && w.back() == -s) continue;
          Word w2 = w;
          w2.push_back(s);
          const MobiusMap m2 = m * (s > 0 ? rep.generators[g - 1] : rep.generators[g - 1].inverse());
          if (auto r = consider(w2, m2)) return *r;
          next.emplace_back(std::move(w2), m2);
        }
    frontier = std::move(next);
    if (len >= 3 && frontier.size() > 20000) break;
  }
  // parabolic pairs with distinct fixed points: alpha^n delta becomes loxodromic
  for (std::size_t i = 0; i < parabolic.size(); ++i)
    for (std::size_t j = 0; j < parabolic.size(); ++j) {
      if (i == j) continue;
      const auto pa = fixed_points(parabolic[i].second)[0];
      const auto pd = fixed_points(parabolic[j].second)[0];
      if (chordal_distance(pa, pd) <= kAxisTolerance) continue;
      Word an;
      for (int n = 1; n <= max_power; ++n) {
        an = concat(an, parabolic[i].first);
        const Word w = concat(an, parabolic[j].first);
        if (auto r = consider(w, rep.image(w))) return *r;
        if (semisimple.size() > 0) {
          // conjugate the semisimple element by generators that move its fixed points
          const Word ws = semisimple.front().first;
          for (int g = 1; g <= ng; ++g)
            for (int s : {g, -g}) {
              const Word c = concat(concat(Word{s}, ws), Word{-s});
              if (auto r2 = consider(c, rep.image(c))) return *r2;
            }
        }
      }
    }
  throw Error(Stage::surface, "no pair of semisimple elements with distinct axes among words of length <= " +
                                  std::to_string(max_length));
}

// --------------------------------------------------------------------- bend

/// Bends the pleated plane of a Fuchsian representation along the lifted
/// edges: every vertex placed across edge e is rotated by theta_e about that
/// edge. The result is conjugated so that the base triangle keeps its framing.
inline FramedRepresentation bend(const FramedRepresentation& fuchsian, const IdealTriangulation& tri,
                                 const std::vector<double>& theta)
{
  if (int(theta.size()) < tri.num_edges()) throw Error(Stage::surface, "bend angle vector shorter than edge count");
  const FGCoords shadow = fuchsian_shadow(fg_from_rep(fuchsian, tri));
  const auto dev = develop(tri, shadow, &theta);
  FramedRepresentation out = holonomy(dev);
  const MobiusMap A = map_triple(dev.corners[0], fuchsian.framing[0]);
  out = out.conjugated(A);
  return out;
}

inline std::vector<double> edge_arguments(const FGCoords& z)
{
  std::vector<double> out;
  for (const auto& v : z.z) out.push_back(std::arg(v));
  return out;
}

}  // namespace hmflow
