#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "hmflow/surface.hpp"

namespace hmflow {

inline MobiusMap word_image(const std::vector<MobiusMap>& gens, const Word& w)
{
  MobiusMap m = MobiusMap::identity();
  for (int x : w) {
    const auto& g = gens.at(std::abs(x) - 1);
    m = m * (x > 0 ? g : g.inverse());
  }
  return m;
}

/// |g'(z)|^2 for a Mobius map acting on the chart.
inline double mobius_jacobian(const MobiusMap& g, cplx z)
{
  const cplx den = g.c * z + g.d;
  return 1.0 / std::norm(den * den);
}

inline cplx mobius_apply(const MobiusMap& g, cplx z) { return (g.a * z + g.b) / (g.c * z + g.d); }

/// Shortest reduced word in gens equal to target up to sign, or throws.
inline Word find_word(const std::vector<MobiusMap>& gens, const MobiusMap& target, int max_length = 8,
                      double tol = 1e-9)
{
  struct Node {
    Word w;
    MobiusMap m;
  };
  std::vector<Node> layer{{{}, MobiusMap::identity()}};
  if (matrix_distance(target, MobiusMap::identity()) < tol) return {};
  const int k = int(gens.size());
  for (int len = 1; len <= max_length; ++len) {
    std::vector<Node> next;
    for (const auto& n : layer)
      for (int g = 1; g <= k; ++g)
        for (int s : {g, -g}) {
          if (!n.w.empty() && n.w.back() == -s) continue;
          Node c{n.w, n.m * (s > 0 ? gens[g - 1] : gens[g - 1].inverse())};
          c.w.push_back(s);
          if (matrix_distance(c.m, target) < tol) return c.w;
          next.push_back(std::move(c));
        }
    layer = std::move(next);
  }
  throw Error(Stage::geometry, "no word of length <= " + std::to_string(max_length) + " found");
}

struct MeshVertex {
  cplx z;
  double lambda2 = 1.0;
  bool dirichlet = false;
  int owner = -1;  // canonical vertex carrying the value
  Word word;       // z = g_word(z_owner), value = rho(word) u(owner)
};

/// z_to = g_word(z_from).
struct Identification {
  int from = 0, to = 0;
  Word word;
};

struct StarEntry {
  int triangle = 0;
  int corner = 0;
  int copy = 0;  // the mesh vertex at that corner
  std::array<cplx, 3> z{};  // triangle pulled back into the owner's chart
};

inline double signed_area(const std::array<cplx, 3>& z)
{
  const cplx e1 = z[1] - z[0], e2 = z[2] - z[0];
  return 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
}

struct EquivariantMesh {
  std::string name;
  std::vector<MeshVertex> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<MobiusMap> domain_generators;
  std::vector<std::string> generator_names;
  std::vector<Identification> identifications;

  // filled by finalize()
  std::vector<int> canonical;
  std::vector<std::vector<StarEntry>> star;  // indexed by vertex; empty unless canonical
  double h_mesh = 0.0;       // longest edge in the domain metric
  double flat_h_min = 0.0;   // shortest edge in chart coordinates
  double min_lambda2 = 0.0;

  int size() const { return int(vertices.size()); }
  MobiusMap domain_deck(int v) const { return word_image(domain_generators, vertices[v].word); }

  double triangle_area(int t) const
  {
    const auto& tr = triangles[t];
    const cplx e1 = vertices[tr[1]].z - vertices[tr[0]].z, e2 = vertices[tr[2]].z - vertices[tr[0]].z;
    return 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
  }

  /// Resolves identifications into owners and words, builds stars and sizes.
  void finalize(double tol = 1e-9)
  {
    const int n = size();
    std::vector<std::vector<std::pair<int, Word>>> adj(n);
    for (const auto& id : identifications) {
      const cplx img = mobius_apply(word_image(domain_generators, id.word), vertices[id.from].z);
      if (std::abs(img - vertices[id.to].z) > tol * std::max(1.0, std::abs(img)))
        throw Error(Stage::geometry, name + ": identification does not match vertex positions");
      adj[id.from].push_back({id.to, id.word});
      adj[id.to].push_back({id.from, inverse_word(id.word)});
    }
    for (auto& v : vertices) v.owner = -1;
    canonical.clear();
    for (int r = 0; r < n; ++r) {
      if (vertices[r].owner >= 0) continue;
      vertices[r].owner = r;
      vertices[r].word.clear();
      canonical.push_back(r);
      std::vector<int> queue{r};
      bool dirichlet = false;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int a = queue[qi];
        dirichlet = dirichlet || vertices[a].dirichlet;
        for (const auto& [b, w] : adj[a]) {
          const Word wb = concat(w, vertices[a].word);
          if (vertices[b].owner >= 0) {
            if (matrix_distance(word_image(domain_generators, wb), word_image(domain_generators, vertices[b].word)) > tol)
              throw Error(Stage::geometry, name + ": inconsistent identification cycle at vertex " + std::to_string(b));
            continue;
          }
          vertices[b].owner = r;
          vertices[b].word = wb;
          queue.push_back(b);
        }
      }
      for (int a : queue) vertices[a].dirichlet = dirichlet;
    }

    star.assign(n, {});
    for (int t = 0; t < int(triangles.size()); ++t) {
      if (triangle_area(t) <= 0.0) throw Error(Stage::geometry, name + ": degenerate or clockwise triangle");
      for (int k = 0; k < 3; ++k) {
        const int v = triangles[t][k];
        StarEntry e{t, k, v, {}};
        const MobiusMap back = word_image(domain_generators, vertices[v].word).inverse();
        for (int i = 0; i < 3; ++i) e.z[i] = mobius_apply(back, vertices[triangles[t][i]].z);
        if (signed_area(e.z) <= 0.0) throw Error(Stage::geometry, name + ": pulled-back triangle is degenerate");
        star[vertices[v].owner].push_back(e);
      }
    }
    h_mesh = 0.0;
    flat_h_min = 1e300;
    for (const auto& tr : triangles)
      for (int k = 0; k < 3; ++k) {
        const auto& p = vertices[tr[k]];
        const auto& q = vertices[tr[(k + 1) % 3]];
        const double flat = std::abs(p.z - q.z);
        flat_h_min = std::min(flat_h_min, flat);
        h_mesh = std::max(h_mesh, flat * std::sqrt(0.5 * (p.lambda2 + q.lambda2)));
      }
    min_lambda2 = 1e300;
    for (const auto& v : vertices) {
      if (!(v.lambda2 > 0.0)) throw Error(Stage::geometry, name + ": non-positive conformal factor");
      min_lambda2 = std::min(min_lambda2, v.lambda2);
    }
  }
};

namespace detail {

/// Triangulates an (nx+1) x (ny+1) grid of vertex ids, index i + j (nx+1).
inline void grid_triangles(EquivariantMesh& m, int nx, int ny, int offset = 0)
{
  auto id = [&](int i, int j) { return offset + i + j * (nx + 1); };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
}

}  // namespace detail

/// Free generators of the commutator subgroup of PSL(2,Z).
inline std::vector<MobiusMap> modular_torus_generators()
{
  return {MobiusMap{1.0, 1.0, 1.0, 2.0}, MobiusMap{2.0, 1.0, 1.0, 1.0}};
}

/// Side pairing of the fundamental domain: left half of arc m to right half of arc m+3 (mod 6).
inline MobiusMap modular_arc_pairing(int m)
{
  const int mp = (m + 3) % 6;
  return {double(mp), double(-m * mp - 1), 1.0, double(-m)};
}

/// Equivariant mesh of the modular torus H^2 / [PSL(2,Z), PSL(2,Z)]: the domain
/// -1/2 <= x <= 11/2, |z - m| >= 1, truncated at the horocycle y = y_trunc.
/// Conformal factor is the hyperbolic one, 1/y^2.
inline EquivariantMesh modular_torus_mesh(int level, double y_trunc = 3.0)
{
  if (level < 0 || level > 6) throw Error(Stage::geometry, "refinement level out of range");
  if (!(y_trunc > 1.0)) throw Error(Stage::geometry, "truncation height must exceed 1");
  EquivariantMesh m;
  m.name = "modular-torus";
  m.domain_generators = modular_torus_generators();
  m.generator_names = {"A", "B"};
  const int nx = 12 << level, ny = 4 << level;
  auto bottom = [](double x) {
    const double s = x - std::round(x);
    return std::sqrt(1.0 - s * s);
  };
  auto xi = [&](int i) { return -0.5 + 6.0 * i / nx; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = xi(i), yb = bottom(x);
      const double y = j == ny ? y_trunc : yb * std::pow(y_trunc / yb, double(j) / ny);
      MeshVertex v;
      v.z = {x, y};
      v.lambda2 = 1.0 / (y * y);
      v.dirichlet = j == ny;
      m.vertices.push_back(v);
    }
  detail::grid_triangles(m, nx, ny);
  const auto& gens = m.domain_generators;
  const Word t6 = find_word(gens, MobiusMap{1.0, 6.0, 0.0, 1.0});
  for (int j = 0; j <= ny; ++j) m.identifications.push_back({j * (nx + 1), nx + j * (nx + 1), t6});
  const int per_unit = nx / 6;
  for (int arc = 0; arc < 6; ++arc) {
    const Word w = find_word(gens, modular_arc_pairing(arc));
    const int mp = (arc + 3) % 6;
    // left half of arc `arc`: x from arc - 1/2 to arc
    for (int k = 0; k <= per_unit / 2; ++k) {
      const int i = arc * per_unit + k;
      const int ip = (mp * per_unit + per_unit / 2) + (per_unit / 2 - k);
      m.identifications.push_back({i, ip, w});
    }
  }
  m.finalize();
  return m;
}

/// Flat torus chart [0, lx] x [0, ly] with translation decks; generator 1 is
/// z -> z + lx, generator 2 is z -> z + i ly.
inline EquivariantMesh flat_periodic_mesh(int nx, int ny, double lx = 1.0, double ly = 1.0)
{
  if (nx < 2 || ny < 2) throw Error(Stage::geometry, "flat mesh needs at least 2 cells per side");
  EquivariantMesh m;
  m.name = "flat-periodic";
  m.domain_generators = {MobiusMap{1.0, lx, 0.0, 1.0}, MobiusMap{1.0, cplx(0.0, ly), 0.0, 1.0}};
  m.generator_names = {"X", "Y"};
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      MeshVertex v;
      v.z = {lx * i / nx, ly * j / ny};
      m.vertices.push_back(v);
    }
  detail::grid_triangles(m, nx, ny);
  for (int j = 0; j <= ny; ++j) m.identifications.push_back({j * (nx + 1), nx + j * (nx + 1), {1}});
  for (int i = 0; i <= nx; ++i) m.identifications.push_back({i, i + ny * (nx + 1), {2}});
  m.finalize();
  return m;
}

/// Cylinder [x0, x1] x [0, period] with deck z -> z + i period and Dirichlet
/// data on both circles x = x0 and x = x1.
inline EquivariantMesh cylinder_mesh(int nx, int ny, double x0, double x1, double period = 2.0 * kPi)
{
  if (nx < 1 || ny < 3) throw Error(Stage::geometry, "cylinder mesh needs nx >= 1 and ny >= 3");
  if (!(x1 > x0)) throw Error(Stage::geometry, "cylinder mesh needs x1 > x0");
  EquivariantMesh m;
  m.name = "cylinder";
  m.domain_generators = {MobiusMap{1.0, cplx(0.0, period), 0.0, 1.0}};
  m.generator_names = {"C"};
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      MeshVertex v;
      v.z = {x0 + (x1 - x0) * i / nx, period * j / ny};
      v.dirichlet = i == 0 || i == nx;
      m.vertices.push_back(v);
    }
  detail::grid_triangles(m, nx, ny);
  for (int i = 0; i <= nx; ++i) m.identifications.push_back({i, i + ny * (nx + 1), {1}});
  m.finalize();
  return m;
}

}  // namespace hmflow
