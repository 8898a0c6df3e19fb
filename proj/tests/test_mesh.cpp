#include <gtest/gtest.h>

#include "hmflow/mesh.hpp"

using namespace hmflow;

TEST(Mesh, ModularTorusWordsAndPairings)
{
  const auto gens = modular_torus_generators();
  for (int m = 0; m < 6; ++m) {
    const auto P = modular_arc_pairing(m);
    EXPECT_NEAR(std::abs(P.det() - 1.0), 0.0, 1e-15);
    const Word w = find_word(gens, P);
    EXPECT_LT(matrix_distance(word_image(gens, w), P), 1e-12);
    // maps the arc midpoint m + i to m' + i
    EXPECT_LT(std::abs(mobius_apply(P, cplx(m, 1.0)) - cplx((m + 3) % 6, 1.0)), 1e-14);
  }
  // the cusp generator is a commutator
  const Word t6 = find_word(gens, MobiusMap{1.0, 6.0, 0.0, 1.0});
  EXPECT_EQ(t6.size(), 4u);
}

TEST(Mesh, ModularTorusStructure)
{
  for (int level : {0, 1, 2}) {
    const auto m = modular_torus_mesh(level);
    // Euler characteristic of the truncated once-punctured torus (a one-holed torus) is -1
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : m.triangles)
      for (int k = 0; k < 3; ++k) {
        int a = m.vertices[t[k]].owner, b = m.vertices[t[(k + 1) % 3]].owner;
        if (a > b) std::swap(a, b);
        ++edges[{a, b}];
      }
    const int V = int(m.canonical.size()), E = int(edges.size()), F = int(m.triangles.size());
    EXPECT_EQ(V - E + F, -1) << "level " << level;
    int boundary = 0;
    for (const auto& [e, c] : edges) {
      EXPECT_LE(c, 2);
      if (c == 1) {
        ++boundary;
        EXPECT_TRUE(m.vertices[e.first].dirichlet && m.vertices[e.second].dirichlet);
      }
    }
    EXPECT_EQ(boundary, 12 << level);
    // total area is the hyperbolic area 2 pi minus the truncated cusp area 6 / y_trunc
    double area = 0.0;
    for (int t = 0; t < int(m.triangles.size()); ++t) {
      double l = 0.0;
      for (int k = 0; k < 3; ++k) l += m.vertices[m.triangles[t][k]].lambda2 / 3;
      area += m.triangle_area(t) * l;
    }
    EXPECT_NEAR(area, 2 * kPi - 2.0, 0.5 / (1 << (2 * level)));
  }
}

TEST(Mesh, FlatPeriodic)
{
  const auto m = flat_periodic_mesh(8, 6, 2.0, 1.5);
  EXPECT_EQ(m.canonical.size(), 48u);
  std::size_t slots = 0;
  for (int c : m.canonical) {
    EXPECT_EQ(m.star[c].size(), 6u);
    slots += m.star[c].size();
  }
  EXPECT_EQ(slots, 3 * m.triangles.size());
  EXPECT_NEAR(m.flat_h_min, 0.25, 1e-15);
}

TEST(Mesh, FindWordFailsCleanly)
{
  EXPECT_THROW(find_word(modular_torus_generators(), MobiusMap{1.0, 1.0, 0.0, 1.0}, 4), Error);
}
