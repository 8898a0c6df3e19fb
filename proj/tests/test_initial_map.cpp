#include <gtest/gtest.h>

#include <random>

#include "hmflow/fixtures.hpp"
#include "test_util.hpp"

using namespace hmflow;
using hmflow::testing::random_mobius;

namespace {

// |du|^2 / x3^2 in chart coordinates by central differences
double fd_density(const std::function<H3Point(cplx)>& f, cplx z, double h = 1e-5)
{
  auto d = [&](cplx dz) {
    const H3Point p = f(z + dz), q = f(z - dz);
    const double a = (p.x1 - q.x1) / (2 * h), b = (p.x2 - q.x2) / (2 * h), c = (p.x3 - q.x3) / (2 * h);
    return a * a + b * b + c * c;
  };
  const double t = f(z).x3;
  return (d(h) + d(cplx(0, h))) / (t * t);
}

MobiusMap random_parabolic(std::mt19937_64& rng)
{
  const MobiusMap C = random_mobius(rng);
  std::normal_distribution<double> n(0.0, 1.0);
  return C * MobiusMap{1.0, cplx(n(rng), n(rng)), 0.0, 1.0} * C.inverse();
}

MobiusMap random_loxodromic(std::mt19937_64& rng)
{
  const MobiusMap C = random_mobius(rng);
  std::uniform_real_distribution<double> l(0.3, 3.0), th(-3.0, 3.0);
  const cplx h = std::exp(cplx(l(rng), th(rng)) / 2.0);
  return C * MobiusMap{h, 0.0, 0.0, 1.0 / h} * C.inverse();
}

}  // namespace

TEST(Ramp, EndpointConditions)
{
  EXPECT_EQ(ramp(0.0), 0.0);
  EXPECT_EQ(ramp(1.0), 1.0);
  EXPECT_EQ(ramp_d1(0.0), 0.0);
  EXPECT_EQ(ramp_d1(1.0), 0.0);
  EXPECT_NEAR(ramp_d2(1e-9), 0.0, 1e-7);
  EXPECT_NEAR(ramp_d2(1.0 - 1e-9), 0.0, 1e-7);
  EXPECT_NEAR(ramp(0.5), 0.5, 1e-15);
  for (double s = 0.01; s < 1.0; s += 0.01) {
    EXPECT_GT(ramp_d1(s), 0.0);
    EXPECT_NEAR((ramp(s + 1e-6) - ramp(s - 1e-6)) / 2e-6, ramp_d1(s), 1e-6);
  }
}

TEST(HorodiskMap, EnergyDensityIsTwo)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(-3.0, 3.0), y(1.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const MobiusMap P = random_parabolic(rng);
    const double period = 1.0 + (i % 3);
    auto f = [&](cplx z) { return horodisk_map(z, P, period); };
    const cplx z{x(rng), y(rng)};
    // hyperbolic domain metric: lambda^2 = 1/y^2
    EXPECT_NEAR(z.imag() * z.imag() * fd_density(f, z), 2.0, 1e-6);
    EXPECT_LT(dist_h3(f(z + period), P.apply(f(z))), 1e-9);
  }
}

TEST(HorodiskMap, IdentityForTranslation)
{
  const MobiusMap T6{1.0, 6.0, 0.0, 1.0};
  const H3Point p = horodisk_map({2.5, 1.7}, T6, 6.0);
  EXPECT_NEAR(p.x1, 2.5, 1e-14);
  EXPECT_NEAR(p.x2, 0.0, 1e-14);
  EXPECT_NEAR(p.x3, 1.7, 1e-14);
  EXPECT_THROW(horodisk_map({0.0, 2.0}, MobiusMap{2.0, 0.0, 0.0, 0.5}), Error);
}

TEST(CollapseMap, EnergyDensityIsOnePlusCSquared)
{
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-3.0, 3.0), y(-2.0, 2.0);
  for (double c : {0.0, 1.0, 2.0})
    for (int i = 0; i < 100; ++i) {
      const MobiusMap P = random_loxodromic(rng);
      const double th = std::atan(c);
      auto f = [&](cplx z) { return collapse_map(z, th, P); };
      const cplx z{x(rng), y(rng)};
      EXPECT_NEAR(fd_density(f, z), 1.0 + c * c, 1e-6);
      if (i % 10 == 0) {
        const double L = translation_length(P);
        EXPECT_LT(dist_h3(f(z + L), P.apply(f(z))), 1e-8);
        EXPECT_LT(dist_to_geodesic(f(z), axis(P)), 1e-8);
      }
    }
}

TEST(CollapseMap, Degeneracies)
{
  const MobiusMap P{2.0, 0.0, 0.0, 0.5};
  EXPECT_THROW(collapse_map({0.0, 0.0}, kPi / 2, P), Error);
  EXPECT_THROW(collapse_map({0.0, 0.0}, 0.1, MobiusMap{1.0, 1.0, 0.0, 1.0}), Error);
}

TEST(CollapseMap, AngleFromPrincipalPart)
{
  // a cylinder of circumference L with collapse slope c has q = -(L^2/16 pi^2)(1 + ic)^2 dz^2/z^2
  for (double L : {0.5, 1.0, 3.0})
    for (double c : {-2.0, 0.0, 0.7, 3.0}) {
      PrincipalPart pp;
      pp.order = 2;
      pp.leading = -(L * L / (16 * kPi * kPi)) * cplx(1.0, c) * cplx(1.0, c);
      EXPECT_NEAR(std::tan(collapse_angle_from_principal_part(pp)), c, 1e-12);
      EXPECT_TRUE(compatible_with_boundary(pp, L));
    }
}

TEST(CrownMap, ZeroBendIsPremapAndSeamsMatch)
{
  std::mt19937_64 rng(13);
  const H3Point h{0.3, -0.2, 1.4};
  const MobiusMap base = random_mobius(rng);
  CrownHinge flat{Geodesic{BoundaryPoint(0.0), BoundaryPoint::infinity()}, 0.0};
  for (double s : {0.0, 0.3, 1.0}) {
    const H3Point a = crown_map(h, MobiusMap::identity(), CrownRegion::strip, s, flat);
    EXPECT_LT(dist_h3(a, h), 1e-15);
  }
  CrownHinge bent{Geodesic{BoundaryPoint(cplx(1.0, 0.5)), BoundaryPoint(-2.0)}, 0.8};
  const MobiusMap next = base * elliptic_about_axis(bent.hinge, bent.angle);
  EXPECT_LT(dist_h3(crown_map(h, base, CrownRegion::strip, 0.0, bent), crown_map(h, base, CrownRegion::vertical)), 1e-10);
  EXPECT_LT(dist_h3(crown_map(h, base, CrownRegion::strip, 1.0, bent), crown_map(h, next, CrownRegion::vertical)), 1e-10);
}

TEST(GeodesicBlend, EndpointsAndMidpoint)
{
  const H3Point a{0.0, 0.0, 1.0}, b{1.0, 0.5, 2.0};
  EXPECT_LT(dist_h3(geodesic_blend(a, b, 0.0), a), 1e-15);
  EXPECT_LT(dist_h3(geodesic_blend(a, b, 1.0), b), 1e-15);
  const H3Point m = geodesic_blend(a, b, 0.5);
  EXPECT_NEAR(dist_h3(a, m), dist_h3(m, b), 1e-12);
  EXPECT_NEAR(dist_h3(a, m) + dist_h3(m, b), dist_h3(a, b), 1e-12);
}

TEST(LinearFit, RecoversSlope)
{
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(1.0 - 0.5 * v);
  const auto [b, r2] = linear_fit(x, y);
  EXPECT_NEAR(b, -0.5, 1e-14);
  EXPECT_NEAR(r2, 1.0, 1e-14);
}

namespace {

EquivariantProblem modular_problem(const EquivariantMesh& m) { return {m, modular_torus_generators()}; }

}  // namespace

TEST(AssembleU0, ClosedUpCaseIsIdentity)
{
  const auto m = modular_torus_mesh(1);
  const auto p = modular_problem(m);
  const auto u0 = assemble_u0(p, identity_embedding, {modular_cusp_blend(1.5, 2.2)});
  EXPECT_LT(u0.equivariance, 1e-10);
  for (int c : m.canonical) EXPECT_LT(dist_h3(u0.state.u[c], identity_embedding(m.vertices[c].z)), 1e-12);
  for (const auto& u : u0.state.u) EXPECT_EQ(u.x2, 0.0);
}

TEST(AssembleU0, CollarIsContinuousAndEnergyBounded)
{
  const auto m = modular_torus_mesh(2);
  const auto p = modular_problem(m);
  auto premap = [](cplx z) { return bumped(z, {2.5, 1.9}, 0.8, 0.3); };
  const auto u0 = assemble_u0(p, premap, {modular_cusp_blend(1.6, 2.2)});
  EXPECT_LT(u0.equivariance, 1e-10);
  // seam sampling: image edges across the collar stay comparable to domain edges
  double worst = 0.0;
  for (const auto& tr : m.triangles)
    for (int k = 0; k < 3; ++k) worst = std::max(worst, dist_h3(u0.state.u[tr[k]], u0.state.u[tr[(k + 1) % 3]]));
  EXPECT_LT(worst, 2.0 * m.h_mesh);
  // beyond the collar u0 is the horodisk map
  for (int c : m.canonical)
    if (m.vertices[c].z.imag() >= 2.2) EXPECT_LT(dist_h3(u0.state.u[c], identity_embedding(m.vertices[c].z)), 1e-12);
  double emax = 0.0;
  for (double e : energy_density(p, u0.state)) emax = std::max(emax, e);
  EXPECT_TRUE(std::isfinite(emax));
  EXPECT_LT(emax, 10.0);
}

TEST(AssembleU0, OverlappingCollarsAreReported)
{
  const auto m = modular_torus_mesh(0);
  const auto p = modular_problem(m);
  auto other = modular_cusp_blend(1.2, 1.8);
  other.name = "second";
  EXPECT_THROW(assemble_u0(p, identity_embedding, {modular_cusp_blend(1.5, 2.2), other}), Error);
}

TEST(TensionAudit, HorodiskRegionAtDiscretizationFloor)
{
  const auto m = modular_torus_mesh(2);
  const auto p = modular_problem(m);
  const auto u0 = assemble_u0(p, identity_embedding, {modular_cusp_blend(1.5, 2.2)});
  const auto audit = tension_audit(p, u0.state,
                                   {{"cusp", [&](int c) { return m.vertices[c].z.imag() > 2.2; }},
                                    {"core", [&](int c) { return m.vertices[c].z.imag() <= 2.2; }}});
  EXPECT_GT(audit.region("cusp").count, 0);
  EXPECT_LT(audit.region("cusp").sup, 10 * m.h_mesh * m.h_mesh);
  EXPECT_TRUE(std::isfinite(audit.region("core").sup));
}

TEST(TensionAudit, CollapseRegionAtDiscretizationFloor)
{
  // collapse map on a flat periodic chart with deck translation along the axis
  const double L = 1.3, c = 0.6;
  const auto m = flat_periodic_mesh(24, 24, L, 1.0);
  const MobiusMap P{std::exp(0.5 * L), 0.0, 0.0, std::exp(-0.5 * L)};
  const MobiusMap Q{std::exp(-0.5 * c), 0.0, 0.0, std::exp(0.5 * c)};
  EquivariantProblem p(m, {P, Q});
  const auto s = make_state(p, [&](cplx z) { return collapse_map(z, std::atan(c), P); });
  EXPECT_LT(equivariance_residual(p, s), 1e-10);
  const auto audit = tension_audit(p, s, {{"collapse", [](int) { return true; }}});
  EXPECT_LT(audit.region("collapse").sup, 10 * m.flat_h_min * m.flat_h_min);
}

TEST(FuchsianPremap, ConvergesInThePlane)
{
  const auto m = modular_torus_mesh(1);
  const auto p = modular_problem(m);
  const auto start = make_state(p, [](cplx z) { return bumped(z, {2.5, 1.7}, 0.5, 0.3, {1.0, 0.0, 1.0}); });
  const auto pm = fuchsian_premap(p, start);
  EXPECT_TRUE(pm.diag.converged);
  EXPECT_LT(pm.premap_quality, 1e-5);
  EXPECT_LT(pm.planarity, 1e-12);
  EXPECT_LT(sup_distance(m, pm.state, make_state(p, identity_embedding)), 10 * m.h_mesh);
}

TEST(FuchsianPremap, PreconditionsAreChecked)
{
  const auto m = modular_torus_mesh(0);
  const auto p = modular_problem(m);
  EXPECT_THROW(fuchsian_premap(p, make_state(p, [](cplx z) { return bumped(z); })), Error);
  std::vector<MobiusMap> complex_rho = modular_torus_generators();
  complex_rho[0] = MobiusMap::normalized(1.0, cplx(1.0, 0.1), 1.0, 2.0);
  EquivariantProblem pc(m, complex_rho);
  EXPECT_THROW(fuchsian_premap(pc, make_state(pc, identity_embedding)), Error);
  PrincipalPart bad;
  bad.order = 2;
  bad.leading = cplx(0.0, 1.0);
  EXPECT_THROW(fuchsian_premap(p, make_state(p, identity_embedding), {}, {{0, bad, 0.0}}), Error);
}
